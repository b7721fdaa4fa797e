"""Left principal eigenvectors of sparse nonnegative operators.

This is the exact reference route for everything the samplers estimate:
quasi-stationary distributions of sub-stochastic kernels, stationary
distributions of stochastic ones, and adjacency eigenvector centrality.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_array, coo_array

from .graph import DirectedGraph, is_strongly_connected

_DEFAULT_TOL = 1e-12
_DEFAULT_MAX_ITER = 10**6
# Iterations without residual improvement before treating the operator as
# periodic and switching to a diagonally shifted copy.
_STALL_LIMIT = 1000
_SHIFT = 1e-3


@dataclass(frozen=True)
class SpectralResult:
    """Converged left eigenpair.

    ``vector`` is l1-normalized and nonnegative. ``shift`` records the
    diagonal offset applied when plain iteration stalled on a periodic
    structure; the reported eigenvalue already has it subtracted.
    """

    vector: np.ndarray
    eigenvalue: float
    iterations: int
    residual: float
    shift: float = 0.0


@dataclass(frozen=True, eq=False)
class SparseOperator:
    """Nonnegative sparse matrix acting on row vectors from the left.

    Stored values are strictly positive and finite; structural zeros are
    simply absent. Built from COO triplets or a dense array, backed by
    scipy CSR.
    """

    n: int
    matrix: csr_array

    @classmethod
    def from_coo(
        cls, n: int, rows: np.ndarray, cols: np.ndarray, values: np.ndarray
    ) -> "SparseOperator":
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        if n <= 0:
            raise ValueError("operator must have at least one row")
        if not (rows.shape == cols.shape == values.shape) or rows.ndim != 1:
            raise ValueError("rows, cols, values must be equal-length 1-d arrays")
        if rows.size:
            if rows.min() < 0 or rows.max() >= n or cols.min() < 0 or cols.max() >= n:
                raise ValueError("entry index out of range")
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise ValueError("entry values must be finite and strictly positive")
        mat = coo_array((values, (rows, cols)), shape=(n, n)).tocsr()
        mat.sum_duplicates()
        return cls(n=n, matrix=mat)

    @classmethod
    def from_dense(cls, dense: np.ndarray) -> "SparseOperator":
        dense = np.asarray(dense, dtype=np.float64)
        if dense.ndim != 2 or dense.shape[0] != dense.shape[1]:
            raise ValueError("dense operator must be square")
        rows, cols = np.nonzero(dense)
        return cls.from_coo(dense.shape[0], rows, cols, dense[rows, cols])

    @classmethod
    def from_graph(cls, graph: DirectedGraph) -> "SparseOperator":
        """Unit-weight adjacency operator."""
        if graph.n == 0:
            raise ValueError("empty graph")
        src, dst = graph.edge_arrays()
        return cls.from_coo(graph.n, src, dst, np.ones(graph.m))

    def left_apply(self, v: np.ndarray) -> np.ndarray:
        """Compute ``v @ M`` for a row vector ``v``."""
        return self.matrix.T @ np.asarray(v, dtype=np.float64)

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).ravel()

    def occupied_columns(self) -> np.ndarray:
        """Boolean mask of columns holding at least one entry."""
        return np.bincount(self.matrix.indices, minlength=self.n) > 0

    def entries(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        coo = self.matrix.tocoo()
        return (
            coo.row.astype(np.int64),
            coo.col.astype(np.int64),
            coo.data.astype(np.float64),
        )

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()


def left_leading_eigen(
    operator: SparseOperator,
    tol: float = _DEFAULT_TOL,
    max_iter: int = _DEFAULT_MAX_ITER,
) -> SpectralResult:
    """Power iteration for the dominant left eigenvector.

    Iterates ``v <- v M / ||v M||_1`` from the uniform vector and stops
    once successive iterates differ by at most ``tol`` in l1, which
    bounds the eigen-residual ``||v M - lam v||_1 <= tol * lam``. If the
    residual fails to improve for 1000 consecutive iterations the
    operator is presumed periodic and iteration continues on
    ``M + shift*I``; the shift leaves eigenvectors untouched and is
    subtracted from the reported eigenvalue.

    Raises
    ------
    ValueError
        If some column is entirely zero (mass would drain out of it,
        so no strictly positive eigenvector can exist), or the
        iteration cap is hit.
    """
    if tol <= 0 or max_iter < 1:
        raise ValueError("tol must be positive and max_iter at least 1")
    if not operator.occupied_columns().all():
        raise ValueError("operator has an all-zero column; not irreducible")
    n = operator.n
    v = np.full(n, 1.0 / n)
    shift = 0.0
    best_residual = np.inf
    stall = 0
    residual = np.inf
    for iteration in range(1, max_iter + 1):
        u = operator.left_apply(v)
        if shift:
            u = u + shift * v
        lam = u.sum()
        if not np.isfinite(lam) or lam <= 0:
            raise ValueError(f"iteration produced invalid eigenvalue {lam}")
        u /= lam
        residual = np.abs(u - v).sum()
        v = u
        if residual <= tol:
            return SpectralResult(
                vector=v,
                eigenvalue=float(lam - shift),
                iterations=iteration,
                residual=float(residual),
                shift=shift,
            )
        if residual < best_residual:
            best_residual = residual
            stall = 0
        else:
            stall += 1
            if stall >= _STALL_LIMIT and shift == 0.0:
                shift = _SHIFT
                best_residual = np.inf
                stall = 0
    raise RuntimeError(
        f"power iteration did not reach tol={tol:g} within {max_iter} "
        f"iterations (last residual {residual:.3e})"
    )


def stationary(
    operator: SparseOperator,
    tol: float = _DEFAULT_TOL,
    max_iter: int = _DEFAULT_MAX_ITER,
) -> SpectralResult:
    """Stationary distribution of a row-stochastic operator.

    Rows must sum to 1 within 1e-12. The eigenvalue is pinned to
    exactly 1.0 when the computed value is within ``tol`` of it.
    """
    row = operator.row_sums()
    if np.max(np.abs(row - 1.0)) > 1e-12:
        worst = int(np.argmax(np.abs(row - 1.0)))
        raise ValueError(
            f"operator is not row-stochastic (row {worst} sums to {row[worst]:.15g})"
        )
    result = left_leading_eigen(operator, tol=tol, max_iter=max_iter)
    eig = result.eigenvalue
    if abs(eig - 1.0) < tol:
        eig = 1.0
    return SpectralResult(
        vector=result.vector,
        eigenvalue=eig,
        iterations=result.iterations,
        residual=result.residual,
        shift=result.shift,
    )


def eigenvector_centrality(
    graph: DirectedGraph,
    tol: float = _DEFAULT_TOL,
    max_iter: int = _DEFAULT_MAX_ITER,
) -> SpectralResult:
    """Left adjacency eigenvector of a strongly connected graph.

    Strong connectivity makes the adjacency matrix irreducible, which
    is what guarantees a unique positive principal eigenvector.
    """
    if not is_strongly_connected(graph):
        raise ValueError("eigenvector centrality requires a strongly connected graph")
    return left_leading_eigen(SparseOperator.from_graph(graph), tol=tol, max_iter=max_iter)
