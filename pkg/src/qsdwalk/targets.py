"""Target distributions, proposal chains, and the acceptance construction.

The construction at the center of the package: given a proposal chain Q
and a target weight vector, per-transition acceptance bounds

    b(i, j) = (target_j / target_i) * alpha(i, j) / Q(i, j)

are scaled by their maximum c so that thinning Q by gamma = b / c yields
a killed chain whose quasi-stationary distribution is exactly the
target. The eigenvector-centrality variant instead uses b(i, j) equal
to the out-degree of i, which turns the killed chain into the adjacency
matrix divided by c.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Union

import numpy as np

from .graph import DirectedGraph, reachable_set
from .spectral import SparseOperator, SpectralResult, eigenvector_centrality
from .validation import check_node_array, check_probability_vector, require_graph

TARGET_KINDS = ("uniform", "indegree", "custom", "evc")

# Optional override for the redistribution weights alpha(i, j); called with
# (rows, cols, support_counts) over the proposal entries and must return
# positive weights summing to 1 within each column. Experimental hook.
SupportWeights = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class TargetSpec:
    """What the sampler should converge to.

    ``uniform``, ``indegree``, and ``evc`` derive the target from the
    graph at build time; ``custom`` carries an explicit probability
    vector. ``evc`` is special-cased throughout because the target (the
    adjacency eigenvector) is never evaluated pointwise by the sampler.
    """

    kind: str
    vector: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.kind not in TARGET_KINDS:
            raise ValueError(f"unknown target kind {self.kind!r}")
        if self.kind == "custom":
            if self.vector is None:
                raise ValueError("custom target needs an explicit vector")
            object.__setattr__(
                self, "vector", check_probability_vector(self.vector, name="target")
            )
        elif self.vector is not None:
            raise ValueError(f"{self.kind} target does not take a vector")

    @classmethod
    def uniform(cls) -> "TargetSpec":
        return cls("uniform")

    @classmethod
    def indegree(cls) -> "TargetSpec":
        return cls("indegree")

    @classmethod
    def custom(cls, vector: np.ndarray) -> "TargetSpec":
        return cls("custom", np.asarray(vector, dtype=np.float64))

    @classmethod
    def evc(cls) -> "TargetSpec":
        return cls("evc")

    def weights(self, graph: DirectedGraph) -> np.ndarray:
        """Unnormalized target weights used in acceptance ratios."""
        if self.kind == "uniform":
            return np.ones(graph.n)
        if self.kind == "indegree":
            indeg = graph.in_degrees.astype(np.float64)
            if np.any(indeg == 0):
                bad = int(np.argmin(indeg))
                raise ValueError(
                    f"in-degree target undefined: node {bad} has no in-edge"
                )
            return indeg
        if self.kind == "custom":
            assert self.vector is not None
            if self.vector.size != graph.n:
                raise ValueError(
                    f"target length {self.vector.size} does not match graph size {graph.n}"
                )
            return self.vector
        raise ValueError("eigenvector-centrality target has no pointwise weights")

    def reference(self, graph: DirectedGraph, tol: float = 1e-12) -> np.ndarray:
        """Exact distribution the sampler is judged against."""
        if self.kind == "evc":
            return eigenvector_centrality(graph, tol=tol).vector
        w = self.weights(graph)
        return w / w.sum()


@dataclass(frozen=True, eq=False)
class SimpleRandomWalk:
    """Uniform move over out-edges; needs every node to have one."""

    graph: DirectedGraph

    def __post_init__(self) -> None:
        require_graph(self.graph)
        deg = self.graph.out_degrees
        if np.any(deg == 0):
            bad = int(np.argmin(deg))
            raise ValueError(
                f"random-walk proposal undefined: node {bad} has no out-edge"
            )


@dataclass(frozen=True, eq=False)
class TeleportingWalk:
    """Random walk with uniform restarts to a fixed seed set.

    From any node the walk teleports to a uniformly chosen seed with
    probability ``1 - p_follow`` (with probability 1 from a node with
    no out-edge) and otherwise follows a uniform out-edge. The graph
    must be exactly the set of nodes reachable from the seeds, so the
    chain's state space has no unreachable corners and every node keeps
    its full out-neighborhood.
    """

    graph: DirectedGraph
    seeds: np.ndarray
    p_follow: float

    def __post_init__(self) -> None:
        require_graph(self.graph)
        seeds = check_node_array(self.seeds, self.graph.n, name="seeds", unique=True)
        object.__setattr__(self, "seeds", np.sort(seeds))
        if not 0.0 < self.p_follow < 1.0:
            raise ValueError("p_follow must lie strictly between 0 and 1")
        if reachable_set(self.graph, self.seeds).size != self.graph.n:
            raise ValueError(
                "graph must equal the set of nodes reachable from the seeds"
            )

    @cached_property
    def seed_mask(self) -> np.ndarray:
        mask = np.zeros(self.graph.n, dtype=bool)
        mask[self.seeds] = True
        return mask


ProposalChain = Union[SimpleRandomWalk, TeleportingWalk]


def propose(chain: ProposalChain, i: int, rng) -> int:
    """Draw one proposal from node ``i``.

    ``rng`` is anything with a ``random()`` method returning floats in
    [0, 1). Draw order is fixed (route first, then index) so proposal
    sequences are reproducible for a given uniform stream.
    """
    graph = chain.graph
    if not 0 <= i < graph.n:
        raise ValueError(f"node {i} out of range")
    nbrs = graph.out_neighbors(i)
    if isinstance(chain, SimpleRandomWalk):
        if nbrs.size == 0:
            raise ValueError(f"node {i} has no out-edge")
        k = int(rng.random() * nbrs.size)
        return int(nbrs[min(k, nbrs.size - 1)])
    seeds = chain.seeds
    if nbrs.size == 0:
        k = int(rng.random() * seeds.size)
        return int(seeds[min(k, seeds.size - 1)])
    if rng.random() < chain.p_follow:
        k = int(rng.random() * nbrs.size)
        return int(nbrs[min(k, nbrs.size - 1)])
    k = int(rng.random() * seeds.size)
    return int(seeds[min(k, seeds.size - 1)])


def proposal_matrix(chain: ProposalChain) -> SparseOperator:
    """The chain's transition matrix as a sparse operator.

    Single source of truth for proposal probabilities: acceptance
    bounds, kernels, and the exact reference route all read from it.
    """
    g = chain.graph
    src, dst = g.edge_arrays()
    if isinstance(chain, SimpleRandomWalk):
        values = 1.0 / g.out_degrees[src]
        return SparseOperator.from_coo(g.n, src, dst, values)
    deg = g.out_degrees
    ns = chain.seeds.size
    follow_vals = chain.p_follow / deg[src]
    tele_rows = np.repeat(np.arange(g.n, dtype=np.int64), ns)
    tele_cols = np.tile(chain.seeds, g.n)
    tele_vals = np.where(deg[tele_rows] > 0, (1.0 - chain.p_follow) / ns, 1.0 / ns)
    rows = np.concatenate([src, tele_rows])
    cols = np.concatenate([dst, tele_cols])
    vals = np.concatenate([follow_vals, tele_vals])
    return SparseOperator.from_coo(g.n, rows, cols, vals)


@dataclass(frozen=True, eq=False)
class AcceptanceModel:
    """Per-transition acceptance bounds and their exact ceiling.

    Entry arrays are aligned with the proposal matrix in CSR order.
    ``c_true`` is the maximum bound over all proposable transitions;
    dividing bounds by any ceiling >= c_true gives valid acceptance
    probabilities with the intended quasi-stationary limit.
    """

    chain: ProposalChain
    target: TargetSpec
    c_true: float
    rows: np.ndarray
    cols: np.ndarray
    proposal_values: np.ndarray
    bounds: np.ndarray
    supports: np.ndarray

    @property
    def graph(self) -> DirectedGraph:
        return self.chain.graph

    @cached_property
    def _indptr(self) -> np.ndarray:
        counts = np.bincount(self.rows, minlength=self.graph.n)
        indptr = np.zeros(self.graph.n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        return indptr

    def _entry(self, i: int, j: int) -> int:
        lo, hi = self._indptr[i], self._indptr[i + 1]
        k = lo + np.searchsorted(self.cols[lo:hi], j)
        if k >= hi or self.cols[k] != j:
            raise ValueError(f"node {j} is not proposable from node {i}")
        return int(k)

    def support_size(self, j: int) -> int:
        """Number of nodes that can propose ``j``."""
        return int(self.supports[j])

    def b(self, i: int, j: int) -> float:
        """Acceptance bound for the transition i -> j."""
        return float(self.bounds[self._entry(i, j)])

    def gamma(self, i: int, j: int) -> float:
        """Acceptance probability under the exact ceiling."""
        return min(1.0, self.b(i, j) / self.c_true)


def build_acceptance(
    chain: ProposalChain,
    target: TargetSpec,
    support_weights: SupportWeights | None = None,
) -> AcceptanceModel:
    """Compute acceptance bounds for a chain and target.

    For the eigenvector-centrality target the bound is the proposer's
    out-degree and only the plain random walk is supported; for every
    other target the bound follows the ratio formula in the module
    docstring with uniform redistribution weights by default.
    """
    g = chain.graph
    op = proposal_matrix(chain)
    rows, cols, values = op.entries()
    supports = np.bincount(cols, minlength=g.n).astype(np.int64)
    if target.kind == "evc":
        if not isinstance(chain, SimpleRandomWalk):
            raise ValueError(
                "eigenvector-centrality target requires the plain random-walk proposal"
            )
        if support_weights is not None:
            raise ValueError(
                "support weights do not apply to the eigenvector-centrality target"
            )
        bounds = g.out_degrees[rows].astype(np.float64)
    else:
        w = target.weights(g)
        ratio = w[cols] / w[rows]
        if support_weights is None:
            alpha = 1.0 / supports[cols]
        else:
            alpha = np.asarray(support_weights(rows, cols, supports), dtype=np.float64)
            if alpha.shape != values.shape:
                raise ValueError("support weights must match the proposal entries")
            if np.any(alpha <= 0) or not np.all(np.isfinite(alpha)):
                raise ValueError("support weights must be finite and positive")
            colsum = np.bincount(cols, weights=alpha, minlength=g.n)
            if np.max(np.abs(colsum - 1.0)) > 1e-9:
                raise ValueError("support weights must sum to 1 within each column")
        bounds = ratio * alpha / values
    return AcceptanceModel(
        chain=chain,
        target=target,
        c_true=float(bounds.max()),
        rows=rows,
        cols=cols,
        proposal_values=values,
        bounds=bounds,
        supports=supports,
    )


def transient_kernel(model: AcceptanceModel) -> SparseOperator:
    """Sub-stochastic kernel of the thinned chain, Q(i,j) * gamma(i,j).

    Its quasi-stationary distribution is the model's target; the mass
    lost per step is what the sampler's redistribution events replace.
    """
    gamma = np.minimum(1.0, model.bounds / model.c_true)
    return SparseOperator.from_coo(
        model.graph.n, model.rows, model.cols, model.proposal_values * gamma
    )


def redistribution_kernel(
    kernel: SparseOperator, weights: np.ndarray
) -> SparseOperator:
    """Complete a sub-stochastic kernel by sending lost mass to ``weights``.

    Returns the row-stochastic matrix P(i, j) + deficit(i) * weights(j).
    The result is dense wherever deficits exist, so this is an analysis
    tool for small graphs, not something the sampler ever materializes.
    """
    weights = check_probability_vector(weights, kernel.n, name="weights")
    row = kernel.row_sums()
    if np.any(row > 1.0 + 1e-12):
        bad = int(np.argmax(row))
        raise ValueError(f"kernel is not sub-stochastic (row {bad} sums to {row[bad]:.15g})")
    deficit = np.clip(1.0 - row, 0.0, None)
    dense = kernel.to_dense() + np.outer(deficit, weights)
    return SparseOperator.from_dense(dense)
