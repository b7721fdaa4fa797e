"""Reference samplers the reinforced walk is compared against.

Metropolis-Hastings walks on the undirected view of a graph (directed
sampling is exactly what they cannot do, which is the point of the
comparison), and a directed-graph crawler that builds an undirected
backbone on the fly and reweights by frozen degrees.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .graph import DirectedGraph, _bfs_mask
from .metrics import MetricsLog, stable_hash, tvd
from .spectral import SparseOperator
from .validation import check_probability_vector

MH_VARIANTS = ("max", "neighbor")


@dataclass(frozen=True, eq=False)
class UndirectedView:
    """Symmetric closure of a directed graph, in CSR form.

    An undirected edge {i, j} exists when either directed edge does.
    Self-loops are dropped. This is the graph a classical reversible
    sampler gets to see.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray

    @classmethod
    def from_directed(cls, graph: DirectedGraph) -> "UndirectedView":
        src, dst = graph.edge_arrays()
        sym = DirectedGraph.from_edges(
            graph.n,
            np.concatenate([src, dst]),
            np.concatenate([dst, src]),
            drop_self_loops=True,
            deduplicate=True,
        )
        return cls(n=sym.n, indptr=sym.out_indptr, indices=sym.out_indices)

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max())

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i] : self.indptr[i + 1]]

    def is_connected(self) -> bool:
        if self.n == 0:
            raise ValueError("empty graph")
        mask = _bfs_mask(
            self.n, self.indptr, self.indices, np.asarray([0], dtype=np.int64)
        )
        return bool(mask.all())


def _as_view(graph) -> UndirectedView:
    if isinstance(graph, UndirectedView):
        return graph
    if isinstance(graph, DirectedGraph):
        return UndirectedView.from_directed(graph)
    raise TypeError(f"expected a graph, got {type(graph).__name__}")


def mh_kernel(view, target: np.ndarray, variant: str = "max") -> SparseOperator:
    """Row-stochastic Metropolis-Hastings kernel on an undirected view.

    ``max`` proposes uniformly over ``max_degree`` slots (missing slots
    are self-proposals), so acceptance is min(1, target_j / target_i).
    ``neighbor`` proposes uniformly over actual neighbors, with the
    proposal asymmetry folded into the acceptance ratio. Both satisfy
    detailed balance with respect to ``target`` by construction; the
    tests check that entrywise.
    """
    view = _as_view(view)
    target = check_probability_vector(target, view.n, name="target")
    if variant not in MH_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    deg = view.degrees
    if np.any(deg == 0):
        bad = int(np.argmin(deg))
        raise ValueError(f"node {bad} is isolated; kernel undefined")
    src = np.repeat(np.arange(view.n, dtype=np.int64), deg)
    dst = view.indices
    if variant == "max":
        vals = np.minimum(1.0, target[dst] / target[src]) / view.max_degree
    else:
        ratio = (target[dst] / deg[dst]) / (target[src] / deg[src])
        vals = np.minimum(1.0, ratio) / deg[src]
    stay = 1.0 - np.bincount(src, weights=vals, minlength=view.n)
    keep = stay > 0
    diag = np.flatnonzero(keep)
    return SparseOperator.from_coo(
        view.n,
        np.concatenate([src, diag]),
        np.concatenate([dst, diag]),
        np.concatenate([vals, stay[keep]]),
    )


def mh_step(i: int, view, target: np.ndarray, variant: str, rng) -> int:
    """One Metropolis-Hastings transition from node ``i``."""
    view = _as_view(view)
    if not 0 <= i < view.n:
        raise ValueError(f"node {i} out of range")
    nbrs = view.neighbors(i)
    if nbrs.size == 0:
        raise ValueError(f"node {i} is isolated")
    if variant == "max":
        k = int(rng.random() * view.max_degree)
        if k >= nbrs.size:
            return i
        j = int(nbrs[k])
        if rng.random() <= min(1.0, target[j] / target[i]):
            return j
        return i
    if variant != "neighbor":
        raise ValueError(f"unknown variant {variant!r}")
    k = min(int(rng.random() * nbrs.size), nbrs.size - 1)
    j = int(nbrs[k])
    ratio = (target[j] / view.neighbors(j).size) / (target[i] / nbrs.size)
    if rng.random() <= min(1.0, ratio):
        return j
    return i


def mh_run(
    graph,
    target: np.ndarray,
    variant: str = "max",
    walkers: int = 1,
    steps: int = 10000,
    seed: int = 0,
    checkpoints: np.ndarray | None = None,
) -> tuple[np.ndarray, MetricsLog]:
    """Visit-frequency estimate from parallel Metropolis-Hastings walks.

    All walkers use one RNG stream and advance in lockstep. The
    estimate counts every position including holds, which is what makes
    the chain's stationary distribution the target. Logged unique
    queries count first visits, starting positions included.
    """
    view = _as_view(graph)
    target = check_probability_vector(target, view.n, name="target")
    if variant not in MH_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if walkers < 1 or steps < 1:
        raise ValueError("walkers and steps must be at least 1")
    if not view.is_connected():
        raise ValueError("undirected view is disconnected; estimate cannot converge")
    deg = view.degrees
    if checkpoints is None:
        stride = max(1, steps // 100)
        checkpoints = np.arange(stride, steps + 1, stride, dtype=np.int64)
    else:
        checkpoints = np.unique(np.asarray(checkpoints, dtype=np.int64))
        if checkpoints[0] < 1 or checkpoints[-1] > steps:
            raise ValueError("checkpoints must lie in [1, steps]")
    if checkpoints[-1] != steps:
        checkpoints = np.append(checkpoints, steps)

    rng = np.random.default_rng(seed)
    pos = rng.integers(0, view.n, size=walkers, dtype=np.int64)
    counts = np.bincount(pos, minlength=view.n).astype(np.float64)
    visited = np.zeros(view.n, dtype=bool)
    visited[pos] = True
    dmax = view.max_degree
    log = MetricsLog(
        config_hash=stable_hash(
            {
                "baseline": f"mh-{variant}",
                "walkers": walkers,
                "steps": steps,
                "n": view.n,
            }
        ),
        seed=seed,
    )
    cp_iter = iter(checkpoints.tolist())
    next_cp = next(cp_iter)
    for t in range(1, steps + 1):
        if variant == "max":
            k = (rng.random(walkers) * dmax).astype(np.int64)
            di = deg[pos]
            move = k < di
            slot = view.indptr[pos] + np.minimum(k, di - 1)
            j = np.where(move, view.indices[slot], pos)
            accept = rng.random(walkers) <= np.minimum(1.0, target[j] / target[pos])
            pos = np.where(move & accept, j, pos)
        else:
            di = deg[pos]
            k = np.minimum((rng.random(walkers) * di).astype(np.int64), di - 1)
            j = view.indices[view.indptr[pos] + k]
            ratio = (target[j] / deg[j]) / (target[pos] / di)
            accept = rng.random(walkers) <= np.minimum(1.0, ratio)
            pos = np.where(accept, j, pos)
        np.add.at(counts, pos, 1.0)
        visited[pos] = True
        if t == next_cp:
            estimate = counts / counts.sum()
            nvis = int(visited.sum())
            log.append(
                step=t,
                tvd=tvd(estimate, target),
                unique_queries=float(nvis),
                unique_query_pct=100.0 * nvis / view.n,
            )
            next_cp = next(cp_iter, None)
    return counts / counts.sum(), log


def ratio_estimate(counts: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Importance-reweighted occupancy estimate.

    Divides visit counts by per-node stationary weights and normalizes;
    the standard estimator for a walk whose stationary distribution is
    proportional to ``weights``.
    """
    counts = np.asarray(counts, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if counts.shape != weights.shape or counts.ndim != 1:
        raise ValueError("counts and weights must be 1-d arrays of equal shape")
    if np.any(counts < 0):
        raise ValueError("counts must be nonnegative")
    if np.any(weights <= 0) or not np.all(np.isfinite(weights)):
        raise ValueError("weights must be finite and positive")
    est = counts / weights
    total = est.sum()
    if total <= 0:
        raise ValueError("no visits to estimate from")
    return est / total


@dataclass
class DurwResult:
    """Outcome of one directed-crawl run."""

    estimate: np.ndarray
    query_cost: float
    unique_visits: int
    jumps: int
    log: MetricsLog


def durw_run(
    graph: DirectedGraph,
    jump_weight: float = 1.0,
    jump_cost: float = 1.0,
    steps: int = 10000,
    seed: int = 0,
    start: int | None = None,
    reference: np.ndarray | None = None,
    checkpoints: np.ndarray | None = None,
) -> DurwResult:
    """Degree-reweighted crawl of a directed graph with random jumps.

    The crawler discovers nodes through out-edges only. At a node's
    first visit, each out-edge toward a still-unvisited node becomes an
    undirected backbone edge; a node's backbone degree is frozen from
    that moment (later discoveries never touch visited nodes). From
    node i with frozen degree d the walker moves to a uniform backbone
    neighbor with probability d / (d + jump_weight), else jumps to a
    uniform node id over the whole graph. The walk is reversible on the
    backbone-plus-jumps graph with stationary weight d + jump_weight,
    so ``ratio_estimate`` with those weights recovers the uniform
    distribution over nodes.

    Query accounting: each first visit reached by a backbone move costs
    one query (the start included); each jump costs ``jump_cost``
    regardless of novelty. ``reference`` (default uniform) only feeds
    the logged distance column.
    """
    if graph.n == 0:
        raise ValueError("empty graph")
    if jump_weight <= 0:
        raise ValueError("jump_weight must be positive")
    if jump_cost < 0:
        raise ValueError("jump_cost must be nonnegative")
    if steps < 1:
        raise ValueError("steps must be at least 1")
    n = graph.n
    if reference is None:
        reference = np.full(n, 1.0 / n)
    else:
        reference = check_probability_vector(reference, n, name="reference")
    if checkpoints is None:
        stride = max(1, steps // 100)
        checkpoints = np.arange(stride, steps + 1, stride, dtype=np.int64)
    else:
        checkpoints = np.unique(np.asarray(checkpoints, dtype=np.int64))
        if checkpoints[0] < 1 or checkpoints[-1] > steps:
            raise ValueError("checkpoints must lie in [1, steps]")
    if checkpoints[-1] != steps:
        checkpoints = np.append(checkpoints, steps)

    rng = np.random.default_rng(seed)
    adj: list[list[int]] = [[] for _ in range(n)]
    visited = np.zeros(n, dtype=bool)
    counts = np.zeros(n, dtype=np.float64)
    cost = 0.0
    jumps = 0

    def freeze(u: int) -> None:
        visited[u] = True
        for w in graph.out_neighbors(u):
            w = int(w)
            if not visited[w]:
                adj[u].append(w)
                adj[w].append(u)

    if start is None:
        start = int(rng.integers(0, n))
    elif not 0 <= start < n:
        raise ValueError(f"start node {start} out of range")
    freeze(start)
    cost += 1.0
    counts[start] += 1.0
    current = start

    log = MetricsLog(
        config_hash=stable_hash(
            {
                "baseline": "durw",
                "jump_weight": jump_weight,
                "jump_cost": jump_cost,
                "steps": steps,
                "n": n,
            }
        ),
        seed=seed,
    )

    def checkpoint_row(t: int) -> None:
        weights = np.array([len(a) for a in adj], dtype=np.float64) + jump_weight
        estimate = ratio_estimate(counts, weights)
        nvis = int(visited.sum())
        log.append(
            step=t,
            tvd=tvd(estimate, reference),
            unique_queries=cost,
            unique_query_pct=100.0 * nvis / n,
            absorptions=float(jumps),
        )

    cp_iter = iter(checkpoints.tolist())
    next_cp = next(cp_iter)
    for t in range(1, steps + 1):
        d = len(adj[current])
        if rng.random() < d / (d + jump_weight):
            k = min(int(rng.random() * d), d - 1)
            nxt = adj[current][k]
            if not visited[nxt]:
                freeze(nxt)
                cost += 1.0
        else:
            nxt = int(rng.integers(0, n))
            jumps += 1
            cost += jump_cost
            if not visited[nxt]:
                freeze(nxt)
        counts[nxt] += 1.0
        current = nxt
        if t == next_cp:
            checkpoint_row(t)
            next_cp = next(cp_iter, None)

    weights = np.array([len(a) for a in adj], dtype=np.float64) + jump_weight
    return DurwResult(
        estimate=ratio_estimate(counts, weights),
        query_cost=cost,
        unique_visits=int(visited.sum()),
        jumps=jumps,
        log=log,
    )
