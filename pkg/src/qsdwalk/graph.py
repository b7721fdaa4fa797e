"""Directed graph container, edge-list I/O, and subgraph extraction."""

from __future__ import annotations

import gzip
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components


class GraphFormatError(ValueError):
    """An edge-list file could not be parsed."""


@dataclass(frozen=True, eq=False)
class NodeMap:
    """Mapping from compact node indices back to the labels they replaced.

    ``original[i]`` is the label (file id, or parent-graph index) of
    compact node ``i``. Labels are strictly increasing, so the mapping
    is deterministic and invertible.
    """

    original: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.original, dtype=np.int64)
        if arr.ndim != 1:
            raise ValueError("node map must be one-dimensional")
        if arr.size > 1 and not np.all(np.diff(arr) > 0):
            raise ValueError("node map labels must be strictly increasing")
        object.__setattr__(self, "original", arr)

    def __len__(self) -> int:
        return int(self.original.size)

    @cached_property
    def _inverse(self) -> dict[int, int]:
        return {int(v): i for i, v in enumerate(self.original)}

    def to_original(self, nodes: np.ndarray | int) -> np.ndarray | int:
        """Translate compact indices to original labels."""
        return self.original[nodes]

    def to_compact(self, label: int) -> int:
        """Translate one original label to its compact index."""
        try:
            return self._inverse[int(label)]
        except KeyError:
            raise KeyError(f"label {label} not present in this graph") from None

    def compose(self, outer: "NodeMap") -> "NodeMap":
        """Chain through an enclosing map (subgraph -> parent -> original)."""
        return NodeMap(outer.original[self.original])


@dataclass(frozen=True, eq=False)
class DirectedGraph:
    """Immutable directed graph in compressed sparse row form.

    Nodes are ``0 .. n-1``. Both adjacency directions are stored so
    out-neighbors, in-neighbors, and both degree vectors are O(1) to
    reach. ``out_indices`` is sorted within each row, which fixes a
    canonical edge order (by source, then destination).
    """

    n: int
    out_indptr: np.ndarray
    out_indices: np.ndarray
    in_indptr: np.ndarray
    in_indices: np.ndarray

    @classmethod
    def from_edges(
        cls,
        n: int,
        src: np.ndarray,
        dst: np.ndarray,
        *,
        drop_self_loops: bool = True,
        deduplicate: bool = True,
    ) -> "DirectedGraph":
        """Build from parallel endpoint arrays of compact node indices."""
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        if src.shape != dst.shape or src.ndim != 1:
            raise ValueError("src and dst must be 1-d arrays of equal length")
        if n < 0:
            raise ValueError("node count must be nonnegative")
        if src.size:
            lo = min(src.min(), dst.min())
            hi = max(src.max(), dst.max())
            if lo < 0 or hi >= n:
                raise ValueError(f"edge endpoint out of range [0, {n})")
        if drop_self_loops and src.size:
            keep = src != dst
            src, dst = src[keep], dst[keep]
        if deduplicate and src.size:
            # Encode pairs as src*n + dst; n^2 stays inside int64 for any
            # graph that fits in memory.
            keys = np.unique(src * np.int64(n) + dst)
            src, dst = keys // n, keys % n
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        out_indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=out_indptr[1:])
        rorder = np.lexsort((src, dst))
        in_indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(dst, minlength=n), out=in_indptr[1:])
        return cls(
            n=n,
            out_indptr=out_indptr,
            out_indices=dst,
            in_indptr=in_indptr,
            in_indices=src[rorder],
        )

    @property
    def m(self) -> int:
        """Number of directed edges."""
        return int(self.out_indices.size)

    @cached_property
    def out_degrees(self) -> np.ndarray:
        return np.diff(self.out_indptr)

    @cached_property
    def in_degrees(self) -> np.ndarray:
        return np.diff(self.in_indptr)

    def out_neighbors(self, i: int) -> np.ndarray:
        return self.out_indices[self.out_indptr[i] : self.out_indptr[i + 1]]

    def in_neighbors(self, i: int) -> np.ndarray:
        return self.in_indices[self.in_indptr[i] : self.in_indptr[i + 1]]

    def has_edge(self, i: int, j: int) -> bool:
        row = self.out_neighbors(i)
        k = np.searchsorted(row, j)
        return bool(k < row.size and row[k] == j)

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """All edges as (src, dst) arrays in canonical order."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.out_degrees)
        return src, self.out_indices.copy()

    def to_csr(self) -> csr_matrix:
        """Adjacency matrix as a scipy CSR with unit weights."""
        data = np.ones(self.m, dtype=np.float64)
        return csr_matrix(
            (data, self.out_indices.astype(np.int32), self.out_indptr),
            shape=(self.n, self.n),
        )


def _open_text(path: str | Path):
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, "rt", encoding="utf-8")
    return open(path, "r", encoding="utf-8")


def load_edge_list(
    path: str | Path,
    *,
    drop_self_loops: bool = True,
    deduplicate: bool = True,
) -> tuple[DirectedGraph, NodeMap]:
    """Read a whitespace-separated edge list into a compact graph.

    Lines starting with ``#`` and blank lines are skipped. Every other
    line must hold exactly two integer labels, ``src dst``. Labels are
    relabeled to ``0 .. n-1`` in increasing label order; the returned
    map recovers the originals. Self-loops and duplicate edges are
    removed by default.

    Raises
    ------
    GraphFormatError
        On a malformed line, with the file name and line number.
    """
    srcs: list[int] = []
    dsts: list[int] = []
    with _open_text(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 2:
                raise GraphFormatError(
                    f"{path}:{lineno}: expected two fields, got {len(parts)}"
                )
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise GraphFormatError(
                    f"{path}:{lineno}: non-integer node label"
                ) from None
            srcs.append(u)
            dsts.append(v)
    src = np.asarray(srcs, dtype=np.int64)
    dst = np.asarray(dsts, dtype=np.int64)
    labels = np.unique(np.concatenate([src, dst])) if src.size else np.empty(0, np.int64)
    graph = DirectedGraph.from_edges(
        labels.size,
        np.searchsorted(labels, src),
        np.searchsorted(labels, dst),
        drop_self_loops=drop_self_loops,
        deduplicate=deduplicate,
    )
    return graph, NodeMap(labels)


def write_edge_list(
    graph: DirectedGraph, path: str | Path, node_map: NodeMap | None = None
) -> None:
    """Write edges in canonical order, one ``src<tab>dst`` pair per line."""
    src, dst = graph.edge_arrays()
    if node_map is not None:
        src, dst = node_map.to_original(src), node_map.to_original(dst)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# nodes {graph.n} edges {graph.m}\n")
        for u, v in zip(src, dst):
            fh.write(f"{u}\t{v}\n")


def _bfs_mask(n: int, indptr: np.ndarray, indices: np.ndarray, seeds: np.ndarray) -> np.ndarray:
    seen = np.zeros(n, dtype=bool)
    seen[seeds] = True
    frontier = np.unique(seeds)
    while frontier.size:
        nxt: list[np.ndarray] = []
        for u in frontier:
            nbrs = indices[indptr[u] : indptr[u + 1]]
            fresh = nbrs[~seen[nbrs]]
            if fresh.size:
                seen[fresh] = True
                nxt.append(fresh)
        frontier = np.unique(np.concatenate(nxt)) if nxt else np.empty(0, np.int64)
    return seen


def is_strongly_connected(graph: DirectedGraph) -> bool:
    """Check strong connectivity by forward and backward search from node 0."""
    if graph.n == 0:
        raise ValueError("empty graph")
    if graph.n == 1:
        return True
    start = np.asarray([0], dtype=np.int64)
    fwd = _bfs_mask(graph.n, graph.out_indptr, graph.out_indices, start)
    if not fwd.all():
        return False
    bwd = _bfs_mask(graph.n, graph.in_indptr, graph.in_indices, start)
    return bool(bwd.all())


def induced_subgraph(
    graph: DirectedGraph, nodes: np.ndarray
) -> tuple[DirectedGraph, NodeMap]:
    """Restrict to a node subset, keeping edges with both ends inside.

    ``nodes`` must contain distinct valid indices; the subgraph
    relabels them in increasing order.
    """
    nodes = np.unique(np.asarray(nodes, dtype=np.int64))
    if nodes.size == 0:
        raise ValueError("node subset is empty")
    if nodes[0] < 0 or nodes[-1] >= graph.n:
        raise ValueError("node subset out of range")
    member = np.zeros(graph.n, dtype=bool)
    member[nodes] = True
    src, dst = graph.edge_arrays()
    keep = member[src] & member[dst]
    sub = DirectedGraph.from_edges(
        nodes.size,
        np.searchsorted(nodes, src[keep]),
        np.searchsorted(nodes, dst[keep]),
        drop_self_loops=False,
        deduplicate=False,
    )
    return sub, NodeMap(nodes)


def largest_scc(graph: DirectedGraph) -> tuple[DirectedGraph, NodeMap]:
    """Extract the largest strongly connected component.

    Ties on size are broken toward the component containing the
    smallest node index, so the result is deterministic.
    """
    if graph.n == 0:
        raise ValueError("empty graph")
    _, labels = connected_components(
        graph.to_csr(), directed=True, connection="strong"
    )
    sizes = np.bincount(labels)
    best_size = sizes.max()
    candidates = np.flatnonzero(sizes == best_size)
    # np.argmax over the boolean mask finds each candidate's smallest member.
    best = min(candidates, key=lambda c: int(np.argmax(labels == c)))
    return induced_subgraph(graph, np.flatnonzero(labels == best))


def reachable_set(graph: DirectedGraph, seeds: np.ndarray) -> np.ndarray:
    """Nodes reachable from ``seeds`` by directed paths, seeds included.

    Returned in increasing index order. The set is closed under
    out-edges, so an induced subgraph on it preserves every member's
    full out-neighborhood.
    """
    seeds = np.asarray(seeds, dtype=np.int64)
    if seeds.size == 0:
        raise ValueError("seed set is empty")
    if seeds.min() < 0 or seeds.max() >= graph.n:
        raise ValueError("seed index out of range")
    mask = _bfs_mask(graph.n, graph.out_indptr, graph.out_indices, seeds)
    return np.flatnonzero(mask)
