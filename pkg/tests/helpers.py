"""Shared builders for the test suite."""

import numpy as np

from qsdwalk import DirectedGraph


def random_sc_digraph(rng, n: int, extra: int | None = None) -> DirectedGraph:
    """Random strongly connected digraph: a permutation cycle + chords."""
    if n < 2:
        raise ValueError("need n >= 2")
    if extra is None:
        extra = 3 * n
    perm = rng.permutation(n).astype(np.int64)
    src = np.concatenate([perm, rng.integers(0, n, extra)])
    dst = np.concatenate([np.roll(perm, -1), rng.integers(0, n, extra)])
    return DirectedGraph.from_edges(n, src, dst)


def random_regular_digraph(rng, n: int, k: int = 5) -> DirectedGraph:
    """Near-regular strongly connected digraph.

    Union of a random Hamiltonian cycle and k random derangements,
    deduplicated. In- and out-degrees are k+1 minus the few edges lost
    to overlap, so acceptance bounds stay close to 1 for degree-based
    targets and the walk mixes like a random regular digraph.
    """
    if n < 4:
        raise ValueError("need n >= 4")
    order = rng.permutation(n).astype(np.int64)
    src = [order]
    dst = [np.roll(order, -1)]
    ident = np.arange(n, dtype=np.int64)
    for _ in range(k):
        while True:
            p = rng.permutation(n).astype(np.int64)
            if not np.any(p == ident):
                break
        src.append(ident)
        dst.append(p)
    src_all = np.concatenate(src)
    dst_all = np.concatenate(dst)
    key = src_all * n + dst_all
    _, keep = np.unique(key, return_index=True)
    return DirectedGraph.from_edges(n, src_all[keep], dst_all[keep])


def random_target(rng, n: int) -> np.ndarray:
    vec = rng.uniform(0.2, 2.0, n)
    return vec / vec.sum()


class CountingRng:
    """Uniform stream wrapper that counts how many draws were taken."""

    def __init__(self, seed: int = 0):
        self._rng = np.random.default_rng(seed)
        self.calls = 0

    def random(self) -> float:
        self.calls += 1
        return float(self._rng.random())


class FixedRng:
    """Replays a fixed uniform sequence; errors when exhausted."""

    def __init__(self, values):
        self._values = list(values)
        self._pos = 0

    def random(self) -> float:
        if self._pos >= len(self._values):
            raise RuntimeError("uniform stream exhausted")
        v = self._values[self._pos]
        self._pos += 1
        return v
