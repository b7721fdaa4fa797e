"""Shared input-checking helpers."""

from __future__ import annotations

import numpy as np

from .graph import DirectedGraph


def check_probability_vector(
    vec: np.ndarray, n: int | None = None, *, name: str = "vector", tol: float = 1e-9
) -> np.ndarray:
    """Validate and return a strictly positive probability vector.

    Entries must be finite, strictly positive, at least 1e-300 (so
    ratios of entries stay representable), and sum to 1 within ``tol``.
    """
    vec = np.asarray(vec, dtype=np.float64)
    if vec.ndim != 1 or vec.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-d array")
    if n is not None and vec.size != n:
        raise ValueError(f"{name} has length {vec.size}, expected {n}")
    if not np.all(np.isfinite(vec)):
        raise ValueError(f"{name} contains non-finite entries")
    if np.any(vec < 1e-300):
        raise ValueError(f"{name} entries must be at least 1e-300")
    total = vec.sum()
    if abs(total - 1.0) > tol:
        raise ValueError(f"{name} must sum to 1 within {tol:g} (got {total:.12g})")
    return vec


def check_node_array(
    nodes: np.ndarray, n: int, *, name: str = "nodes", unique: bool = False
) -> np.ndarray:
    """Validate an array of node indices against a graph of size n."""
    nodes = np.asarray(nodes, dtype=np.int64)
    if nodes.ndim != 1 or nodes.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-d array")
    if nodes.min() < 0 or nodes.max() >= n:
        raise ValueError(f"{name} contains an index outside [0, {n})")
    if unique and np.unique(nodes).size != nodes.size:
        raise ValueError(f"{name} contains duplicates")
    return nodes


def require_graph(x) -> DirectedGraph:
    if not isinstance(x, DirectedGraph):
        raise TypeError(f"expected a DirectedGraph, got {type(x).__name__}")
    if x.n == 0:
        raise ValueError("graph is empty")
    return x
