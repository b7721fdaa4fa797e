"""Weighted occupation measures and the schedules that weight them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels

SCHEDULE_KINDS = ("constant", "polynomial", "subexponential")


@dataclass(frozen=True)
class WeightSchedule:
    """Weight w_k assigned to the k-th recorded position.

    ``constant`` records plain visit counts. ``polynomial`` uses
    (k+1)**alpha; the shift keeps the k = 0 record from being
    annihilated by a zero weight. ``subexponential`` uses 2**sqrt(k),
    which grows past double range within a long run, so weights are
    always evaluated relative to a caller-supplied power-of-two scale.
    """

    kind: str
    alpha: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "polynomial":
            if not np.isfinite(self.alpha) or self.alpha <= 0:
                raise ValueError("polynomial schedule needs alpha > 0")
            # the k = 1 weight is 2**alpha; the cap keeps every scheduled
            # weight inside double range between mass rescales
            if self.alpha > 512:
                raise ValueError("polynomial schedule supports alpha <= 512")
        elif self.alpha != 0.0:
            raise ValueError(f"alpha does not apply to the {self.kind} schedule")

    @classmethod
    def constant(cls) -> "WeightSchedule":
        return cls("constant")

    @classmethod
    def polynomial(cls, alpha: float) -> "WeightSchedule":
        return cls("polynomial", float(alpha))

    @classmethod
    def subexponential(cls) -> "WeightSchedule":
        return cls("subexponential")

    @property
    def code(self) -> int:
        return SCHEDULE_KINDS.index(self.kind)

    def weight(self, k: int, log2_scale: float = 0.0) -> float:
        """w_k divided by 2**log2_scale."""
        if k < 0:
            raise ValueError("weight index must be nonnegative")
        return float(_kernels.scaled_weight(self.code, self.alpha, k, log2_scale))


class EmpiricalMeasure:
    """Running weighted histogram over nodes with O(log n) sampling.

    Mass updates and categorical draws go through a Fenwick tree, so a
    million-step run never rebuilds prefix sums. Recording index k adds
    the schedule's w_k at the visited node; equivalently the normalized
    measure takes a convex step of size w_k / W_k toward that node,
    which is the recursion the samplers are built on. When accumulated
    raw mass approaches the top of double range everything is
    renormalized and the factored-out scale is tracked as a power of
    two, so relative masses stay exact.

    A measure may be seeded with explicit starting masses; the seed
    occupies record index 0 and the next record gets index 1.
    """

    def __init__(self, n: int, masses: np.ndarray | None = None):
        if n < 1:
            raise ValueError("measure needs at least one node")
        self._m2 = np.zeros((1, n), dtype=np.float64)
        self._tree2 = np.zeros((1, n + 1), dtype=np.float64)
        self._tot = np.zeros(1, dtype=np.float64)
        self._log2 = np.zeros(1, dtype=np.float64)
        self.next_index = 0
        if masses is not None:
            masses = np.asarray(masses, dtype=np.float64)
            if masses.shape != (n,):
                raise ValueError(f"seed masses must have shape ({n},)")
            if not np.all(np.isfinite(masses)) or np.any(masses < 0):
                raise ValueError("seed masses must be finite and nonnegative")
            if masses.sum() <= 0:
                raise ValueError("seed masses must have positive total")
            _kernels.measure_seed(self._m2, self._tree2, self._tot, 0, masses)
            self.next_index = 1

    @property
    def n(self) -> int:
        return self._m2.shape[1]

    @property
    def masses(self) -> np.ndarray:
        """Raw (scaled) masses; multiply by 2**log2_scale for true mass."""
        return self._m2[0].copy()

    @property
    def total(self) -> float:
        return float(self._tot[0])

    @property
    def log2_scale(self) -> float:
        return float(self._log2[0])

    def record(self, node: int, schedule: WeightSchedule) -> None:
        """Add the next scheduled weight at ``node``."""
        if not 0 <= node < self.n:
            raise ValueError(f"node {node} out of range")
        w = schedule.weight(self.next_index, self._log2[0])
        _kernels.measure_record(
            self._m2, self._tree2, self._tot, self._log2, 0, node, w
        )
        self.next_index += 1

    def sample(self, rng) -> int:
        """Draw a node with probability proportional to its mass."""
        if self._tot[0] <= 0:
            raise ValueError("cannot sample from an empty measure")
        return int(
            _kernels.measure_sample(
                self._tree2[0], self._m2[0], self._tot[0], rng.random()
            )
        )

    def distribution(self) -> np.ndarray:
        """Normalized measure as a probability vector."""
        if self._tot[0] <= 0:
            raise ValueError("measure is empty")
        return self._m2[0] / self._tot[0]


def merge_mass_arrays(
    masses: np.ndarray,
    totals: np.ndarray,
    log2_scales: np.ndarray,
    average: bool = False,
) -> np.ndarray:
    """Combine per-agent measures into one distribution.

    Default pools raw mass: scales are aligned to the largest one and
    the scaled masses are summed, so the result is the normalized union
    of all agents' weighted histories. ``average`` instead normalizes
    each agent first and averages the distributions, which weights
    agents equally regardless of accumulated mass; kept for sensitivity
    checks.
    """
    masses = np.asarray(masses, dtype=np.float64)
    totals = np.asarray(totals, dtype=np.float64)
    log2_scales = np.asarray(log2_scales, dtype=np.float64)
    if masses.ndim != 2 or totals.shape != (masses.shape[0],):
        raise ValueError("masses must be (agents, nodes) with matching totals")
    if np.any(totals <= 0):
        raise ValueError("cannot merge an empty measure")
    if average:
        pooled = (masses / totals[:, None]).mean(axis=0)
    else:
        scale = 2.0 ** (log2_scales - log2_scales.max())
        pooled = (masses * scale[:, None]).sum(axis=0)
    return pooled / pooled.sum()


def merge_measures(
    measures: Sequence[EmpiricalMeasure], average: bool = False
) -> np.ndarray:
    """Combine measures of equal size into one distribution."""
    if not measures:
        raise ValueError("nothing to merge")
    n = measures[0].n
    if any(m.n != n for m in measures):
        raise ValueError("measures must cover the same node set")
    stacked = np.stack([m._m2[0] for m in measures])
    totals = np.array([m.total for m in measures])
    scales = np.array([m.log2_scale for m in measures])
    return merge_mass_arrays(stacked, totals, scales, average=average)
