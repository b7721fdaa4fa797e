"""Error metrics and the run log written by every experiment."""

from __future__ import annotations

import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

_FLOOR = 1e-15


def _check_distribution(p: np.ndarray, name: str) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise ValueError(f"{name} must be finite and nonnegative")
    if abs(p.sum() - 1.0) > 1e-8:
        raise ValueError(f"{name} must sum to 1 (got {p.sum():.12g})")
    return p


def tvd(p: np.ndarray, q: np.ndarray) -> float:
    """Total variation distance, half the l1 difference of two distributions."""
    p = _check_distribution(p, "p")
    q = _check_distribution(q, "q")
    if p.size != q.size:
        raise ValueError("distributions must have equal length")
    return float(0.5 * np.abs(p - q).sum())


def nrmse(estimates: np.ndarray, truth: np.ndarray) -> float:
    """Mean over nodes of the per-node RMSE across runs, relative to truth.

    ``estimates`` has one row per independent run; at least two rows are
    required so the spread is meaningful. ``truth`` must be strictly
    positive everywhere.
    """
    estimates = np.asarray(estimates, dtype=np.float64)
    if estimates.ndim != 2 or estimates.shape[0] < 2:
        raise ValueError("estimates must be (runs, nodes) with at least 2 runs")
    truth = np.asarray(truth, dtype=np.float64)
    if truth.shape != (estimates.shape[1],):
        raise ValueError("truth length must match the node dimension")
    if np.any(truth <= 0):
        raise ValueError("truth must be strictly positive")
    per_node = np.sqrt(np.mean((estimates - truth[None, :]) ** 2, axis=0))
    return float(np.mean(per_node / truth))


def loglog_slope(
    steps: np.ndarray, values: np.ndarray, tail_fraction: float = 0.5
) -> float:
    """Least-squares slope of log(values) against log(steps) on the tail.

    The window is the last ``tail_fraction`` of the points. Values are
    clamped at 1e-15 before taking logs; clamping triggers a warning
    because a slope through the numerical floor is not meaningful.
    """
    steps = np.asarray(steps, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if steps.shape != values.shape or steps.ndim != 1:
        raise ValueError("steps and values must be 1-d arrays of equal length")
    if np.any(steps <= 0) or np.any(np.diff(steps) <= 0):
        raise ValueError("steps must be positive and strictly increasing")
    if not 0 < tail_fraction <= 1:
        raise ValueError("tail_fraction must lie in (0, 1]")
    if np.any(values < 0) or not np.all(np.isfinite(values)):
        raise ValueError("values must be finite and nonnegative")
    k = int(round(tail_fraction * steps.size))
    if k < 2:
        raise ValueError("tail window must contain at least two points")
    x = steps[-k:]
    y = values[-k:]
    if np.any(y < _FLOOR):
        warnings.warn(
            "values clamped at 1e-15 before log; slope may be unreliable",
            RuntimeWarning,
            stacklevel=2,
        )
        y = np.clip(y, _FLOOR, None)
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)


def stable_hash(obj) -> str:
    """Short deterministic digest of a nested parameter structure."""

    def canon(x):
        if isinstance(x, dict):
            return {str(k): canon(v) for k, v in sorted(x.items())}
        if isinstance(x, (list, tuple)):
            return [canon(v) for v in x]
        if isinstance(x, np.ndarray):
            return [canon(v) for v in x.tolist()]
        if isinstance(x, (np.integer,)):
            return int(x)
        if isinstance(x, (np.floating,)):
            return float(x)
        if x is None or isinstance(x, (bool, int, str)):
            return x
        if isinstance(x, float):
            return x
        return repr(x)

    payload = json.dumps(canon(obj), sort_keys=True, separators=(",", ":"))
    return hashlib.blake2b(payload.encode("utf-8"), digest_size=8).hexdigest()


_COLUMNS = (
    "step",
    "tvd",
    "nrmse",
    "unique_queries",
    "unique_query_pct",
    "c_t_max",
    "absorptions",
)


@dataclass
class MetricsLog:
    """Append-only table of per-checkpoint run metrics.

    Rows are keyed by a strictly increasing step count. Metrics that do
    not apply to a given run (nrmse inside a single run, for instance)
    are stored as NaN. The CSV form carries the config hash and seed in
    a comment header so a log can always be traced back to its run.
    """

    config_hash: str
    seed: int
    _rows: list[tuple[float, ...]] = field(default_factory=list)

    def append(
        self,
        step: int,
        tvd: float = math.nan,
        nrmse: float = math.nan,
        unique_queries: float = math.nan,
        unique_query_pct: float = math.nan,
        c_t_max: float = math.nan,
        absorptions: float = math.nan,
    ) -> None:
        if self._rows and step <= self._rows[-1][0]:
            raise ValueError("step counts must be strictly increasing")
        if not math.isnan(tvd) and not 0.0 <= tvd <= 1.0 + 1e-12:
            raise ValueError(f"tvd out of range: {tvd}")
        self._rows.append(
            (
                float(step),
                float(tvd),
                float(nrmse),
                float(unique_queries),
                float(unique_query_pct),
                float(c_t_max),
                float(absorptions),
            )
        )

    def __len__(self) -> int:
        return len(self._rows)

    def column(self, name: str) -> np.ndarray:
        if name not in _COLUMNS:
            raise KeyError(f"unknown column {name!r}")
        idx = _COLUMNS.index(name)
        return np.array([row[idx] for row in self._rows], dtype=np.float64)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# config={self.config_hash} seed={self.seed}\n")
            fh.write(",".join(_COLUMNS) + "\n")
            for row in self._rows:
                fh.write(",".join(repr(v) for v in row) + "\n")

    @classmethod
    def from_csv(cls, path: str | Path) -> "MetricsLog":
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip()
            if not header.startswith("# config="):
                raise ValueError(f"{path}: missing config header")
            fields = dict(
                part.split("=", 1) for part in header[2:].split() if "=" in part
            )
            columns = fh.readline().strip().split(",")
            if tuple(columns) != _COLUMNS:
                raise ValueError(f"{path}: unexpected columns {columns}")
            log = cls(config_hash=fields["config"], seed=int(fields["seed"]))
            for line in fh:
                if not line.strip():
                    continue
                values = [float(v) for v in line.strip().split(",")]
                if len(values) != len(_COLUMNS):
                    raise ValueError(f"{path}: bad row {line!r}")
                log.append(int(values[0]), *values[1:])
        return log
