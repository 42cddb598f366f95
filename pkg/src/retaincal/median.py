"""Retain and global sensitivity of the one-dimensional median.

The retained-set sensitivity is half the larger of the two spacings around
the median; the global sensitivity is ``B/2`` regardless of the sample. A
brute-force single-addition oracle is included for verification.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DomainError
from .mechanism import SensitivityReport


@dataclass(frozen=True)
class ScalarSample:
    """A finite sample of reals known to lie in [0, B]."""

    values: np.ndarray
    bound_b: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.ndim != 1 or self.values.size == 0:
            raise DataError("values must be a nonempty 1-d array")
        if not self.bound_b > 0:
            raise DomainError(f"bound_b must be > 0, got {self.bound_b}")
        if np.any(self.values < 0) or np.any(self.values > self.bound_b):
            raise DataError("all values must lie in [0, bound_b]")

    @property
    def n(self) -> int:
        return int(self.values.size)


def median(sample: ScalarSample) -> float:
    """Order-statistic median: middle value for odd n, midpoint for even n."""
    x = np.sort(sample.values)
    n = x.size
    if n % 2 == 1:
        return float(x[(n - 1) // 2])
    return float((x[n // 2 - 1] + x[n // 2]) / 2.0)


def rs_median(sample: ScalarSample) -> SensitivityReport:
    """Retain sensitivity of the median under one addition, for odd n >= 3.

    Equals half the larger of the spacings adjacent to the median. The even-n
    closed form is not implemented; use :func:`oracle_rs_median` there.
    """
    n = sample.n
    if n < 3:
        raise DomainError(f"need n >= 3, got {n}")
    if n % 2 == 0:
        raise DomainError(
            "the closed form is stated for odd n; use oracle_rs_median for even n"
        )
    x = np.sort(sample.values)
    m = (n + 1) // 2  # 1-indexed median position
    gap_up = float(x[m] - x[m - 1])
    gap_down = float(x[m - 1] - x[m - 2])
    return SensitivityReport(
        value=0.5 * max(gap_up, gap_down),
        kind="retain",
        inputs={"n": n, "gap_up": gap_up, "gap_down": gap_down, "B": sample.bound_b},
        source="rs_median",
    )


def gs_median(bound_b: float) -> SensitivityReport:
    """Global sensitivity B/2 (attained by a half-zeros half-B sample)."""
    if not bound_b > 0:
        raise DomainError(f"bound_b must be > 0, got {bound_b}")
    return SensitivityReport(
        value=bound_b / 2.0,
        kind="global",
        inputs={"B": bound_b},
        source="gs_median",
    )


def oracle_rs_median(sample: ScalarSample, grid_points: int = 1001) -> SensitivityReport:
    """Brute-force retain sensitivity: try every addition on a grid.

    Candidates are a uniform grid over [0, B] plus the sample values
    themselves; the true maximizer sits at a domain endpoint, so the grid
    resolution does not limit accuracy.
    """
    if grid_points < 3:
        raise DomainError(f"grid_points must be >= 3, got {grid_points}")
    base = median(sample)
    candidates = np.concatenate(
        [np.linspace(0.0, sample.bound_b, grid_points), sample.values]
    )
    # stack sample copies with one candidate appended per row, take row medians
    tiled = np.broadcast_to(sample.values, (candidates.size, sample.n))
    augmented = np.concatenate([tiled, candidates[:, None]], axis=1)
    medians = np.median(augmented, axis=1)
    deviations = np.abs(medians - base)
    best = int(np.argmax(deviations))
    return SensitivityReport(
        value=float(deviations[best]),
        kind="oracle",
        inputs={
            "n": sample.n,
            "grid_points": grid_points,
            "argmax_candidate": float(candidates[best]),
            "B": sample.bound_b,
        },
        source="oracle_rs_median",
    )
