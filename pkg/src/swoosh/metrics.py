"""Agreement and error statistics for biometry measurements."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateTable, EmptyInput, LengthMismatch

__all__ = ["RaterTable", "DiffSummary", "icc_2_1", "mean_difference", "anova_mean_squares"]


@dataclass(frozen=True)
class RaterTable:
    """``n`` subjects (rows) by ``k`` raters (columns)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] < 2 or v.shape[1] < 2:
            raise ValueError(f"rater table needs at least 2 subjects and 2 raters, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("rater table contains non-finite entries")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def k(self) -> int:
        return self.values.shape[1]


def anova_mean_squares(table: RaterTable) -> tuple[float, float, float]:
    """Two-way ANOVA without replication: (MS rows, MS columns, MS error)."""
    x = table.values
    n, k = x.shape
    grand = x.mean()
    ss_rows = k * np.sum((x.mean(axis=1) - grand) ** 2)
    ss_cols = n * np.sum((x.mean(axis=0) - grand) ** 2)
    ss_total = np.sum((x - grand) ** 2)
    ss_err = ss_total - ss_rows - ss_cols
    return ss_rows / (n - 1), ss_cols / (k - 1), ss_err / ((n - 1) * (k - 1))


def icc_2_1(table: RaterTable) -> float:
    """ICC(2,1): two-way random effects, absolute agreement, single measures.

    Raises DegenerateTable when the denominator vanishes, e.g. a constant
    table (0/0). The value is at most 1 but has no general lower bound.
    """
    ms_r, ms_c, ms_e = anova_mean_squares(table)
    n, k = table.n, table.k
    num = ms_r - ms_e
    den = ms_r + (k - 1) * ms_e + k * (ms_c - ms_e) / n
    # relative guard: a constant table leaves only rounding noise in every mean square
    scale = max(abs(float(np.mean(table.values))), 1.0) ** 2
    if abs(den) <= 1e-24 * scale:
        raise DegenerateTable("ICC is not estimable: the ANOVA denominator is zero")
    return float(num / den)


@dataclass(frozen=True)
class DiffSummary:
    mean_abs_diff: float
    sd: float
    ci95_half_width: float
    n: int

    def to_json(self) -> dict:
        return asdict(self)


def mean_difference(pred: Sequence[float], truth: Sequence[float]) -> DiffSummary:
    """Mean absolute difference with its sample SD and a normal 95% half-width."""
    p = np.asarray(pred, dtype=float)
    t = np.asarray(truth, dtype=float)
    if p.shape != t.shape:
        raise LengthMismatch(f"{p.size} predictions vs {t.size} ground-truth values")
    if p.size == 0:
        raise EmptyInput("no measurements")
    d = np.abs(p - t)
    n = d.size
    sd = float(np.std(d, ddof=1)) if n > 1 else 0.0
    return DiffSummary(float(d.mean()), sd, 1.96 * sd / math.sqrt(n), n)
