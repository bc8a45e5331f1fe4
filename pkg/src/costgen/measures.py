"""Heterogeneity and proportionality statistics of a cost matrix.

Undefined values are reported as NaN: zero margins make the row/column CVs
and the chi-square undefined, constant rows/columns make their correlations
undefined.  Aggregates should use ``np.nanmean`` so undefined values are
discarded.
"""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass, fields

import numpy as np

MEASURES = ("cost_cv", "row_cv", "col_cv", "chi2", "row_corr", "col_corr")


@dataclass(frozen=True)
class MeasureRecord:
    step: int
    cost_cv: float
    row_cv: float
    col_cv: float
    chi2: float
    row_corr: float
    col_corr: float

    def values(self) -> tuple[float, ...]:
        return astuple(self)[1:]

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def cost_cv(M) -> float:
    M = np.asarray(M, dtype=float)
    total = M.sum()
    if total == 0:
        return math.nan
    mean = total / M.size
    return float(np.sqrt(np.mean((M / mean - 1.0) ** 2)))


def _mean_cv(M) -> float:
    # rows of M
    sums = M.sum(axis=1)
    if (sums == 0).any():
        return math.nan
    means = sums / M.shape[1]
    std = np.sqrt(np.mean((M - means[:, None]) ** 2, axis=1))
    return float(np.mean(std / means))


def mean_row_cv(M) -> float:
    """Average over rows of std(row) / mean(row)."""
    return _mean_cv(np.asarray(M, dtype=float))


def mean_col_cv(M) -> float:
    return _mean_cv(np.asarray(M, dtype=float).T)


def chi2(M) -> float:
    """Pearson's chi-square statistic against the proportional matrix."""
    M = np.asarray(M, dtype=float)
    mu = M.sum(axis=1)
    nu = M.sum(axis=0)
    if (mu == 0).any() or (nu == 0).any():
        return math.nan
    expected = np.outer(mu, nu) / M.sum()
    return float(np.sum((M - expected) ** 2 / expected))


def _mean_corr(M) -> float:
    # pairs of rows of M; constant rows are dropped
    if M.shape[0] < 2:
        return math.nan
    keep = M.max(axis=1) != M.min(axis=1)
    X = M[keep]
    if X.shape[0] < 2:
        return math.nan
    X = X - X.mean(axis=1, keepdims=True)
    X /= np.sqrt((X * X).sum(axis=1, keepdims=True))
    C = X @ X.T
    iu = np.triu_indices(X.shape[0], k=1)
    return float(np.clip(C[iu], -1.0, 1.0).mean())


def mean_row_corr(M) -> float:
    """Mean Pearson correlation over all pairs of non-constant rows."""
    return _mean_corr(np.asarray(M, dtype=float))


def mean_col_corr(M) -> float:
    return _mean_corr(np.asarray(M, dtype=float).T)


def measure_record(M, step: int = 0) -> MeasureRecord:
    M = np.asarray(M, dtype=float)
    return MeasureRecord(step, cost_cv(M), mean_row_cv(M), mean_col_cv(M),
                         chi2(M), mean_row_corr(M), mean_col_corr(M))
