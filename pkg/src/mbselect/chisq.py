"""Pearson chi-square independence tests for categorical columns.

The conditional variant stratifies on the joint level of the conditioning
columns and sums statistic and degrees of freedom over the strata large
enough to test; when no stratum qualifies the result reports p = 1 with a
data-insufficient flag instead of guessing.
"""

from __future__ import annotations

import numpy as np
from scipy import stats

from .data import Column, quantile_bin
from .result import CITestResult

# A stratum qualifies when it holds at least this many rows per declared
# level of the wider variable.
MIN_ROWS_PER_LEVEL = 5

DEFAULT_BINS = 4


def contingency_counts(a: Column, b: Column) -> np.ndarray:
    """(levels_a, levels_b) cross-tabulation of two categorical columns."""
    if not (a.is_categorical and b.is_categorical):
        raise ValueError("contingency_counts needs two categorical columns")
    if a.n_rows != b.n_rows:
        raise ValueError("row counts differ")
    r = len(a.kind.levels)
    c = len(b.kind.levels)
    flat = a.values * c + b.values
    return np.bincount(flat, minlength=r * c).reshape(r, c)


def _pearson(counts: np.ndarray) -> tuple[float, int]:
    """Pearson statistic and df after dropping zero-margin rows/columns."""
    counts = counts[counts.sum(axis=1) > 0][:, counts.sum(axis=0) > 0]
    r, c = counts.shape
    if r < 2 or c < 2:
        return 0.0, 0
    total = counts.sum()
    expected = np.outer(counts.sum(axis=1), counts.sum(axis=0)) / total
    stat = float(np.sum((counts - expected) ** 2 / expected))
    return stat, (r - 1) * (c - 1)


def chisq_marginal(a: Column, b: Column) -> CITestResult:
    """Marginal Pearson test; degenerate tables (df = 0) give p = 1."""
    counts = contingency_counts(a, b)
    stat, df = _pearson(counts)
    method = {"test": "chisq", "df": df}
    if df == 0:
        method["data_insufficient"] = True
        return CITestResult(0.0, 1.0, np.empty(0), a.n_rows, method)
    p = float(stats.chi2.sf(stat, df=df))
    return CITestResult(stat, p, np.empty(0), a.n_rows, method)


def chisq_conditional(a: Column, b: Column, cond: list[Column]) -> CITestResult:
    """Test a independent of b given categorical conditioners.

    Statistic and df add over qualifying strata (enough rows for the wider
    variable's level count, both variables varying within the stratum).
    An empty conditioning list is exactly the marginal test.
    """
    if not cond:
        return chisq_marginal(a, b)
    if not all(c.is_categorical for c in cond):
        raise ValueError("conditioning columns must be categorical")
    n = a.n_rows
    if any(c.n_rows != n for c in cond) or b.n_rows != n:
        raise ValueError("row counts differ")

    strata = np.zeros(n, dtype=np.int64)
    for col in cond:
        strata = strata * len(col.kind.levels) + col.values
    min_rows = MIN_ROWS_PER_LEVEL * max(len(a.kind.levels), len(b.kind.levels))

    total_stat = 0.0
    total_df = 0
    n_used = 0
    n_strata = 0
    for key in np.unique(strata):
        mask = strata == key
        rows = int(mask.sum())
        if rows < min_rows:
            continue
        sub_a = a.values[mask]
        sub_b = b.values[mask]
        if np.all(sub_a == sub_a[0]) or np.all(sub_b == sub_b[0]):
            continue
        counts = np.bincount(
            sub_a * len(b.kind.levels) + sub_b,
            minlength=len(a.kind.levels) * len(b.kind.levels),
        ).reshape(len(a.kind.levels), len(b.kind.levels))
        stat, df = _pearson(counts)
        if df == 0:
            continue
        total_stat += stat
        total_df += df
        n_used += rows
        n_strata += 1

    method = {"test": "chisq-conditional", "df": total_df, "strata_used": n_strata}
    if total_df == 0:
        method["data_insufficient"] = True
        return CITestResult(0.0, 1.0, np.empty(0), 0, method)
    p = float(stats.chi2.sf(total_stat, df=total_df))
    return CITestResult(total_stat, p, np.empty(0), n_used, method)


def mixed_marginal(cat: Column, cont: Column, n_bins: int = DEFAULT_BINS) -> CITestResult:
    """Categorical-vs-continuous dependence via equal-frequency binning."""
    if not cat.is_categorical:
        raise ValueError(f"column {cat.name!r} must be categorical")
    if cont.is_categorical:
        raise ValueError(f"column {cont.name!r} must be continuous")
    binned = quantile_bin(cont, n_bins)
    res = chisq_marginal(cat, binned)
    method = dict(res.method)
    method["test"] = "chisq-mixed"
    method["bins"] = len(binned.kind.levels)
    return CITestResult(res.statistic, res.p_value, res.eigenvalues, res.n_used, method)
