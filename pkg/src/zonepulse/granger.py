"""Granger-causality tests between source occupancy series.

Fits restricted (own lags) and unrestricted (own plus cross lags) OLS models
and compares them with an F test, the asymptotically equivalent form of the
Wald comparison between the two models.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import f as f_dist

from .errors import DegenerateRegressionError


@dataclass(frozen=True, slots=True)
class GrangerResult:
    x_label: str
    y_label: str
    lag: int
    f_statistic: float
    p_value: float
    n_effective: int


def _lag_matrix(series: np.ndarray, lag: int) -> np.ndarray:
    # column j holds series lagged by j+1
    n = series.size - lag
    return np.column_stack([series[lag - j - 1 : lag - j - 1 + n] for j in range(lag)])


def _ols_rss(design: np.ndarray, y: np.ndarray) -> float:
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < design.shape[1]:
        raise DegenerateRegressionError(
            f"singular design matrix (rank {rank} < {design.shape[1]} columns)"
        )
    resid = y - design @ coef
    return float(resid @ resid)


def granger_test(
    x: Sequence[float],
    y: Sequence[float],
    lag: int = 1,
    x_label: str = "x",
    y_label: str = "y",
) -> GrangerResult:
    """Test whether lagged x improves the prediction of y beyond y's own lags.

    F = ((RSS_r - RSS_u)/lag) / (RSS_u/(n_eff - 2*lag - 1)), with the p-value
    from the F distribution with (lag, n_eff - 2*lag - 1) degrees of freedom.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size != y.size:
        raise ValueError(f"series lengths differ ({x.size} vs {y.size})")
    if lag < 1:
        raise ValueError(f"lag must be >= 1, got {lag}")
    n = x.size
    if n <= 3 * lag + 2:
        raise ValueError(f"need n > 3*lag + 2 (n={n}, lag={lag})")
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        raise DegenerateRegressionError("constant series cannot enter the regression")

    target = y[lag:]
    n_eff = target.size
    ones = np.ones((n_eff, 1))
    y_lags = _lag_matrix(y, lag)
    x_lags = _lag_matrix(x, lag)
    rss_restricted = _ols_rss(np.hstack([ones, y_lags]), target)
    rss_unrestricted = _ols_rss(np.hstack([ones, y_lags, x_lags]), target)

    df2 = n_eff - 2 * lag - 1
    if df2 < 1:
        raise ValueError(f"not enough observations for {lag} lags (df={df2})")
    if rss_unrestricted <= 0.0:
        raise DegenerateRegressionError("perfect fit leaves no residual variance")
    f_stat = ((rss_restricted - rss_unrestricted) / lag) / (rss_unrestricted / df2)
    f_stat = max(f_stat, 0.0)  # guard the nested-model identity against roundoff
    p = float(f_dist.sf(f_stat, lag, df2))
    return GrangerResult(
        x_label=x_label,
        y_label=y_label,
        lag=lag,
        f_statistic=float(f_stat),
        p_value=p,
        n_effective=int(n_eff),
    )


def pairwise_granger(
    series_by_label: Mapping[str, Sequence[float]],
    lag: int = 1,
) -> tuple[list[GrangerResult], list[tuple[str, str, str]]]:
    """All ordered-pair tests x -> y over the given sources.

    Per-pair failures (degenerate regressions) are recorded and skipped.
    """
    labels = sorted(series_by_label)
    if len(labels) < 2:
        raise ValueError("pairwise testing needs at least two sources")
    results: list[GrangerResult] = []
    failures: list[tuple[str, str, str]] = []
    for xl in labels:
        for yl in labels:
            if xl == yl:
                continue
            try:
                results.append(
                    granger_test(series_by_label[xl], series_by_label[yl], lag, xl, yl)
                )
            except (DegenerateRegressionError, ValueError) as e:
                failures.append((xl, yl, str(e)))
    return results, failures


def aggregate_pairwise(
    result_sets: Sequence[Sequence[GrangerResult]],
) -> list[tuple[str, str, float, float]]:
    """Mean and standard deviation of p-values per ordered pair across zones."""
    buckets: dict[tuple[str, str], list[float]] = {}
    for results in result_sets:
        for r in results:
            buckets.setdefault((r.x_label, r.y_label), []).append(r.p_value)
    rows = []
    for (xl, yl), ps in sorted(buckets.items()):
        arr = np.asarray(ps)
        std = float(arr.std(ddof=1)) if arr.size >= 2 else 0.0
        rows.append((xl, yl, float(arr.mean()), std))
    return rows
