"""Baseline statistics per series key: z-scores, quartiles, normality testing.

The Shapiro-Wilk test is implemented after Royston's AS R94 approximation
(order-statistic weights from Blom scores with polynomial end corrections,
p-value from a normal approximation of a transform of W), valid for
3 <= n <= 5000.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, replace
from datetime import date
from typing import Iterable, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import UndefinedScoreError, UnsupportedSizeError, ZeroVarianceError
from .ingest import OccupancySeries, SeriesKey, Source


@dataclass(frozen=True, slots=True)
class NormalcyModel:
    key: SeriesKey
    n: int
    mean: float
    std: float  # sample std (n-1); 0.0 when degenerate
    median: float
    q1: float
    q3: float

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1

    @property
    def degenerate(self) -> bool:
        return self.n < 2

    @property
    def zero_variance(self) -> bool:
        return self.std == 0.0


@dataclass(frozen=True, slots=True)
class ScoredObservation:
    key: SeriesKey
    date: date
    value: float
    z: float
    normalized_z: float = float("nan")


def fit_one(key: SeriesKey, values: np.ndarray) -> NormalcyModel:
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    if n == 0:
        raise ValueError("cannot fit an empty series")
    q1, median, q3 = np.percentile(values, [25.0, 50.0, 75.0])
    std = float(values.std(ddof=1)) if n >= 2 else 0.0
    return NormalcyModel(
        key=key,
        n=int(n),
        mean=float(values.mean()),
        std=std,
        median=float(median),
        q1=float(q1),
        q3=float(q3),
    )


def fit(
    series_map: dict[SeriesKey, OccupancySeries],
    exclude_dates: Iterable[date] = (),
) -> dict[SeriesKey, NormalcyModel]:
    """Fit one model per key. Quartiles use linear interpolation between
    order statistics. Dates in ``exclude_dates`` (e.g. holidays) are left
    out of the fit; series reduced below one sample are skipped."""
    exclude = set(exclude_dates)
    models = {}
    for key, series in series_map.items():
        if exclude:
            values = np.array([v for d, v in series.samples if d not in exclude])
        else:
            values = series.values()
        if values.size == 0:
            continue
        models[key] = fit_one(key, values)
    return models


def z_score(model: NormalcyModel, value: float) -> float:
    if model.degenerate:
        raise UndefinedScoreError(f"model for {model.key} has n={model.n} < 2")
    if model.std == 0.0:
        raise UndefinedScoreError(f"model for {model.key} has zero variance")
    return (value - model.mean) / model.std


def score_series(
    series_map: dict[SeriesKey, OccupancySeries],
    models: dict[SeriesKey, NormalcyModel],
) -> tuple[list[ScoredObservation], list[SeriesKey]]:
    """z-score every sample against its key's model.

    Keys without a usable model (missing, degenerate, or zero variance) are
    skipped and returned so callers can report them.
    """
    scored: list[ScoredObservation] = []
    skipped: list[SeriesKey] = []
    for key in sorted(series_map, key=_key_order):
        model = models.get(key)
        if model is None or model.degenerate or model.zero_variance:
            skipped.append(key)
            continue
        series = series_map[key]
        for d, v in series.samples:
            scored.append(
                ScoredObservation(key=key, date=d, value=v, z=(v - model.mean) / model.std)
            )
    return scored, skipped


def _key_order(key: SeriesKey):
    return (key.source.value, key.location_id, key.bin_of_day, key.daytype.value)


def normalize_scores(scored: Sequence[ScoredObservation]) -> list[ScoredObservation]:
    """Scale |z| into [0, 1] per source by that source's corpus maximum.

    The max-|z| observation of each source maps to exactly 1.0; an all-zero
    corpus maps to all zeros.
    """
    max_abs: dict[Source, float] = defaultdict(float)
    for obs in scored:
        a = abs(obs.z)
        if a > max_abs[obs.key.source]:
            max_abs[obs.key.source] = a
    out = []
    for obs in scored:
        m = max_abs[obs.key.source]
        nz = abs(obs.z) / m if m > 0.0 else 0.0
        out.append(replace(obs, normalized_z=nz))
    return out


# ---------------------------------------------------------------------------
# Shapiro-Wilk (AS R94)

_C1 = (-2.706056, 4.434685, -2.071190, -0.147981, 0.221157, 0.0)
_C2 = (-3.582633, 5.682633, -1.752461, -0.293762, 0.042981, 0.0)


def _sw_weights(n: int) -> np.ndarray:
    """Royston's approximation to the normal order-statistic weights.

    Returns the full antisymmetric weight vector (lower tail negative)."""
    a = np.zeros(n)
    n2 = n // 2
    if n == 3:
        a[0] = -math.sqrt(0.5)
        a[2] = math.sqrt(0.5)
        return a
    m = ndtri((np.arange(1, n2 + 1) - 0.375) / (n + 0.25))  # lower-half Blom scores (< 0)
    summ2 = 2.0 * float(m @ m)
    ssumm2 = math.sqrt(summ2)
    rsn = 1.0 / math.sqrt(n)
    a1 = float(np.polyval(_C1, rsn)) - m[0] / ssumm2  # magnitude of the end weight
    if n > 5:
        a2 = float(np.polyval(_C2, rsn)) - m[1] / ssumm2
        fac = math.sqrt(
            (summ2 - 2.0 * m[0] ** 2 - 2.0 * m[1] ** 2) / (1.0 - 2.0 * a1**2 - 2.0 * a2**2)
        )
        a[0] = -a1
        a[1] = -a2
        a[2:n2] = m[2:] / fac
    else:
        fac = math.sqrt((summ2 - 2.0 * m[0] ** 2) / (1.0 - 2.0 * a1**2))
        a[0] = -a1
        a[1:n2] = m[1:] / fac
    # mirror: upper half is minus the reversed lower half (middle stays 0)
    a[n - n2 :] = -a[n2 - 1 :: -1]
    return a


def shapiro_wilk(samples: Sequence[float]) -> tuple[float, float]:
    """Shapiro-Wilk W statistic and p-value (Royston's approximation).

    Requires 3 <= n <= 5000 and non-constant input.
    """
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = x.size
    if n < 3 or n > 5000:
        raise UnsupportedSizeError(f"Shapiro-Wilk supports 3 <= n <= 5000, got {n}")
    if x[0] == x[-1]:
        raise ZeroVarianceError("constant sample has no distribution shape to test")

    a = _sw_weights(n)
    xc = x - x.mean()
    ssq = float(xc @ xc)
    w = float((a @ x) ** 2) / ssq
    w = min(w, 1.0)

    if n == 3:
        # exact small-sample law: p = (6/pi) * (asin(sqrt(W)) - asin(sqrt(3/4)))
        p = (6.0 / math.pi) * (math.asin(math.sqrt(w)) - 1.0471975511965976)
        return w, min(max(p, 0.0), 1.0)
    if n <= 11:
        gamma = -2.273 + 0.459 * n
        wt = -math.log(gamma - math.log1p(-w))
        mu = 0.5440 - 0.39978 * n + 0.025054 * n**2 - 0.0006714 * n**3
        sigma = math.exp(1.3822 - 0.77857 * n + 0.062767 * n**2 - 0.0020322 * n**3)
    else:
        ln_n = math.log(n)
        wt = math.log1p(-w)
        mu = 0.0038915 * ln_n**3 - 0.083751 * ln_n**2 - 0.31082 * ln_n - 1.5861
        sigma = math.exp(0.0030302 * ln_n**2 - 0.082676 * ln_n - 0.4803)
    z = (wt - mu) / sigma
    return w, float(ndtr(-z))
