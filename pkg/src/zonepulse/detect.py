"""Anomaly detectors: static z-threshold, IQR fences, and seasonal-hybrid ESD.

The seasonal-hybrid detector subtracts a per-phase median seasonal component
and the series median, then runs the generalized ESD test with robust
(median/MAD) statistics on the residual.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from scipy.stats import t as student_t

from .errors import ConfigError
from .ingest import SeriesKey
from .normalcy import NormalcyModel, ScoredObservation

MAD_SCALE = 1.4826  # normal-consistency factor for the median absolute deviation


class Detector(str, Enum):
    ZSCORE = "ZSCORE"
    IQR = "IQR"
    SHESD = "SHESD"


class Direction(str, Enum):
    HIGH = "HIGH"
    LOW = "LOW"


@dataclass(frozen=True, slots=True)
class AnomalyDecision:
    key: SeriesKey
    date: date
    score: float
    is_anomaly: bool
    detector: Detector
    direction: Direction


@dataclass(frozen=True)
class EsdConfig:
    alpha: float = 0.05
    max_anoms_fraction: float = 0.02
    period: int = 7

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must be in (0, 1), got {self.alpha}")
        if not 0.0 < self.max_anoms_fraction <= 0.49:
            raise ConfigError(
                f"max_anoms_fraction must be in (0, 0.49], got {self.max_anoms_fraction}"
            )
        if self.period < 2:
            raise ConfigError(f"period must be >= 2, got {self.period}")


def detect_zscore(
    scored: Sequence[ScoredObservation], threshold: float = 3.0
) -> list[AnomalyDecision]:
    """Flag observations with |z| >= threshold (boundary inclusive)."""
    return [
        AnomalyDecision(
            key=obs.key,
            date=obs.date,
            score=obs.z,
            is_anomaly=abs(obs.z) >= threshold,
            detector=Detector.ZSCORE,
            direction=Direction.HIGH if obs.z > 0 else Direction.LOW,
        )
        for obs in scored
    ]


def detect_iqr(
    model: NormalcyModel,
    value: float,
    d: Optional[date] = None,
    multiplier: float = 1.5,
) -> AnomalyDecision:
    """Flag a value beyond quartile +/- multiplier * IQR (strict inequality)."""
    lo = model.q1 - multiplier * model.iqr
    hi = model.q3 + multiplier * model.iqr
    return AnomalyDecision(
        key=model.key,
        date=d if d is not None else date.min,
        score=value,
        is_anomaly=value < lo or value > hi,
        detector=Detector.IQR,
        direction=Direction.HIGH if value > model.median else Direction.LOW,
    )


@dataclass(frozen=True)
class EsdResult:
    indices: tuple[int, ...]  # positions in the input series, in removal order
    truncated: bool  # scale collapsed to zero before max_anoms iterations


def _esd_lambda(n: int, k: int, alpha: float) -> float:
    # critical value for the k-th (1-based) test statistic
    p = 1.0 - alpha / (2.0 * (n - k + 1))
    tq = student_t.ppf(p, n - k - 1)
    return ((n - k) * tq) / math.sqrt((n - k - 1 + tq * tq) * (n - k + 1))


def generalized_esd(
    series: Sequence[float],
    max_anoms: int,
    alpha: float = 0.05,
    robust: bool = False,
) -> EsdResult:
    """Generalized (Rosner) ESD test for up to ``max_anoms`` outliers.

    Iteratively removes the point with the largest studentized deviation
    (mean/std, or median/1.4826*MAD when robust) and flags all removals up
    to the largest k whose statistic exceeds the t-based critical value.
    If the scale estimate collapses to zero mid-iteration, points that still
    deviate from the center are unboundedly studentized and flagged, and the
    search stops once the remainder is exactly constant.
    """
    x = np.asarray(series, dtype=np.float64)
    n = x.size
    if max_anoms < 1:
        raise ValueError(f"max_anoms must be >= 1, got {max_anoms}")
    if n < max_anoms + 2:
        raise ValueError(f"need n >= max_anoms + 2 (n={n}, max_anoms={max_anoms})")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")

    remaining = np.arange(n)
    removed: list[int] = []
    stats: list[float] = []
    truncated = False
    for k in range(1, max_anoms + 1):
        vals = x[remaining]
        if robust:
            center = float(np.median(vals))
            scale = MAD_SCALE * float(np.median(np.abs(vals - center)))
        else:
            center = float(vals.mean())
            scale = float(vals.std(ddof=1))
        dev = np.abs(vals - center)
        # smallest index among near-ties of the max, so roundoff-level
        # perturbations (e.g. an added exact-period signal) cannot reorder
        # removals
        j = int(np.argmax(dev >= dev.max() * (1.0 - 1e-9)))
        if scale == 0.0:
            truncated = True
            if dev[j] == 0.0:
                break
            stat = math.inf
        else:
            stat = float(dev[j]) / scale
        removed.append(int(remaining[j]))
        stats.append(stat)
        remaining = np.delete(remaining, j)

    n_out = 0
    for k, stat in enumerate(stats, start=1):
        if stat > _esd_lambda(n, k, alpha):
            n_out = k
    return EsdResult(indices=tuple(removed[:n_out]), truncated=truncated)


def seasonal_residual(values: np.ndarray, period: int) -> np.ndarray:
    """Residual after removing the per-phase median and the series median."""
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    seasonal = np.empty(n)
    for phase in range(period):
        seasonal[phase::period] = np.median(values[phase::period])
    return values - seasonal - float(np.median(values))


def detect_shesd(
    z_series: Sequence[ScoredObservation],
    config: EsdConfig,
) -> list[AnomalyDecision]:
    """Seasonal-hybrid ESD over one key-group's z-scores ordered by (date, bin).

    The caller supplies the observations of a single (source, location,
    daytype) group sorted by date then bin_of_day; flags at most
    ceil(max_anoms_fraction * n) of them.
    """
    n = len(z_series)
    if n < 2 * config.period:
        raise ValueError(
            f"series of length {n} is shorter than two periods ({2 * config.period})"
        )
    values = np.array([obs.z for obs in z_series], dtype=np.float64)
    residual = seasonal_residual(values, config.period)
    max_anoms = math.ceil(config.max_anoms_fraction * n)
    result = generalized_esd(residual, max_anoms=max_anoms, alpha=config.alpha, robust=True)
    flagged = set(result.indices)
    decisions = []
    for i, obs in enumerate(z_series):
        decisions.append(
            AnomalyDecision(
                key=obs.key,
                date=obs.date,
                score=obs.z,
                is_anomaly=i in flagged,
                detector=Detector.SHESD,
                direction=Direction.HIGH if residual[i] > 0 else Direction.LOW,
            )
        )
    return decisions
