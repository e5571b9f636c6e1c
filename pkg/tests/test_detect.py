import math
from datetime import date, timedelta

import numpy as np
import pytest
from scipy.stats import t as student_t

from zonepulse.detect import (
    Direction,
    EsdConfig,
    detect_iqr,
    detect_shesd,
    detect_zscore,
    generalized_esd,
    seasonal_residual,
)
from zonepulse.ingest import Daytype, SeriesKey, Source
from zonepulse.normalcy import NormalcyModel, ScoredObservation

KEY = SeriesKey(Source.CDR, "Z1", 9, Daytype.WEEKDAY)


def esd_oracle(series, max_anoms, alpha):
    """Independent exhaustive re-computation of the classical ESD test."""
    x = list(map(float, series))
    n = len(x)
    working = list(enumerate(x))
    removed = []
    stats = []
    for _ in range(max_anoms):
        vals = np.array([v for _, v in working])
        mean = vals.mean()
        std = vals.std(ddof=1)
        devs = np.abs(vals - mean)
        j = int(np.argmax(devs))
        stats.append(devs[j] / std)
        removed.append(working[j][0])
        working.pop(j)
    n_out = 0
    for k, stat in enumerate(stats, start=1):
        p = 1.0 - alpha / (2.0 * (n - k + 1))
        tq = student_t.ppf(p, n - k - 1)
        lam = (n - k) * tq / math.sqrt((n - k - 1 + tq * tq) * (n - k + 1))
        if stat > lam:
            n_out = k
    return set(removed[:n_out])


def scored(zs, key=KEY, start=date(2017, 5, 1)):
    return [
        ScoredObservation(key=key, date=start + timedelta(days=i), value=z, z=float(z))
        for i, z in enumerate(zs)
    ]


class TestDetectZscore:
    def test_boundary_inclusive(self):
        decisions = detect_zscore(scored([3.0]), threshold=3.0)
        assert decisions[0].is_anomaly and decisions[0].direction is Direction.HIGH

    def test_below_threshold(self):
        assert not detect_zscore(scored([2.99]), threshold=3.0)[0].is_anomaly

    def test_two_sided(self):
        d = detect_zscore(scored([-3.5]), threshold=3.0)[0]
        assert d.is_anomaly and d.direction is Direction.LOW

    def test_flag_count_monotone_in_threshold(self):
        rng = np.random.default_rng(1)
        obs = scored(rng.normal(size=500) * 2)
        counts = [
            sum(d.is_anomaly for d in detect_zscore(obs, threshold=t))
            for t in (1.0, 2.0, 3.0, 4.0)
        ]
        assert counts == sorted(counts, reverse=True)

    def test_matches_brute_force_random(self):
        rng = np.random.default_rng(6)
        for _ in range(1000):
            z = float(rng.normal() * 3)
            threshold = float(rng.uniform(0.5, 4))
            d = detect_zscore(scored([z]), threshold=threshold)[0]
            assert d.is_anomaly == (abs(z) >= threshold)


class TestDetectIqr:
    def _model(self, q1, q3, median=None):
        return NormalcyModel(
            key=KEY, n=10, mean=(q1 + q3) / 2, std=1.0,
            median=(q1 + q3) / 2 if median is None else median, q1=q1, q3=q3,
        )

    def test_fence_examples(self):
        m = self._model(10.0, 20.0)  # fences at -5 and 35
        assert detect_iqr(m, 40.0).is_anomaly
        assert detect_iqr(m, 40.0).direction is Direction.HIGH
        assert not detect_iqr(m, 35.0).is_anomaly  # strict
        assert not detect_iqr(m, -5.0).is_anomaly
        low = detect_iqr(m, -6.0)
        assert low.is_anomaly and low.direction is Direction.LOW

    def test_shift_invariance(self):
        rng = np.random.default_rng(9)
        for _ in range(200):
            q1, spread = rng.uniform(0, 10), rng.uniform(0.1, 5)
            m = self._model(q1, q1 + spread)
            v = rng.uniform(-30, 30)
            c = rng.uniform(-100, 100)
            shifted = self._model(q1 + c, q1 + spread + c)
            assert detect_iqr(m, v).is_anomaly == detect_iqr(shifted, v + c).is_anomaly

    def test_matches_brute_force_random(self):
        rng = np.random.default_rng(10)
        for _ in range(1000):
            q1 = rng.uniform(-5, 5)
            iqr = rng.uniform(0.01, 10)
            mult = rng.uniform(0.5, 3)
            m = self._model(q1, q1 + iqr)
            v = rng.uniform(-40, 40)
            expected = v < q1 - mult * iqr or v > (q1 + iqr) + mult * iqr
            assert detect_iqr(m, v, multiplier=mult).is_anomaly == expected


class TestGeneralizedEsd:
    def test_single_planted_outlier(self):
        series = list(range(1, 21)) + [100.0]
        result = generalized_esd(series, max_anoms=3, alpha=0.05)
        assert set(result.indices) == {20}
        assert not result.truncated

    def test_matches_exhaustive_oracle(self):
        rng = np.random.default_rng(12)
        for _ in range(200):
            n = int(rng.integers(5, 13))
            x = rng.normal(size=n)
            if rng.random() < 0.5:
                x[rng.integers(n)] += rng.uniform(3, 10)
            max_anoms = int(rng.integers(1, n - 1))
            got = generalized_esd(x, max_anoms=max_anoms, alpha=0.05)
            assert set(got.indices) == esd_oracle(x, max_anoms, 0.05)

    def test_false_positive_rate(self):
        empty = 0
        trials = 200
        for seed in range(trials):
            x = np.random.default_rng(seed).normal(size=60) * 1e-3 + 5.0
            got = generalized_esd(x, max_anoms=5, alpha=0.05)
            empty += not got.indices
        assert empty / trials >= 0.95

    def test_output_bounded_by_max_anoms(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            x = rng.normal(size=30) + rng.uniform(-5, 5, size=30) * (rng.random(30) < 0.2)
            m = int(rng.integers(1, 10))
            assert len(generalized_esd(x, max_anoms=m).indices) <= m

    def test_short_series_precondition(self):
        with pytest.raises(ValueError):
            generalized_esd([1.0, 2.0, 3.0], max_anoms=2)

    def test_robust_flags_spike_on_constant(self):
        # MAD collapses to zero; the single deviant is unboundedly studentized
        x = np.zeros(50)
        x[17] = 10.0
        got = generalized_esd(x, max_anoms=2, alpha=0.05, robust=True)
        assert set(got.indices) == {17}
        assert got.truncated

    def test_all_constant_truncates_empty(self):
        got = generalized_esd(np.ones(20), max_anoms=3, alpha=0.05, robust=True)
        assert got.indices == () and got.truncated


class TestSeasonalResidual:
    def test_exact_period_absorbed(self):
        pattern = np.array([1.0, 5.0, 2.0, 8.0])
        x = np.tile(pattern, 6)
        resid = seasonal_residual(x, period=4)
        assert np.allclose(resid, resid[0])  # constant (zero up to the global median shift)


class TestDetectShesd:
    def _series(self, values, period):
        key = SeriesKey(Source.CDR, "Z1", 0, Daytype.WEEKDAY)
        return scored(values, key=key), EsdConfig(period=period)

    def test_spike_on_periodic_signal(self):
        pattern = [1.0, 5.0, 2.0, 8.0, 3.0]
        values = pattern * 8
        values[23] += 50.0
        obs, cfg = self._series(values, period=5)
        decisions = detect_shesd(obs, cfg)
        flagged = [i for i, d in enumerate(decisions) if d.is_anomaly]
        assert flagged == [23]
        assert decisions[23].direction is Direction.HIGH

    def test_flat_zero_series(self):
        obs, cfg = self._series([0.0] * 40, period=5)
        assert not any(d.is_anomaly for d in detect_shesd(obs, cfg))

    def test_flag_cap(self):
        rng = np.random.default_rng(21)
        values = list(rng.normal(size=300))
        obs, cfg = self._series(values, period=7)
        decisions = detect_shesd(obs, cfg)
        assert sum(d.is_anomaly for d in decisions) <= math.ceil(0.02 * 300) == 6

    def test_too_short_raises(self):
        obs, cfg = self._series([1.0, 2.0, 3.0], period=5)
        with pytest.raises(ValueError):
            detect_shesd(obs, cfg)

    def test_periodic_signal_invariance(self):
        rng = np.random.default_rng(30)
        violations = 0
        for _ in range(50):
            period = int(rng.integers(3, 9))
            reps = int(rng.integers(3, 7))
            n = period * reps
            base = rng.normal(size=n)
            k = int(rng.integers(0, 3))
            for _spike in range(k):
                base[rng.integers(n)] += rng.uniform(5, 12)
            seasonal = np.tile(rng.uniform(-10, 10, period), reps)
            obs1, cfg = self._series(list(base), period=period)
            obs2, _ = self._series(list(base + seasonal), period=period)
            f1 = {i for i, d in enumerate(detect_shesd(obs1, cfg)) if d.is_anomaly}
            f2 = {i for i, d in enumerate(detect_shesd(obs2, cfg)) if d.is_anomaly}
            violations += f1 != f2
        assert violations == 0


class TestEsdConfig:
    def test_validation(self):
        with pytest.raises(Exception):
            EsdConfig(alpha=1.5)
        with pytest.raises(Exception):
            EsdConfig(max_anoms_fraction=0.0)
        with pytest.raises(Exception):
            EsdConfig(period=1)
