import math
from datetime import date, timedelta

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zonepulse.errors import UndefinedScoreError, UnsupportedSizeError, ZeroVarianceError
from zonepulse.ingest import Daytype, OccupancySeries, SeriesKey, Source
from zonepulse.normalcy import (
    ScoredObservation,
    fit,
    fit_one,
    normalize_scores,
    score_series,
    shapiro_wilk,
    z_score,
)


KEY = SeriesKey(Source.CDR, "Z1", 9, Daytype.WEEKDAY)


def interpolated_quantile(sorted_values, p):
    """Independent inclusive-method oracle: h = (n-1)p between order stats."""
    n = len(sorted_values)
    h = (n - 1) * p
    lo = math.floor(h)
    hi = math.ceil(h)
    return sorted_values[lo] + (h - lo) * (sorted_values[hi] - sorted_values[lo])


def make_series(values, start=date(2017, 5, 1)):
    samples = [(start + timedelta(days=i), float(v)) for i, v in enumerate(values)]
    return OccupancySeries(key=KEY, samples=samples)


class TestFit:
    def test_basic_stats(self):
        m = fit_one(KEY, np.array([2.0, 4.0, 6.0]))
        assert m.mean == 4.0
        assert m.std == 2.0
        assert m.median == 4.0

    def test_zero_variance_flagged(self):
        m = fit_one(KEY, np.array([5.0, 5.0, 5.0, 5.0]))
        assert m.std == 0.0
        assert m.zero_variance and not m.degenerate

    def test_quartiles_one_to_eight(self):
        values = list(range(1, 9))
        expected_q1 = interpolated_quantile(values, 0.25)
        expected_q3 = interpolated_quantile(values, 0.75)
        assert (expected_q1, expected_q3) == (2.75, 6.25)
        m = fit_one(KEY, np.array(values, dtype=float))
        assert m.q1 == expected_q1
        assert m.q3 == expected_q3
        assert m.iqr == 3.5

    def test_quartiles_match_oracle_random(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            vals = np.sort(rng.normal(size=int(rng.integers(2, 40))))
            m = fit_one(KEY, vals)
            assert m.q1 == pytest.approx(interpolated_quantile(vals, 0.25), rel=1e-12)
            assert m.q3 == pytest.approx(interpolated_quantile(vals, 0.75), rel=1e-12)
            assert vals.min() <= m.q1 <= m.median <= m.q3 <= vals.max()

    def test_single_sample_degenerate(self):
        series = {KEY: make_series([3.0])}
        models = fit(series)
        assert models[KEY].degenerate

    def test_holiday_exclusion(self):
        series = {KEY: make_series([1.0, 1.0, 100.0, 1.0])}
        holiday = date(2017, 5, 3)
        models = fit(series, exclude_dates=[holiday])
        assert models[KEY].n == 3
        assert models[KEY].mean == 1.0


class TestZScore:
    def test_examples(self):
        m = fit_one(KEY, np.array([8.0, 10.0, 12.0]))
        m = type(m)(key=KEY, n=3, mean=10.0, std=2.0, median=10.0, q1=9.0, q3=11.0)
        assert z_score(m, 16.0) == 3.0
        assert z_score(m, 10.0) == 0.0
        assert z_score(m, 4.0) == -3.0

    def test_zero_variance_raises(self):
        m = fit_one(KEY, np.array([5.0, 5.0]))
        with pytest.raises(UndefinedScoreError):
            z_score(m, 6.0)

    @given(
        st.lists(st.floats(-1e4, 1e4), min_size=3, max_size=30),
        st.floats(1e-3, 1e3),
        st.floats(-1e4, 1e4),
    )
    @settings(max_examples=60, deadline=None)
    def test_affine_equivariance(self, values, scale, value):
        arr = np.asarray(values)
        if arr.std(ddof=1) < 1e-9:
            return
        m1 = fit_one(KEY, arr)
        m2 = fit_one(KEY, arr * scale)
        z1 = z_score(m1, value)
        z2 = z_score(m2, value * scale)
        assert z2 == pytest.approx(z1, rel=1e-9, abs=1e-9)

    def test_in_sample_mean_zero(self):
        rng = np.random.default_rng(8)
        vals = rng.gamma(3.0, 2.0, size=40)
        m = fit_one(KEY, vals)
        zs = [(v - m.mean) / m.std for v in vals]
        assert abs(np.mean(zs)) < 1e-9 * max(1.0, np.abs(zs).max())


class TestNormalizeScores:
    def _scored(self, zs, source=Source.CDR):
        key = SeriesKey(source, "Z1", 9, Daytype.WEEKDAY)
        return [
            ScoredObservation(key=key, date=date(2017, 5, 1) + timedelta(days=i), value=0.0, z=z)
            for i, z in enumerate(zs)
        ]

    def test_example(self):
        out = normalize_scores(self._scored([-2.0, 1.0, 4.0]))
        assert [o.normalized_z for o in out] == [0.5, 0.25, 1.0]

    def test_all_zero_corpus(self):
        out = normalize_scores(self._scored([0.0, 0.0]))
        assert [o.normalized_z for o in out] == [0.0, 0.0]

    def test_single_observation(self):
        out = normalize_scores(self._scored([-7.0]))
        assert out[0].normalized_z == 1.0

    def test_per_source_scaling(self):
        obs = self._scored([2.0], Source.CDR) + self._scored([8.0], Source.CHECKIN)
        out = normalize_scores(obs)
        assert out[0].normalized_z == 1.0 and out[1].normalized_z == 1.0

    def test_ranking_preserved(self):
        rng = np.random.default_rng(3)
        zs = rng.normal(size=100) * 3
        out = normalize_scores(self._scored(list(zs)))
        by_abs_z = np.argsort([abs(o.z) for o in out], kind="stable")
        by_norm = np.argsort([o.normalized_z for o in out], kind="stable")
        assert np.array_equal(by_abs_z, by_norm)


class TestScoreSeries:
    def test_skips_zero_variance_keys(self):
        k2 = SeriesKey(Source.CDR, "Z2", 9, Daytype.WEEKDAY)
        series = {
            KEY: make_series([1.0, 2.0, 3.0]),
            k2: OccupancySeries(key=k2, samples=make_series([5.0, 5.0]).samples),
        }
        models = fit(series)
        scored, skipped = score_series(series, models)
        assert {o.key for o in scored} == {KEY}
        assert skipped == [k2]


class TestShapiroWilk:
    def test_matches_reference_implementation(self):
        from scipy import stats

        rng = np.random.default_rng(42)
        for n in (3, 4, 5, 7, 11, 12, 30, 50, 200, 1500):
            for _ in range(4):
                x = rng.normal(size=n) if rng.random() < 0.5 else rng.exponential(size=n)
                w, p = shapiro_wilk(x)
                ref_w, ref_p = stats.shapiro(x)
                assert w == pytest.approx(ref_w, abs=5e-7)
                assert p == pytest.approx(ref_p, abs=5e-6)
                assert 0.0 < w <= 1.0

    def test_calibration_on_normal_data(self):
        rejections = 0
        trials = 200
        for seed in range(trials):
            x = np.random.default_rng(seed).normal(size=50)
            _, p = shapiro_wilk(x)
            rejections += p < 0.05
        assert abs(rejections / trials - 0.05) <= 0.04

    def test_power_on_exponential_data(self):
        detected = 0
        trials = 200
        for seed in range(trials):
            x = np.random.default_rng(seed).exponential(size=50)
            _, p = shapiro_wilk(x)
            detected += p < 0.05
        assert detected / trials > 0.90

    def test_constant_input_raises(self):
        with pytest.raises(ZeroVarianceError):
            shapiro_wilk([3.0, 3.0, 3.0, 3.0])

    def test_size_limits(self):
        with pytest.raises(UnsupportedSizeError):
            shapiro_wilk([1.0, 2.0])
        with pytest.raises(UnsupportedSizeError):
            shapiro_wilk(np.arange(5001, dtype=float))
