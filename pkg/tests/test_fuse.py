from datetime import date, timedelta

import numpy as np
import pytest

from zonepulse.errors import ConfigError
from zonepulse.fuse import (
    AlignedTable,
    FusionMethod,
    FusionPolicy,
    align_to_zones,
    fuse,
    fuse_majority,
    fuse_weighted,
)
from zonepulse.ingest import Daytype, SeriesKey, Source
from zonepulse.normalcy import ScoredObservation

D = date(2017, 6, 30)
SOURCES = (Source.CDR, Source.TAXI_DROPOFF, Source.CHECKIN)


def obs(source, loc, bin_of_day, normalized, d=D):
    key = SeriesKey(source, loc, bin_of_day, Daytype.WEEKDAY)
    return ScoredObservation(key=key, date=d, value=0.0, z=0.0, normalized_z=normalized)


def table_from(cells, sources=SOURCES, bin_minutes=60):
    return AlignedTable(bin_minutes=bin_minutes, sources=sources, cells=cells)


def policy(method, s, k=2, weights=None, sources=SOURCES):
    return FusionPolicy(
        method=FusionMethod(method),
        score_threshold=s,
        sources=sources,
        weights=weights,
        k=k,
    )


class TestAlign:
    def test_bus_stops_max_pool_to_zone(self):
        scored = {
            Source.BUS: [
                obs(Source.BUS, "S1", 76, 0.2),
                obs(Source.BUS, "S2", 76, 0.9),
            ]
        }
        t = align_to_zones(
            scored, {Source.BUS: 15}, stop_zones={"S1": "A", "S2": "A"}
        )
        assert t.cells[("A", D, 76)][Source.BUS] == 0.9

    def test_missing_is_absent_not_zero(self):
        scored = {
            Source.CDR: [obs(Source.CDR, "A", 19, 0.5)],
            Source.CHECKIN: [],
        }
        t = align_to_zones(scored, {Source.CDR: 60, Source.CHECKIN: 15})
        cell = t.cells[("A", D, 19)]
        assert Source.CHECKIN not in cell

    def test_fine_bins_max_pool_to_hour(self):
        scored = {
            Source.CDR: [obs(Source.CDR, "A", 19, 0.4)],
            Source.CHECKIN: [
                obs(Source.CHECKIN, "A", 76, 0.1),
                obs(Source.CHECKIN, "A", 77, 0.8),
                obs(Source.CHECKIN, "A", 78, 0.3),
                obs(Source.CHECKIN, "A", 79, 0.2),
            ],
        }
        t = align_to_zones(scored, {Source.CDR: 60, Source.CHECKIN: 15})
        assert t.bin_minutes == 60
        assert t.cells[("A", D, 19)][Source.CHECKIN] == 0.8

    def test_bus_without_stop_map_is_config_error(self):
        with pytest.raises(ConfigError):
            align_to_zones({Source.BUS: []}, {Source.BUS: 15})


class TestFuseWeighted:
    def test_paper_weight_example(self):
        cells = {("A", D, 19): {SOURCES[0]: 1.0, SOURCES[1]: 0.0, SOURCES[2]: 0.0}}
        w = {SOURCES[0]: 0.8, SOURCES[1]: 0.1, SOURCES[2]: 0.1}
        out = fuse_weighted(table_from(cells), policy("WEIGHTED", 0.8, weights=w))
        assert out[0].fused_score == pytest.approx(0.8)
        assert out[0].is_anomaly  # threshold inclusive

    def test_mean_reduction(self):
        cells = {("A", D, 19): {s: 0.3 for s in SOURCES}}
        out = fuse(table_from(cells), policy("MEAN", 0.5))
        assert out[0].fused_score == pytest.approx(0.3)
        assert not out[0].is_anomaly

    def test_missing_source_renormalizes(self):
        cells = {("A", D, 19): {SOURCES[0]: 0.9}}
        w = {SOURCES[0]: 0.5, SOURCES[1]: 0.25, SOURCES[2]: 0.25}
        out = fuse_weighted(table_from(cells), policy("WEIGHTED", 0.8, weights=w))
        assert out[0].fused_score == pytest.approx(0.9)
        assert out[0].contributing_sources == frozenset({SOURCES[0]})

    def test_all_missing_cell_skipped(self):
        cells = {("A", D, 19): {}}
        out = fuse_weighted(table_from(cells), policy("MEAN", 0.5))
        assert out == []

    def test_weights_must_sum_to_one(self):
        with pytest.raises(ConfigError):
            policy("WEIGHTED", 0.5, weights={SOURCES[0]: 0.5})

    def test_monotone_in_single_source(self):
        rng = np.random.default_rng(3)
        w = {SOURCES[0]: 0.6, SOURCES[1]: 0.3, SOURCES[2]: 0.1}
        for _ in range(200):
            base = {s: float(rng.random()) for s in SOURCES}
            bumped = dict(base)
            s_pick = SOURCES[int(rng.integers(3))]
            bumped[s_pick] = min(1.0, base[s_pick] + float(rng.random() * 0.5))
            p = policy("WEIGHTED", 0.5, weights=w)
            a = fuse_weighted(table_from({("A", D, 1): base}), p)[0]
            b = fuse_weighted(table_from({("A", D, 1): bumped}), p)[0]
            assert b.fused_score >= a.fused_score - 1e-12
            assert not (a.is_anomaly and not b.is_anomaly)


class TestFuseMajority:
    def test_vote_examples(self):
        cells = {("A", D, 19): {SOURCES[0]: 0.9, SOURCES[1]: 0.7, SOURCES[2]: 0.1}}
        out = fuse_majority(table_from(cells), policy("MAJORITY", 0.6, k=2))
        assert out[0].votes == 2 and out[0].is_anomaly

        cells = {("A", D, 19): {SOURCES[0]: 0.9, SOURCES[1]: 0.1, SOURCES[2]: 0.1}}
        out = fuse_majority(table_from(cells), policy("MAJORITY", 0.6, k=2))
        assert out[0].votes == 1 and not out[0].is_anomaly

        cells = {("A", D, 19): {s: 0.9 for s in SOURCES}}
        out = fuse_majority(table_from(cells), policy("MAJORITY", 0.6, k=2))
        assert out[0].votes == 3 and out[0].is_anomaly

    def test_missing_counts_as_no_vote(self):
        cells = {("A", D, 19): {SOURCES[0]: 0.9, SOURCES[1]: 0.9}}
        out = fuse_majority(table_from(cells), policy("MAJORITY", 0.6, k=2))
        assert out[0].votes == 2 and out[0].is_anomaly

    def test_k_range_validated(self):
        with pytest.raises(ConfigError):
            policy("MAJORITY", 0.5, k=0)
        with pytest.raises(ConfigError):
            policy("MAJORITY", 0.5, k=4)


def random_table(rng, n_cells=100, missing_rate=0.15):
    cells = {}
    for i in range(n_cells):
        cell = (f"Z{i:03d}", D + timedelta(days=int(rng.integers(5))), int(rng.integers(24)))
        per = {}
        for s in SOURCES:
            if rng.random() > missing_rate:
                per[s] = float(rng.random())
        cells[cell] = per
    return table_from(cells)


class TestFusionIdentities:
    def test_weight_one_reproduces_single_source(self):
        rng = np.random.default_rng(77)
        t = random_table(rng)
        s_thresh = 0.55
        for target in SOURCES:
            w = {s: (1.0 if s is target else 0.0) for s in SOURCES}
            fused = fuse_weighted(t, policy("WEIGHTED", s_thresh, weights=w))
            fused_cells = {
                (f.location_id, f.date, f.bin_of_day)
                for f in fused
                if f.is_anomaly
            }
            direct = {
                cell
                for cell, per in t.cells.items()
                if per.get(target) is not None and per[target] >= s_thresh
            }
            assert fused_cells == direct

    def test_k1_is_union_kN_is_intersection(self):
        rng = np.random.default_rng(78)
        t = random_table(rng)
        s_thresh = 0.5
        per_source_sets = {
            s: {
                cell
                for cell, per in t.cells.items()
                if per.get(s) is not None and per[s] >= s_thresh
            }
            for s in SOURCES
        }
        union = set().union(*per_source_sets.values())
        inter = set.intersection(*per_source_sets.values())
        got_union = {
            (f.location_id, f.date, f.bin_of_day)
            for f in fuse_majority(t, policy("MAJORITY", s_thresh, k=1))
            if f.is_anomaly
        }
        got_inter = {
            (f.location_id, f.date, f.bin_of_day)
            for f in fuse_majority(t, policy("MAJORITY", s_thresh, k=3))
            if f.is_anomaly
        }
        assert got_union == union
        assert got_inter == inter

    def test_weighted_flag_count_non_increasing_in_s(self):
        rng = np.random.default_rng(79)
        t = random_table(rng)
        w = {SOURCES[0]: 0.5, SOURCES[1]: 0.3, SOURCES[2]: 0.2}
        counts = [
            sum(
                f.is_anomaly
                for f in fuse_weighted(t, policy("WEIGHTED", s, weights=w))
            )
            for s in (0.2, 0.4, 0.6, 0.8)
        ]
        assert counts == sorted(counts, reverse=True)
