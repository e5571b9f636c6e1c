"""On-disk artifact formats produced and consumed by the pipeline steps.

Everything is plain CSV/JSON. Floats are written with ``repr`` so files are
byte-deterministic and round-trip exactly; rows are sorted on write.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from datetime import date, datetime
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .detect import AnomalyDecision, Detector, Direction
from .errors import HeaderError
from .evaluate import EventScale, GroundTruthEvent, RecallCurve, SweepCell
from .fuse import FusedDecision
from .geo import GeoPoint, ZoneSet
from .granger import GrangerResult
from .ingest import Daytype, OccupancySeries, SeriesKey, Source
from .normalcy import NormalcyModel, ScoredObservation


@dataclass(frozen=True)
class ArtifactPaths:
    root: Path

    @property
    def occupancy(self) -> Path:
        return self.root / "occupancy.csv"

    @property
    def meta(self) -> Path:
        return self.root / "meta.json"

    @property
    def models(self) -> Path:
        return self.root / "models.csv"

    @property
    def scores(self) -> Path:
        return self.root / "scores.csv"

    def decisions(self, detector: Detector) -> Path:
        return self.root / f"decisions_{detector.value.lower()}.csv"

    @property
    def fused(self) -> Path:
        return self.root / "fused.csv"

    @property
    def recall(self) -> Path:
        return self.root / "recall.csv"

    @property
    def sweep(self) -> Path:
        return self.root / "sweep.csv"

    @property
    def granger(self) -> Path:
        return self.root / "granger.csv"

    @property
    def granger_agg(self) -> Path:
        return self.root / "granger_agg.csv"

    @property
    def shapiro(self) -> Path:
        return self.root / "shapiro.csv"

    @property
    def report(self) -> Path:
        return self.root / "report.json"


def _write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _read_rows(path: Path, expected_header: Sequence[str]) -> Iterable[list[str]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != list(expected_header):
            raise HeaderError(f"{path}: header {header!r} != {list(expected_header)!r}")
        yield from reader


# --- occupancy -------------------------------------------------------------

OCCUPANCY_HEADER = ("source", "location_id", "bin_of_day", "daytype", "date", "value")


def write_occupancy(path: Path, series_map: Mapping[SeriesKey, OccupancySeries]) -> None:
    rows = []
    for key in sorted(
        series_map, key=lambda k: (k.source.value, k.location_id, k.bin_of_day, k.daytype.value)
    ):
        for d, v in series_map[key].samples:
            rows.append(
                (
                    key.source.value,
                    key.location_id,
                    str(key.bin_of_day),
                    key.daytype.value,
                    d.isoformat(),
                    repr(float(v)),
                )
            )
    _write_rows(path, OCCUPANCY_HEADER, rows)


def read_occupancy(path: Path) -> dict[SeriesKey, OccupancySeries]:
    acc: dict[SeriesKey, list] = {}
    for row in _read_rows(path, OCCUPANCY_HEADER):
        key = SeriesKey(Source(row[0]), row[1], int(row[2]), Daytype(row[3]))
        acc.setdefault(key, []).append((date.fromisoformat(row[4]), float(row[5])))
    return {
        key: OccupancySeries(key=key, samples=sorted(samples))
        for key, samples in acc.items()
    }


# --- normalcy models -------------------------------------------------------

MODELS_HEADER = (
    "source", "location_id", "bin_of_day", "daytype", "n", "mean", "std", "median", "q1", "q3",
)


def write_models(path: Path, models: Mapping[SeriesKey, NormalcyModel]) -> None:
    rows = []
    for key in sorted(
        models, key=lambda k: (k.source.value, k.location_id, k.bin_of_day, k.daytype.value)
    ):
        m = models[key]
        rows.append(
            (
                key.source.value, key.location_id, str(key.bin_of_day), key.daytype.value,
                str(m.n), repr(m.mean), repr(m.std), repr(m.median), repr(m.q1), repr(m.q3),
            )
        )
    _write_rows(path, MODELS_HEADER, rows)


def read_models(path: Path) -> dict[SeriesKey, NormalcyModel]:
    models = {}
    for row in _read_rows(path, MODELS_HEADER):
        key = SeriesKey(Source(row[0]), row[1], int(row[2]), Daytype(row[3]))
        models[key] = NormalcyModel(
            key=key,
            n=int(row[4]),
            mean=float(row[5]),
            std=float(row[6]),
            median=float(row[7]),
            q1=float(row[8]),
            q3=float(row[9]),
        )
    return models


# --- scored observations ---------------------------------------------------

SCORES_HEADER = (
    "source", "location_id", "bin_of_day", "daytype", "date", "value", "z", "normalized_z",
)


def write_scores(path: Path, scored: Sequence[ScoredObservation]) -> None:
    rows = [
        (
            o.key.source.value,
            o.key.location_id,
            str(o.key.bin_of_day),
            o.key.daytype.value,
            o.date.isoformat(),
            repr(o.value),
            repr(o.z),
            repr(o.normalized_z),
        )
        for o in scored
    ]
    _write_rows(path, SCORES_HEADER, rows)


def read_scores(path: Path) -> list[ScoredObservation]:
    out = []
    for row in _read_rows(path, SCORES_HEADER):
        key = SeriesKey(Source(row[0]), row[1], int(row[2]), Daytype(row[3]))
        out.append(
            ScoredObservation(
                key=key,
                date=date.fromisoformat(row[4]),
                value=float(row[5]),
                z=float(row[6]),
                normalized_z=float(row[7]),
            )
        )
    return out


# --- decisions ---------------------------------------------------------------

DECISIONS_HEADER = (
    "detector", "source", "location_id", "date", "bin_of_day", "score", "direction", "is_anomaly",
)


def write_decisions(path: Path, decisions: Sequence[AnomalyDecision]) -> None:
    ordered = sorted(
        decisions,
        key=lambda d: (
            d.detector.value, d.key.source.value, d.key.location_id,
            d.date.isoformat(), d.key.bin_of_day,
        ),
    )
    rows = [
        (
            d.detector.value,
            d.key.source.value,
            d.key.location_id,
            d.date.isoformat(),
            str(d.key.bin_of_day),
            repr(d.score),
            d.direction.value,
            "1" if d.is_anomaly else "0",
        )
        for d in ordered
    ]
    _write_rows(path, DECISIONS_HEADER, rows)


def read_decisions(path: Path) -> list[AnomalyDecision]:
    out = []
    for row in _read_rows(path, DECISIONS_HEADER):
        d = date.fromisoformat(row[3])
        key = SeriesKey(Source(row[1]), row[2], int(row[4]), daytype_from_date(d))
        out.append(
            AnomalyDecision(
                key=key,
                date=d,
                score=float(row[5]),
                is_anomaly=row[7] == "1",
                detector=Detector(row[0]),
                direction=Direction(row[6]),
            )
        )
    return out


def daytype_from_date(d: date) -> Daytype:
    return Daytype.WEEKEND if d.weekday() >= 5 else Daytype.WEEKDAY


# --- fused decisions ---------------------------------------------------------

FUSED_HEADER = ("method", "zone_id", "date", "bin_of_day", "fused_score", "votes", "is_anomaly")


def write_fused(path: Path, fused_by_method: Mapping[str, Sequence[FusedDecision]]) -> None:
    rows = []
    for method in sorted(fused_by_method):
        for f in sorted(
            fused_by_method[method], key=lambda f: (f.location_id, f.date.isoformat(), f.bin_of_day)
        ):
            rows.append(
                (
                    method,
                    f.location_id,
                    f.date.isoformat(),
                    str(f.bin_of_day),
                    "" if f.fused_score is None else repr(f.fused_score),
                    str(f.votes),
                    "1" if f.is_anomaly else "0",
                )
            )
    _write_rows(path, FUSED_HEADER, rows)


def read_fused(path: Path) -> dict[str, list[FusedDecision]]:
    out: dict[str, list[FusedDecision]] = {}
    for row in _read_rows(path, FUSED_HEADER):
        out.setdefault(row[0], []).append(
            FusedDecision(
                location_id=row[1],
                date=date.fromisoformat(row[2]),
                bin_of_day=int(row[3]),
                fused_score=None if row[4] == "" else float(row[4]),
                votes=int(row[5]),
                is_anomaly=row[6] == "1",
                contributing_sources=frozenset(),
            )
        )
    return out


# --- recall curves and sweeps ------------------------------------------------

RECALL_HEADER = ("label", "offset_hours", "R_m", "recall")


def write_recall(path: Path, curves: Sequence[RecallCurve]) -> None:
    rows = []
    for curve in sorted(curves, key=lambda c: (c.label, c.offset_hours)):
        for r, rec in curve.points:
            rows.append((curve.label, str(curve.offset_hours), repr(float(r)), repr(float(rec))))
    _write_rows(path, RECALL_HEADER, rows)


def read_recall(path: Path) -> list[tuple[str, int, float, float]]:
    return [
        (row[0], int(row[1]), float(row[2]), float(row[3]))
        for row in _read_rows(path, RECALL_HEADER)
    ]


SWEEP_HEADER = ("method", "R_m", "S", "recall")


def write_sweep(path: Path, cells: Sequence[SweepCell]) -> None:
    rows = [
        (c.method, repr(float(c.r_m)), repr(float(c.s)), repr(float(c.recall)))
        for c in sorted(cells, key=lambda c: (c.method, c.s, c.r_m))
    ]
    _write_rows(path, SWEEP_HEADER, rows)


# --- granger ------------------------------------------------------------------

GRANGER_HEADER = ("x", "y", "lag", "f", "p", "n_effective")
GRANGER_AGG_HEADER = ("x", "y", "mean_p", "std_p")


def write_granger(path: Path, results: Sequence[GrangerResult]) -> None:
    rows = [
        (
            r.x_label, r.y_label, str(r.lag), repr(r.f_statistic), repr(r.p_value),
            str(r.n_effective),
        )
        for r in sorted(results, key=lambda r: (r.x_label, r.y_label, r.lag))
    ]
    _write_rows(path, GRANGER_HEADER, rows)


def write_granger_agg(path: Path, rows_in: Sequence[tuple[str, str, float, float]]) -> None:
    rows = [(x, y, repr(mp), repr(sp)) for x, y, mp, sp in rows_in]
    _write_rows(path, GRANGER_AGG_HEADER, rows)


# --- shapiro ------------------------------------------------------------------

SHAPIRO_HEADER = ("source", "location_id", "bin_of_day", "n", "W", "p")


def write_shapiro(path: Path, rows_in: Sequence[tuple[str, str, int, int, float, float]]) -> None:
    rows = [
        (src, loc, str(b), str(n), repr(w), repr(p))
        for src, loc, b, n, w, p in sorted(rows_in)
    ]
    _write_rows(path, SHAPIRO_HEADER, rows)


# --- ground-truth events and stops --------------------------------------------

EVENTS_HEADER = ("event_id", "name", "lat", "lon", "start_ts", "end_ts", "scale")


def read_events(path: Path) -> list[GroundTruthEvent]:
    events = []
    for row in _read_rows(path, EVENTS_HEADER):
        events.append(
            GroundTruthEvent(
                event_id=row[0],
                name=row[1],
                venue=GeoPoint(float(row[3]), float(row[2])),
                start=datetime.fromisoformat(row[4]),
                end=datetime.fromisoformat(row[5]),
                scale=EventScale(row[6]),
            )
        )
    return events


STOPS_HEADER = ("bus_stop_id", "lat", "lon")


def read_stops(path: Path) -> list[tuple[str, float, float]]:
    return [(row[0], float(row[1]), float(row[2])) for row in _read_rows(path, STOPS_HEADER)]


def stop_zone_map(stops: Sequence[tuple[str, float, float]], zones: ZoneSet) -> dict[str, str]:
    """Map each stop to its containing zone; stops outside all zones are dropped."""
    if not stops:
        return {}
    lons = np.array([lon for _, _, lon in stops])
    lats = np.array([lat for _, lat, _ in stops])
    idx = zones.assign_points(lons, lats)
    return {
        stops[i][0]: zones.zone_at(int(zi)).zone_id for i, zi in enumerate(idx) if zi >= 0
    }


# --- meta / report -------------------------------------------------------------


def write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True))


def read_json(path: Path) -> dict:
    return json.loads(path.read_text())
