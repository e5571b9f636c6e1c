"""Event-recall scoring against ground truth: recall vs. radius R and offset.

An event counts as recalled when some anomalous decision covers the target
hour (event start plus the offset) on the right date, in a zone whose
centroid lies within R meters of the venue. Sub-hour decisions are pooled
into their calendar hour before matching; multi-hour bins match any hour
they span.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date, datetime, timedelta
from enum import Enum
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .detect import AnomalyDecision
from .errors import ConfigError
from .fuse import AlignedTable, FusedDecision, FusionPolicy, fuse
from .geo import GeoPoint, ZoneSet, haversine_m
from .ingest import COARSE_BIN_HOURS, Source

DEFAULT_R_GRID = tuple(range(0, 4001, 250))  # 0..4000 m, step 250


class EventScale(str, Enum):
    SMALL = "SMALL"
    MEDIUM = "MEDIUM"
    LARGE = "LARGE"


@dataclass(frozen=True, slots=True)
class GroundTruthEvent:
    event_id: str
    name: str
    venue: GeoPoint
    start: datetime
    end: datetime
    scale: EventScale

    def __post_init__(self):
        if self.end < self.start:
            raise ValueError(f"event {self.event_id}: end before start")


@dataclass(frozen=True, slots=True)
class AnomalyPoint:
    """Zone-resolved anomaly: date plus the calendar hours its bin spans."""

    zone_id: str
    date: date
    hour_lo: int
    hour_hi: int  # inclusive


@dataclass(frozen=True)
class RecallCurve:
    label: str
    offset_hours: int
    points: tuple  # ((R_m, recall), ...) with R ascending


def _bin_hours(bin_of_day: int, bin_minutes: int, coarse: bool) -> tuple[int, int]:
    if coarse:
        hours = COARSE_BIN_HOURS[bin_of_day]
        return hours[0], hours[-1]
    start_min = bin_of_day * bin_minutes
    end_min = start_min + bin_minutes - 1
    return start_min // 60, end_min // 60


def decisions_to_points(
    decisions: Iterable[AnomalyDecision],
    bin_minutes: int,
    stop_zones: Optional[Mapping[str, str]] = None,
    coarse: bool = False,
) -> list[AnomalyPoint]:
    """Project anomalous decisions onto zones and calendar-hour spans.

    BUS decisions carry stop ids and need a stop -> zone mapping; stops
    without one are dropped.
    """
    points = []
    for dec in decisions:
        if not dec.is_anomaly:
            continue
        if dec.key.source is Source.BUS:
            if stop_zones is None:
                raise ConfigError("BUS decisions need stop coordinates mapped to zones")
            zone = stop_zones.get(dec.key.location_id)
            if zone is None:
                continue
        else:
            zone = dec.key.location_id
        lo, hi = _bin_hours(dec.key.bin_of_day, bin_minutes, coarse)
        points.append(AnomalyPoint(zone_id=zone, date=dec.date, hour_lo=lo, hour_hi=hi))
    return points


def fused_to_points(fused: Iterable[FusedDecision], bin_minutes: int) -> list[AnomalyPoint]:
    return [
        AnomalyPoint(
            zone_id=f.location_id,
            date=f.date,
            hour_lo=(f.bin_of_day * bin_minutes) // 60,
            hour_hi=(f.bin_of_day * bin_minutes + bin_minutes - 1) // 60,
        )
        for f in fused
        if f.is_anomaly
    ]


def event_recalled(
    event: GroundTruthEvent,
    points: Sequence[AnomalyPoint],
    zones: ZoneSet,
    radius_m: float,
    offset_hours: int = 0,
) -> bool:
    """True iff an anomaly covers the event's target hour within R meters.

    The target hour is the calendar hour containing start + offset_hours;
    distance is venue to zone centroid, boundary inclusive.
    """
    target = event.start + timedelta(hours=offset_hours)
    target_date = target.date()
    target_hour = target.hour
    for pt in points:
        if pt.date != target_date or not (pt.hour_lo <= target_hour <= pt.hour_hi):
            continue
        if pt.zone_id not in zones:
            continue
        centroid = zones.centroid_of(pt.zone_id)
        if haversine_m(centroid, event.venue) <= radius_m:
            return True
    return False


def eligible_events(
    events: Sequence[GroundTruthEvent],
    period: Optional[tuple[date, date]],
) -> tuple[list[GroundTruthEvent], list[GroundTruthEvent]]:
    """Split events into (eligible, excluded) by the observation period."""
    if period is None:
        return list(events), []
    lo, hi = period
    eligible, excluded = [], []
    for ev in events:
        (eligible if lo <= ev.start.date() <= hi else excluded).append(ev)
    return eligible, excluded


def recall_curve(
    events: Sequence[GroundTruthEvent],
    points: Sequence[AnomalyPoint],
    zones: ZoneSet,
    r_grid: Sequence[float] = DEFAULT_R_GRID,
    offset_hours: int = 0,
    label: str = "",
    period: Optional[tuple[date, date]] = None,
) -> RecallCurve:
    """Recall as a function of the localization radius R."""
    kept, _ = eligible_events(events, period)
    if not kept:
        raise ValueError("no eligible events in the observation period")
    r_grid = sorted(r_grid)
    # per event, the smallest radius at which it is recalled; inf if never
    min_radius = []
    for ev in kept:
        target = ev.start + timedelta(hours=offset_hours)
        best = math.inf
        for pt in points:
            if pt.date != target.date() or not (pt.hour_lo <= target.hour <= pt.hour_hi):
                continue
            if pt.zone_id not in zones:
                continue
            d = haversine_m(zones.centroid_of(pt.zone_id), ev.venue)
            if d < best:
                best = d
        min_radius.append(best)
    pts = tuple(
        (float(r), sum(1 for m in min_radius if m <= r) / len(kept)) for r in r_grid
    )
    return RecallCurve(label=label, offset_hours=offset_hours, points=pts)


@dataclass(frozen=True, slots=True)
class SweepCell:
    method: str
    r_m: float
    s: float
    recall: float


def sweep(
    events: Sequence[GroundTruthEvent],
    table: AlignedTable,
    zones: ZoneSet,
    r_values: Sequence[float],
    s_values: Sequence[float],
    policies: Mapping[str, Callable[[float], FusionPolicy]],
    offset_hours: int = 0,
    period: Optional[tuple[date, date]] = None,
) -> list[SweepCell]:
    """Recall grid over (R, S) per labeled fusion policy.

    ``policies`` maps a label to a callable producing a FusionPolicy for a
    given S; each grid cell re-runs fusion at that S and scores recall.
    """
    kept, _ = eligible_events(events, period)
    if not kept:
        raise ValueError("no eligible events in the observation period")
    cells = []
    for label in sorted(policies):
        make_policy = policies[label]
        for s in s_values:
            fused = fuse(table, make_policy(float(s)))
            points = fused_to_points(fused, table.bin_minutes)
            curve = recall_curve(
                kept, points, zones, r_grid=r_values, offset_hours=offset_hours, label=label
            )
            for r, rec in curve.points:
                cells.append(SweepCell(method=label, r_m=r, s=float(s), recall=rec))
    return cells
