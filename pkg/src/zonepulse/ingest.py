"""Raw record parsing and occupancy aggregation.

Four record schemas (CDR, bus arrival, taxi trip, venue check-in) are parsed
from CSV, validated row by row, and aggregated into per-(source, location,
bin-of-day, daytype) occupancy series. Invalid rows are rejected and counted,
never silently dropped.
"""
from __future__ import annotations

import csv
import io
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta
from enum import Enum
from typing import IO, Iterable, Optional, Sequence

import numpy as np

from .errors import ConfigError, HeaderError
from .geo import GeoPoint, ZoneSet


class Source(str, Enum):
    CDR = "CDR"
    BUS = "BUS"
    TAXI_PICKUP = "TAXI_PICKUP"
    TAXI_DROPOFF = "TAXI_DROPOFF"
    CHECKIN = "CHECKIN"


class Daytype(str, Enum):
    WEEKDAY = "WEEKDAY"
    WEEKEND = "WEEKEND"


#: sources whose occupancy is a count (missing bins mean zero activity);
#: BUS is a mean of observed loading levels, so its gaps stay missing
COUNT_SOURCES = frozenset(
    {Source.CDR, Source.TAXI_PICKUP, Source.TAXI_DROPOFF, Source.CHECKIN}
)

#: coarse multi-hour bins: start hour of each member hour -> bin index
COARSE_BIN_LABELS = ("00:00-06:00", "AM-Peak", "Off-Peak", "PM-Peak", "21:00-23:00")
COARSE_BIN_HOURS = (
    tuple(range(0, 7)),
    tuple(range(7, 11)),
    tuple(range(11, 18)),
    tuple(range(18, 21)),
    tuple(range(21, 24)),
)
_HOUR_TO_COARSE = {h: bi for bi, hours in enumerate(COARSE_BIN_HOURS) for h in hours}


def daytype_of(d: date) -> Daytype:
    return Daytype.WEEKEND if d.weekday() >= 5 else Daytype.WEEKDAY


@dataclass(frozen=True, slots=True)
class SeriesKey:
    source: Source
    location_id: str
    bin_of_day: int
    daytype: Daytype


@dataclass(slots=True)
class OccupancySeries:
    key: SeriesKey
    samples: list  # ordered (date, float) pairs, dates strictly increasing

    def dates(self) -> list[date]:
        return [d for d, _ in self.samples]

    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.samples], dtype=np.float64)


@dataclass(frozen=True, slots=True)
class CdrRecord:
    zone_id: str
    timestamp: datetime
    visitors: int


@dataclass(frozen=True, slots=True)
class BusArrivalRecord:
    bus_stop_id: str
    service_id: str
    timestamp: datetime
    loading: int


@dataclass(frozen=True, slots=True)
class TaxiTripRecord:
    pickup: GeoPoint
    pickup_ts: datetime
    dropoff: GeoPoint
    dropoff_ts: datetime


@dataclass(frozen=True, slots=True)
class CheckinRecord:
    venue_id: str
    timestamp: datetime
    location: GeoPoint
    category: str
    user_id: Optional[str]


SCHEMAS = {
    Source.CDR: ["zone_id", "timestamp", "visitors"],
    Source.BUS: ["bus_stop_id", "service_id", "timestamp", "loading"],
    Source.TAXI_PICKUP: [
        "pickup_lon", "pickup_lat", "pickup_ts",
        "dropoff_lon", "dropoff_lat", "dropoff_ts",
    ],
    Source.CHECKIN: ["venue_id", "timestamp", "lat", "lon", "category", "user_id"],
}
SCHEMAS[Source.TAXI_DROPOFF] = SCHEMAS[Source.TAXI_PICKUP]


@dataclass
class RejectionReport:
    """Per-file parse outcome; every rejected row is recorded with its line."""

    source: Source
    accepted: int = 0
    rejected: list = field(default_factory=list)  # (line_no, reason)

    @property
    def n_rejected(self) -> int:
        return len(self.rejected)

    def reject(self, line_no: int, reason: str) -> None:
        self.rejected.append((line_no, reason))

    def as_dict(self) -> dict:
        return {
            "source": self.source.value,
            "accepted": self.accepted,
            "rejected": self.n_rejected,
            "rows": [{"line": ln, "reason": r} for ln, r in self.rejected],
        }


def _parse_ts(text: str) -> datetime:
    # ISO-8601 local time, no offset
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is not None:
        raise ValueError("timestamp must be local time without offset")
    return ts


def _parse_cdr_row(row: Sequence[str]) -> CdrRecord:
    zone_id, ts_text, visitors_text = row
    if not zone_id:
        raise ValueError("empty zone_id")
    ts = _parse_ts(ts_text)
    if ts.minute or ts.second or ts.microsecond:
        raise ValueError("CDR timestamp not hour-aligned")
    visitors = int(visitors_text)
    if visitors < 0:
        raise ValueError("negative visitors")
    return CdrRecord(zone_id, ts, visitors)


def _parse_bus_row(row: Sequence[str]) -> BusArrivalRecord:
    stop, service, ts_text, loading_text = row
    if not stop or not service:
        raise ValueError("empty bus_stop_id or service_id")
    loading = int(loading_text)
    if loading not in (1, 2, 3):
        raise ValueError(f"loading {loading} outside 1..3")
    return BusArrivalRecord(stop, service, _parse_ts(ts_text), loading)


def _parse_taxi_row(row: Sequence[str]) -> TaxiTripRecord:
    plon, plat, pts, dlon, dlat, dts = row
    pickup = GeoPoint(float(plon), float(plat))
    dropoff = GeoPoint(float(dlon), float(dlat))
    pickup_ts = _parse_ts(pts)
    dropoff_ts = _parse_ts(dts)
    if dropoff_ts < pickup_ts:
        raise ValueError("dropoff_ts before pickup_ts")
    return TaxiTripRecord(pickup, pickup_ts, dropoff, dropoff_ts)


def _parse_checkin_row(row: Sequence[str]) -> CheckinRecord:
    venue_id, ts_text, lat, lon, category, user_id = row
    if not venue_id:
        raise ValueError("empty venue_id")
    if not category:
        raise ValueError("empty category")
    return CheckinRecord(
        venue_id,
        _parse_ts(ts_text),
        GeoPoint(float(lon), float(lat)),
        category,
        user_id or None,
    )


_ROW_PARSERS = {
    Source.CDR: _parse_cdr_row,
    Source.BUS: _parse_bus_row,
    Source.TAXI_PICKUP: _parse_taxi_row,
    Source.TAXI_DROPOFF: _parse_taxi_row,
    Source.CHECKIN: _parse_checkin_row,
}


def parse_source(source: Source, stream: IO) -> tuple[list, RejectionReport]:
    """Parse one CSV stream into typed records plus a rejection report.

    A missing or mismatched header is fatal; per-row violations reject the
    row (with its line number) and parsing continues.
    """
    if isinstance(stream, (bytes, bytearray)):
        stream = io.StringIO(stream.decode("utf-8"))
    elif isinstance(stream, str):
        stream = io.StringIO(stream)
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise HeaderError(f"{source.value}: empty file, header row required")
    expected = SCHEMAS[source]
    if [h.strip() for h in header] != expected:
        raise HeaderError(
            f"{source.value}: header {header!r} does not match schema {expected!r}"
        )
    parse_row = _ROW_PARSERS[source]
    records = []
    report = RejectionReport(source=source)
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(expected):
            report.reject(line_no, f"expected {len(expected)} fields, got {len(row)}")
            continue
        try:
            records.append(parse_row(row))
        except (ValueError, TypeError) as e:
            report.reject(line_no, str(e))
            continue
    report.accepted = len(records)
    return records, report


@dataclass
class OccupancyReport:
    """Aggregation-side accounting (out-of-zone points, definitions used)."""

    source: Source
    n_records: int = 0
    n_out_of_zone: int = 0
    n_unknown_location: int = 0
    checkin_definition: Optional[str] = None  # "unique_users" or "record_count"
    holiday_dates_seen: list = field(default_factory=list)

    def as_dict(self) -> dict:
        d = {
            "source": self.source.value,
            "n_records": self.n_records,
            "n_out_of_zone": self.n_out_of_zone,
            "n_unknown_location": self.n_unknown_location,
        }
        if self.checkin_definition:
            d["checkin_definition"] = self.checkin_definition
        if self.holiday_dates_seen:
            d["holiday_dates_seen"] = [d_.isoformat() for d_ in self.holiday_dates_seen]
        return d


def bins_per_day(bin_minutes: int) -> int:
    if bin_minutes <= 0 or 1440 % bin_minutes:
        raise ConfigError(f"bin width {bin_minutes} does not divide 1440 minutes")
    return 1440 // bin_minutes


def bin_of(ts: datetime, bin_minutes: int) -> int:
    return (ts.hour * 60 + ts.minute) // bin_minutes


def _date_span(dates: Iterable[date]) -> list[date]:
    dates = sorted(set(dates))
    if not dates:
        return []
    lo, hi = dates[0], dates[-1]
    return [lo + timedelta(days=i) for i in range((hi - lo).days + 1)]


def compute_occupancy(
    source: Source,
    records: list,
    zones: Optional[ZoneSet] = None,
    bin_minutes: int = 60,
    holidays: Sequence[date] = (),
    date_range: Optional[tuple[date, date]] = None,
) -> tuple[dict[SeriesKey, OccupancySeries], OccupancyReport]:
    """Aggregate typed records into occupancy series per series key.

    CDR sums visitors per zone-hour, BUS averages loading per stop-bin, the
    taxi channels count trips whose endpoint maps into a zone, CHECKIN counts
    distinct users per zone-bin. Count sources fill absent bins with zero
    over the full (location x date-span x bin) domain; BUS gaps stay missing.
    """
    nbins = bins_per_day(bin_minutes)
    if source is Source.CDR and bin_minutes != 60:
        raise ConfigError("CDR occupancy requires 60-minute bins (hourly source)")
    if source in (Source.TAXI_PICKUP, Source.TAXI_DROPOFF, Source.CHECKIN) and zones is None:
        raise ConfigError(f"{source.value} occupancy requires a loaded ZoneSet")

    report = OccupancyReport(source=source, n_records=len(records))
    holidays = set(holidays)

    # cell accumulator: (location_id, date, bin) -> payload
    cells: dict = defaultdict(list)

    if source is Source.CDR:
        for r in records:
            if zones is not None and r.zone_id not in zones:
                report.n_unknown_location += 1
                continue
            d = r.timestamp.date()
            cells[(r.zone_id, d, bin_of(r.timestamp, bin_minutes))].append(r.visitors)
        reduce = lambda payload: float(sum(payload))
    elif source is Source.BUS:
        for r in records:
            d = r.timestamp.date()
            cells[(r.bus_stop_id, d, bin_of(r.timestamp, bin_minutes))].append(r.loading)
        reduce = lambda payload: float(np.mean(payload))
    elif source in (Source.TAXI_PICKUP, Source.TAXI_DROPOFF):
        if records:
            pick = source is Source.TAXI_PICKUP
            lons = np.array(
                [(r.pickup.lon if pick else r.dropoff.lon) for r in records]
            )
            lats = np.array(
                [(r.pickup.lat if pick else r.dropoff.lat) for r in records]
            )
            idx = zones.assign_points(lons, lats)
            for r, zi in zip(records, idx):
                if zi < 0:
                    report.n_out_of_zone += 1
                    continue
                ts = r.pickup_ts if pick else r.dropoff_ts
                zone_id = zones.zone_at(int(zi)).zone_id
                cells[(zone_id, ts.date(), bin_of(ts, bin_minutes))].append(1)
        reduce = lambda payload: float(len(payload))
    elif source is Source.CHECKIN:
        any_user = any(r.user_id for r in records)
        report.checkin_definition = "unique_users" if any_user else "record_count"
        if records:
            lons = np.array([r.location.lon for r in records])
            lats = np.array([r.location.lat for r in records])
            idx = zones.assign_points(lons, lats)
            for r, zi in zip(records, idx):
                if zi < 0:
                    report.n_out_of_zone += 1
                    continue
                zone_id = zones.zone_at(int(zi)).zone_id
                cells[(zone_id, r.timestamp.date(), bin_of(r.timestamp, bin_minutes))].append(
                    r.user_id
                )

        def reduce(payload):
            # distinct users; records without a user_id each count once
            named = {u for u in payload if u}
            anonymous = sum(1 for u in payload if not u)
            return float(len(named) + anonymous)
    else:  # pragma: no cover
        raise ConfigError(f"unknown source {source}")

    observed_dates = {d for (_, d, _) in cells}
    report.holiday_dates_seen = sorted(observed_dates & holidays)

    if date_range is not None:
        lo, hi = date_range
        span = [lo + timedelta(days=i) for i in range((hi - lo).days + 1)]
    else:
        span = _date_span(observed_dates)

    if source in COUNT_SOURCES:
        if zones is not None:
            locations = list(zones.ids)
        else:
            locations = sorted({loc for (loc, _, _) in cells})
        sample_map: dict[SeriesKey, dict[date, float]] = defaultdict(dict)
        for loc in locations:
            for d in span:
                dt = daytype_of(d)
                for b in range(nbins):
                    payload = cells.get((loc, d, b))
                    value = reduce(payload) if payload else 0.0
                    sample_map[SeriesKey(source, loc, b, dt)][d] = value
        # count any cell outside the fill domain too (date_range narrower than data)
        for (loc, d, b), payload in cells.items():
            key = SeriesKey(source, loc, b, daytype_of(d))
            if d not in sample_map.get(key, {}):
                sample_map[key][d] = reduce(payload)
    else:
        sample_map = defaultdict(dict)
        for (loc, d, b), payload in sorted(cells.items()):
            sample_map[SeriesKey(source, loc, b, daytype_of(d))][d] = reduce(payload)

    series = {
        key: OccupancySeries(key=key, samples=sorted(dated.items()))
        for key, dated in sample_map.items()
    }
    return series, report


def coarse_rebin(
    series_map: dict[SeriesKey, OccupancySeries]
) -> dict[SeriesKey, OccupancySeries]:
    """Rebin hourly series into the 5 named multi-hour bins (values summed).

    Input must be hourly (bin_of_day < 24 for every key); hours are assigned
    to coarse bins by their start hour. Output keys use bin_of_day 0..4 in
    the order of COARSE_BIN_LABELS.
    """
    grouped: dict = defaultdict(lambda: defaultdict(float))
    for key, series in series_map.items():
        if key.bin_of_day >= 24:
            raise ConfigError(
                f"coarse_rebin expects hourly input, got bin_of_day={key.bin_of_day}"
            )
        coarse_bin = _HOUR_TO_COARSE[key.bin_of_day]
        out_key = SeriesKey(key.source, key.location_id, coarse_bin, key.daytype)
        for d, v in series.samples:
            grouped[out_key][d] += v
    return {
        key: OccupancySeries(key=key, samples=sorted(dated.items()))
        for key, dated in grouped.items()
    }
