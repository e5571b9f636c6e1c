"""Seeded synthetic-city generator.

Produces raw records in all four ingest schemas plus ground-truth events,
zone polygons, geotagged messages, and a manifest. Baselines are Poisson
with a diurnal profile; each event injects extra records whose timestamps
follow a triangular arrival ramp over [start - lead, start] (density highest
when the ramp opens, tapering to zero at the start time) and whose locations
scatter around the venue with exponential decay. Randomness is drawn from
per-(seed, source, zone, day) streams, so regeneration is byte-identical
and order-independent.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, asdict
from datetime import date, datetime, time, timedelta
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError
from .evaluate import EventScale
from .geo import EARTH_RADIUS_M, GeoPoint, load_zones
from .ingest import Source

M_PER_DEG_LAT = EARTH_RADIUS_M * math.pi / 180.0

#: attendance is split across these channels; BUS couples via demand, not records
ATTENDED_SOURCES = (Source.CDR, Source.TAXI_DROPOFF, Source.CHECKIN)

BASE_CATEGORIES = ("food court", "mall", "park", "museum", "office", "hotel")
BASE_PHRASES = (
    "morning commute",
    "lunch break downtown",
    "coffee run #nofilter",
    "evening walk in the park",
    "traffic again #commute",
    "weekend vibes",
    "good food here",
    "meeting friends later",
)
EVENT_PHRASES = (
    "can't wait #{tag}",
    "queueing up #{tag}",
    "amazing crowd tonight #{tag}",
    "so hyped for this #{tag}",
    "finally here #{tag}",
)


@dataclass(frozen=True)
class EventSpec:
    event_id: str
    name: str
    venue_zone: str
    start: datetime
    duration_minutes: int
    attendance: int
    scale: EventScale
    lead_minutes: Mapping[str, int]  # source value -> ramp length in minutes
    spatial_decay_m: float
    hashtag: str
    venue_offset_m: tuple = (0.0, 0.0)  # east/north displacement from the zone centroid

    def lead_for(self, source: Source) -> int:
        return int(self.lead_minutes.get(source.value, 60))


@dataclass(frozen=True)
class SimConfig:
    seed: int
    start_date: date
    days: int
    grid_rows: int = 5
    grid_cols: int = 5
    zone_edge_m: float = 600.0
    origin_lon: float = 103.82
    origin_lat: float = 1.26
    bin_minutes: int = 15
    diurnal: tuple = (
        0.30, 0.20, 0.15, 0.15, 0.20, 0.30, 0.50, 0.80, 1.00, 0.90, 0.80, 0.90,
        1.00, 0.90, 0.80, 0.80, 0.90, 1.10, 1.20, 1.10, 0.90, 0.70, 0.50, 0.40,
    )
    cdr_rate: float = 60.0  # mean visitors per zone-hour at profile 1.0
    taxi_rate: float = 2.2  # mean trips per zone-bin
    checkin_rate: float = 1.4
    message_rate: float = 1.0
    bus_demand_rate: float = 4.0
    noise: float = 0.0  # lognormal dispersion of baseline intensities
    events: tuple = ()
    shares: Mapping[str, float] = field(
        default_factory=lambda: {"CDR": 0.5, "TAXI_DROPOFF": 0.3, "CHECKIN": 0.2}
    )
    day_factors: Mapping[str, float] = field(default_factory=dict)  # ISO date -> scale
    stops_per_zone: int = 2
    services_per_stop: int = 2
    bus_headway_minutes: int = 20
    bus_event_boost: float = 3.0
    user_pool: int = 50_000
    venues_per_zone: int = 4
    event_message_factor: float = 0.15

    def validate(self) -> None:
        problems = []
        if self.days < 1:
            problems.append(f"days={self.days}")
        if self.grid_rows < 1 or self.grid_cols < 1:
            problems.append(f"grid={self.grid_rows}x{self.grid_cols}")
        if self.zone_edge_m <= 0:
            problems.append(f"zone_edge_m={self.zone_edge_m}")
        if 60 % self.bin_minutes:
            problems.append(f"bin_minutes={self.bin_minutes} (must divide 60)")
        if len(self.diurnal) != 24 or any(v < 0 for v in self.diurnal):
            problems.append("diurnal (needs 24 non-negative values)")
        for name in ("cdr_rate", "taxi_rate", "checkin_rate", "message_rate", "bus_demand_rate"):
            if getattr(self, name) < 0:
                problems.append(f"{name}={getattr(self, name)}")
        if self.noise < 0:
            problems.append(f"noise={self.noise}")
        share_vals = [self.shares.get(s.value, 0.0) for s in ATTENDED_SOURCES]
        if any(v < 0 for v in share_vals) or abs(sum(share_vals) - 1.0) > 1e-9:
            problems.append(f"shares={dict(self.shares)}")
        zone_ids = set(self.zone_ids())
        end = self.start_date + timedelta(days=self.days - 1)
        for ev in self.events:
            if ev.attendance < 0:
                problems.append(f"{ev.event_id}.attendance={ev.attendance}")
            if ev.spatial_decay_m <= 0:
                problems.append(f"{ev.event_id}.spatial_decay_m={ev.spatial_decay_m}")
            if any(v < 0 for v in ev.lead_minutes.values()):
                problems.append(f"{ev.event_id}.lead_minutes={dict(ev.lead_minutes)}")
            if ev.venue_zone not in zone_ids:
                problems.append(f"{ev.event_id}.venue_zone={ev.venue_zone}")
            if not self.start_date <= ev.start.date() <= end:
                problems.append(f"{ev.event_id}.start={ev.start.isoformat()}")
            if ev.duration_minutes <= 0:
                problems.append(f"{ev.event_id}.duration_minutes={ev.duration_minutes}")
        if problems:
            raise ConfigError("invalid simulator config: " + ", ".join(problems))

    def zone_ids(self) -> list[str]:
        return [
            f"Z{r:02d}{c:02d}" for r in range(self.grid_rows) for c in range(self.grid_cols)
        ]

    def dates(self) -> list[date]:
        return [self.start_date + timedelta(days=i) for i in range(self.days)]

    def day_factor(self, d: date) -> float:
        return float(self.day_factors.get(d.isoformat(), 1.0))

    def config_sha256(self) -> str:
        def default(o):
            if isinstance(o, (date, datetime)):
                return o.isoformat()
            if isinstance(o, EventScale):
                return o.value
            raise TypeError(f"unserializable {type(o)}")

        blob = json.dumps(asdict(self), sort_keys=True, default=default)
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass
class SimOutput:
    out_dir: Path
    files: dict
    manifest: dict
    attribution: dict  # event_id -> {source value: extra record count}


def _rng(seed: int, *parts) -> np.random.Generator:
    digest = hashlib.sha256("|".join(str(p) for p in parts).encode()).digest()
    words = np.frombuffer(digest[:16], dtype=np.uint32)
    return np.random.default_rng(np.random.SeedSequence([int(seed)] + words.tolist()))


def _split_counts(total: int, shares: Sequence[float]) -> list[int]:
    """Integer split proportional to shares, exactly conserving the total."""
    raw = [total * s for s in shares]
    counts = [int(math.floor(v)) for v in raw]
    remainder = total - sum(counts)
    order = sorted(range(len(raw)), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in order[:remainder]:
        counts[i] += 1
    return counts


def _ts(d: date, minutes: float) -> datetime:
    return datetime.combine(d, time()) + timedelta(minutes=float(minutes))


def _fmt_ts(ts: datetime) -> str:
    return ts.isoformat(timespec="seconds")


class _CityGrid:
    """Zone geometry helpers shared by all generators."""

    def __init__(self, config: SimConfig):
        self.config = config
        self.dlat = config.zone_edge_m / M_PER_DEG_LAT
        self.dlon = config.zone_edge_m / (M_PER_DEG_LAT * math.cos(math.radians(config.origin_lat)))
        self.zone_ids = config.zone_ids()
        self.geojson = self._build_geojson()
        self.zones = load_zones(json.dumps(self.geojson))
        self.lon_min = config.origin_lon
        self.lat_min = config.origin_lat
        self.lon_max = config.origin_lon + config.grid_cols * self.dlon
        self.lat_max = config.origin_lat + config.grid_rows * self.dlat

    def _build_geojson(self) -> dict:
        features = []
        cfg = self.config
        for r in range(cfg.grid_rows):
            for c in range(cfg.grid_cols):
                lon0 = cfg.origin_lon + c * self.dlon
                lat0 = cfg.origin_lat + r * self.dlat
                ring = [
                    [lon0, lat0],
                    [lon0 + self.dlon, lat0],
                    [lon0 + self.dlon, lat0 + self.dlat],
                    [lon0, lat0 + self.dlat],
                    [lon0, lat0],
                ]
                features.append(
                    {
                        "type": "Feature",
                        "properties": {"zone_id": f"Z{r:02d}{c:02d}"},
                        "geometry": {"type": "Polygon", "coordinates": [ring]},
                    }
                )
        return {"type": "FeatureCollection", "features": features}

    def zone_box(self, zone_id: str) -> tuple[float, float, float, float]:
        z = self.zones.get(zone_id)
        return z.bbox

    def centroid(self, zone_id: str):
        return self.zones.centroid_of(zone_id)

    def venue_point(self, ev: "EventSpec") -> GeoPoint:
        c = self.centroid(ev.venue_zone)
        dx, dy = ev.venue_offset_m
        lon = c.lon + dx / (M_PER_DEG_LAT * math.cos(math.radians(c.lat)))
        lat = c.lat + dy / M_PER_DEG_LAT
        return GeoPoint(lon, lat)

    def uniform_points(self, rng, zone_id: str, n: int) -> np.ndarray:
        x0, y0, x1, y1 = self.zone_box(zone_id)
        pts = np.empty((n, 2))
        pts[:, 0] = rng.uniform(x0, x1, n)
        pts[:, 1] = rng.uniform(y0, y1, n)
        return pts

    def scatter_around(self, rng, lon: float, lat: float, decay_m: float, n: int) -> np.ndarray:
        """Exponential radial scatter, rejected into the grid bounding box."""
        out = np.empty((n, 2))
        filled = 0
        attempts = 0
        while filled < n:
            m = max(16, 2 * (n - filled))
            r = rng.exponential(decay_m, m)
            theta = rng.uniform(0.0, 2.0 * math.pi, m)
            lons = lon + (r * np.cos(theta)) / (M_PER_DEG_LAT * math.cos(math.radians(lat)))
            lats = lat + (r * np.sin(theta)) / M_PER_DEG_LAT
            ok = (
                (lons >= self.lon_min) & (lons <= self.lon_max)
                & (lats >= self.lat_min) & (lats <= self.lat_max)
            )
            take = min(int(ok.sum()), n - filled)
            out[filled : filled + take, 0] = lons[ok][:take]
            out[filled : filled + take, 1] = lats[ok][:take]
            filled += take
            attempts += 1
            if attempts > 100:  # pathological decay vs. grid size; pin to the venue
                out[filled:, 0] = lon
                out[filled:, 1] = lat
                break
        return out


def _ramp_minutes_before_start(rng, n: int, lead: int) -> np.ndarray:
    """Offsets (minutes before start) under the falling triangular ramp."""
    if lead == 0:
        return np.zeros(n)
    # density peaks at the ramp opening (start - lead) and hits zero at start
    return lead * np.sqrt(rng.random(n))


@dataclass
class _EventExtras:
    cdr: dict = field(default_factory=dict)  # (zone_id, date, hour) -> visitors
    taxi_rows: list = field(default_factory=list)
    checkin_rows: list = field(default_factory=list)
    message_rows: list = field(default_factory=list)
    attribution: dict = field(default_factory=dict)


def _event_extras(config: SimConfig, grid: _CityGrid) -> _EventExtras:
    ex = _EventExtras()
    for ev in config.events:
        venue = grid.venue_point(ev)
        shares = [config.shares.get(s.value, 0.0) for s in ATTENDED_SOURCES]
        counts = _split_counts(ev.attendance, shares)
        ex.attribution[ev.event_id] = {
            s.value: c for s, c in zip(ATTENDED_SOURCES, counts)
        }
        for source, count in zip(ATTENDED_SOURCES, counts):
            if count == 0:
                continue
            rng = _rng(config.seed, "event", ev.event_id, source.value)
            lead = ev.lead_for(source)
            before = _ramp_minutes_before_start(rng, count, lead)
            times = [ev.start - timedelta(minutes=float(b)) for b in before]
            pts = grid.scatter_around(rng, venue.lon, venue.lat, ev.spatial_decay_m, count)
            if source is Source.CDR:
                zi = grid.zones.assign_points(pts[:, 0], pts[:, 1])
                for ts, z in zip(times, zi):
                    if z < 0:  # cannot happen after bbox rejection, kept as a guard
                        continue
                    key = (grid.zones.zone_at(int(z)).zone_id, ts.date(), ts.hour)
                    ex.cdr[key] = ex.cdr.get(key, 0) + 1
            elif source is Source.TAXI_DROPOFF:
                n_zones = len(grid.zone_ids)
                for i, ts in enumerate(times):
                    origin = grid.zone_ids[int(rng.integers(n_zones))]
                    opts = grid.uniform_points(rng, origin, 1)[0]
                    ride_min = float(rng.uniform(5.0, 25.0))
                    pickup_ts = ts - timedelta(minutes=ride_min)
                    ex.taxi_rows.append(
                        (
                            repr(float(opts[0])), repr(float(opts[1])), _fmt_ts(pickup_ts),
                            repr(float(pts[i, 0])), repr(float(pts[i, 1])), _fmt_ts(ts),
                        )
                    )
            elif source is Source.CHECKIN:
                for i, ts in enumerate(times):
                    ex.checkin_rows.append(
                        (
                            f"V-EVENT-{ev.event_id}",
                            _fmt_ts(ts),
                            repr(float(pts[i, 1])),
                            repr(float(pts[i, 0])),
                            "stadium",
                            f"e{ev.event_id}-{i:05d}",
                        )
                    )
        # geotagged chatter around the venue, before and during the event
        n_msgs = int(round(ev.attendance * config.event_message_factor))
        if n_msgs:
            rng = _rng(config.seed, "event", ev.event_id, "messages")
            lead = max(ev.lead_for(s) for s in ATTENDED_SOURCES)
            span_lo = ev.start - timedelta(minutes=lead)
            span = (ev.start + timedelta(minutes=ev.duration_minutes)) - span_lo
            offs = rng.random(n_msgs) * (span.total_seconds() / 60.0)
            pts = grid.scatter_around(rng, venue.lon, venue.lat, ev.spatial_decay_m, n_msgs)
            for i in range(n_msgs):
                ts = span_lo + timedelta(minutes=float(offs[i]))
                phrase = EVENT_PHRASES[int(rng.integers(len(EVENT_PHRASES)))]
                ex.message_rows.append(
                    (
                        _fmt_ts(ts),
                        repr(float(pts[i, 1])),
                        repr(float(pts[i, 0])),
                        phrase.format(tag=ev.hashtag),
                    )
                )
    return ex


def _bin_lambda(config: SimConfig, rng, rate: float, d: date, nbins: int) -> np.ndarray:
    """Per-bin Poisson intensity for one zone-day (diurnal x day factor x jitter)."""
    per_hour = np.asarray(config.diurnal)
    bins_per_hour = 60 // config.bin_minutes
    lam = rate * np.repeat(per_hour, bins_per_hour)[:nbins] * config.day_factor(d)
    if config.noise > 0.0:
        g = rng.standard_normal(nbins)
        lam = lam * np.exp(config.noise * g - 0.5 * config.noise**2)
    return lam


def generate(config: SimConfig, out_dir) -> SimOutput:
    """Write the full synthetic dataset for one config; fully deterministic."""
    config.validate()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    grid = _CityGrid(config)
    nbins = 1440 // config.bin_minutes
    extras = _event_extras(config, grid)

    files = {}

    def _write_csv(name: str, header: str, rows) -> None:
        path = out_dir / name
        with open(path, "w", newline="") as fh:
            fh.write(header + "\n")
            for row in rows:
                fh.write(",".join(row) + "\n")
        files[name] = path

    # zones
    zones_path = out_dir / "zones.geojson"
    zones_path.write_text(json.dumps(grid.geojson, sort_keys=True))
    files["zones.geojson"] = zones_path

    dates = config.dates()

    # CDR: hourly visitor counts per zone
    cdr_rows = []
    for zone_id in grid.zone_ids:
        for d in dates:
            rng = _rng(config.seed, "cdr", zone_id, d.isoformat())
            # CDR is hourly regardless of the fine bin width
            per_hour = np.asarray(config.diurnal) * config.cdr_rate * config.day_factor(d)
            if config.noise > 0.0:
                g = rng.standard_normal(24)
                per_hour = per_hour * np.exp(config.noise * g - 0.5 * config.noise**2)
            visits = rng.poisson(per_hour)
            for h in range(24):
                v = int(visits[h]) + extras.cdr.get((zone_id, d, h), 0)
                cdr_rows.append((zone_id, _fmt_ts(datetime.combine(d, time(hour=h))), str(v)))
    _write_csv("cdr.csv", "zone_id,timestamp,visitors", cdr_rows)

    # taxi trips: dropoffs generated in-zone, pickups from a random other zone
    taxi_rows = []
    n_zones = len(grid.zone_ids)
    zone_boxes = np.array([grid.zone_box(z) for z in grid.zone_ids])
    for zone_id in grid.zone_ids:
        for d in dates:
            rng = _rng(config.seed, "taxi", zone_id, d.isoformat())
            lam = _bin_lambda(config, rng, config.taxi_rate, d, nbins)
            counts = rng.poisson(lam)
            n = int(counts.sum())
            if n == 0:
                continue
            bins = np.repeat(np.arange(nbins), counts)
            drops = grid.uniform_points(rng, zone_id, n)
            offs = rng.uniform(0.0, config.bin_minutes, n)
            origins = rng.integers(n_zones, size=n)
            u = rng.random((n, 2))
            boxes = zone_boxes[origins]
            opx = boxes[:, 0] + u[:, 0] * (boxes[:, 2] - boxes[:, 0])
            opy = boxes[:, 1] + u[:, 1] * (boxes[:, 3] - boxes[:, 1])
            ride = rng.uniform(5.0, 25.0, n)
            drop_min = bins * config.bin_minutes + offs
            day0 = datetime.combine(d, time())
            for i in range(n):
                dts = day0 + timedelta(minutes=float(drop_min[i]))
                pts_dt = day0 + timedelta(minutes=float(drop_min[i] - ride[i]))
                taxi_rows.append(
                    (
                        repr(float(opx[i])), repr(float(opy[i])), _fmt_ts(pts_dt),
                        repr(float(drops[i, 0])), repr(float(drops[i, 1])), _fmt_ts(dts),
                    )
                )
    taxi_rows.extend(extras.taxi_rows)
    _write_csv(
        "taxi.csv",
        "pickup_lon,pickup_lat,pickup_ts,dropoff_lon,dropoff_lat,dropoff_ts",
        taxi_rows,
    )

    # check-ins at per-zone venues
    checkin_rows = []
    venue_catalog = {}
    for zone_id in grid.zone_ids:
        vrng = _rng(config.seed, "venues", zone_id)
        pts = grid.uniform_points(vrng, zone_id, config.venues_per_zone)
        venue_catalog[zone_id] = [
            (
                f"V-{zone_id}-{i}",
                float(pts[i, 0]),
                float(pts[i, 1]),
                BASE_CATEGORIES[i % len(BASE_CATEGORIES)],
            )
            for i in range(config.venues_per_zone)
        ]
    for zone_id in grid.zone_ids:
        venues = venue_catalog[zone_id]
        for d in dates:
            rng = _rng(config.seed, "checkin", zone_id, d.isoformat())
            lam = _bin_lambda(config, rng, config.checkin_rate, d, nbins)
            counts = rng.poisson(lam)
            n = int(counts.sum())
            if n == 0:
                continue
            bins = np.repeat(np.arange(nbins), counts)
            offs = rng.uniform(0.0, config.bin_minutes, n)
            vidx = rng.integers(config.venues_per_zone, size=n)
            users = rng.integers(config.user_pool, size=n)
            minute = bins * config.bin_minutes + offs
            day0 = datetime.combine(d, time())
            for i in range(n):
                vid, vlon, vlat, category = venues[int(vidx[i])]
                ts = day0 + timedelta(minutes=float(minute[i]))
                checkin_rows.append(
                    (
                        vid, _fmt_ts(ts), repr(vlat), repr(vlon),
                        category, f"u{int(users[i]):06d}",
                    )
                )
    checkin_rows.extend(extras.checkin_rows)
    _write_csv("checkins.csv", "venue_id,timestamp,lat,lon,category,user_id", checkin_rows)

    # geotagged messages
    message_rows = []
    for zone_id in grid.zone_ids:
        for d in dates:
            rng = _rng(config.seed, "messages", zone_id, d.isoformat())
            lam = _bin_lambda(config, rng, config.message_rate, d, nbins)
            counts = rng.poisson(lam)
            n = int(counts.sum())
            if n == 0:
                continue
            bins = np.repeat(np.arange(nbins), counts)
            pts = grid.uniform_points(rng, zone_id, n)
            offs = rng.uniform(0.0, config.bin_minutes, n)
            phrases = rng.integers(len(BASE_PHRASES), size=n)
            minute = bins * config.bin_minutes + offs
            day0 = datetime.combine(d, time())
            for i in range(n):
                ts = day0 + timedelta(minutes=float(minute[i]))
                message_rows.append(
                    (
                        _fmt_ts(ts), repr(float(pts[i, 1])), repr(float(pts[i, 0])),
                        BASE_PHRASES[int(phrases[i])],
                    )
                )
    message_rows.extend(extras.message_rows)
    _write_csv("messages.csv", "timestamp,lat,lon,text", message_rows)

    # bus stops and arrival loadings
    stops = []
    for zone_id in grid.zone_ids:
        c = grid.centroid(zone_id)
        for si in range(config.stops_per_zone):
            # deterministic offsets keep stops inside the zone
            frac = (si + 1) / (config.stops_per_zone + 1)
            lon = c.lon + (frac - 0.5) * grid.dlon * 0.5
            lat = c.lat + (0.5 - frac) * grid.dlat * 0.5
            stops.append((f"S-{zone_id}-{si}", zone_id, lon, lat))
    _write_csv(
        "stops.csv",
        "bus_stop_id,lat,lon",
        [(sid, repr(lat), repr(lon)) for sid, _, lon, lat in stops],
    )

    events_by_date: dict[date, list[EventSpec]] = {}
    for ev in config.events:
        events_by_date.setdefault(ev.start.date(), []).append(ev)

    t2 = 1.0 * config.bus_demand_rate
    t3 = 2.0 * config.bus_demand_rate
    bus_rows = []
    day_start_min = 5 * 60 + 30
    day_end_min = 23 * 60 + 30
    max_arrivals = int((day_end_min - day_start_min) / config.bus_headway_minutes) + 2
    # demand keeps an off-peak floor so loading levels vary in every bin
    bus_profile = 0.5 + 0.5 * np.asarray(config.diurnal)
    for sid, zone_id, slon, slat in stops:
        for d in dates:
            rng = _rng(config.seed, "bus", sid, d.isoformat())
            day_events = events_by_date.get(d, ())
            day0 = datetime.combine(d, time())
            for svc in range(config.services_per_stop):
                service_id = f"B{svc + 1:02d}"
                first = day_start_min + rng.uniform(0, config.bus_headway_minutes)
                gaps = config.bus_headway_minutes + rng.uniform(0.0, 2.0, max_arrivals)
                t_min = first + np.concatenate([[0.0], np.cumsum(gaps[:-1])])
                t_min = t_min[t_min < day_end_min]
                hours = (t_min // 60).astype(int)
                lam = config.bus_demand_rate * bus_profile[hours] * config.day_factor(d)
                boost = np.zeros(t_min.shape)
                for ev in day_events:
                    lead = ev.lead_for(Source.BUS)
                    if lead <= 0:
                        continue
                    start_min = ev.start.hour * 60 + ev.start.minute
                    in_ramp = (t_min >= start_min - lead) & (t_min < start_min)
                    if not in_ramp.any():
                        continue
                    intensity = (start_min - t_min[in_ramp]) / lead  # 1 at ramp open -> 0
                    venue = grid.venue_point(ev)
                    dx = (slon - venue.lon) * M_PER_DEG_LAT * math.cos(math.radians(slat))
                    dy = (slat - venue.lat) * M_PER_DEG_LAT
                    dist = math.hypot(dx, dy)
                    boost[in_ramp] += (
                        config.bus_event_boost
                        * (ev.attendance / 1000.0)
                        * intensity
                        * math.exp(-dist / ev.spatial_decay_m)
                    )
                demand = rng.poisson(lam * (1.0 + boost))
                loading = 1 + (demand >= t2).astype(int) + (demand >= t3).astype(int)
                for i in range(t_min.size):
                    ts = day0 + timedelta(minutes=float(t_min[i]))
                    bus_rows.append((sid, service_id, _fmt_ts(ts), str(int(loading[i]))))
    _write_csv("bus.csv", "bus_stop_id,service_id,timestamp,loading", bus_rows)

    # ground truth
    event_rows = []
    for ev in sorted(config.events, key=lambda e: e.event_id):
        venue = grid.venue_point(ev)
        end = ev.start + timedelta(minutes=ev.duration_minutes)
        event_rows.append(
            (
                ev.event_id,
                ev.name,
                repr(venue.lat),
                repr(venue.lon),
                _fmt_ts(ev.start),
                _fmt_ts(end),
                ev.scale.value,
            )
        )
    _write_csv("events.csv", "event_id,name,lat,lon,start_ts,end_ts,scale", event_rows)

    manifest = {
        "seed": config.seed,
        "config_sha256": config.config_sha256(),
        "files": sorted(files),
        "event_attribution": extras.attribution,
        "bin_minutes": config.bin_minutes,
        "date_range": [config.start_date.isoformat(), dates[-1].isoformat()],
    }
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    files["manifest.json"] = manifest_path

    return SimOutput(
        out_dir=out_dir, files=files, manifest=manifest, attribution=extras.attribution
    )


def _leads(cdr=60, taxi=45, checkin=60, bus=75) -> dict:
    return {
        "CDR": cdr,
        "TAXI_PICKUP": taxi,
        "TAXI_DROPOFF": taxi,
        "CHECKIN": checkin,
        "BUS": bus,
    }


def scenario_library() -> dict[str, SimConfig]:
    """Named desk-scale scenarios used across the test and demo tooling."""
    start = date(2017, 5, 15)  # a Monday; 49 days ends Sunday 2017-07-02
    days = 49

    def ev(eid, name, zone, when, minutes, attendance, scale, leads, decay, tag,
           offset=(0.0, 0.0)):
        return EventSpec(
            event_id=eid,
            name=name,
            venue_zone=zone,
            start=when,
            duration_minutes=minutes,
            attendance=attendance,
            scale=scale,
            lead_minutes=leads,
            spatial_decay_m=decay,
            hashtag=tag,
            venue_offset_m=offset,
        )

    multi_scale_events = (
        ev("EV1", "Riverside Food Fair", "Z0102", datetime(2017, 6, 1, 12, 30), 150,
           240, EventScale.SMALL, _leads(), 220.0, "riversidefoodfair", (120.0, -90.0)),
        ev("EV2", "Indie Film Night", "Z0300", datetime(2017, 6, 7, 19, 30), 120,
           280, EventScale.SMALL, _leads(), 200.0, "indiefilmnight", (-150.0, 100.0)),
        ev("EV3", "Harbour Jazz Evening", "Z0203", datetime(2017, 6, 9, 18, 30), 150,
           520, EventScale.MEDIUM, _leads(), 260.0, "harbourjazz", (80.0, 140.0)),
        ev("EV4", "City Marathon Expo", "Z0401", datetime(2017, 6, 14, 20, 30), 120,
           560, EventScale.MEDIUM, _leads(), 240.0, "marathonexpo", (-100.0, -120.0)),
        ev("EV5", "Stadium Derby Match", "Z0202", datetime(2017, 6, 16, 19, 30), 180,
           900, EventScale.LARGE, _leads(), 300.0, "stadiumderby", (160.0, 60.0)),
        ev("EV6", "Mega Pop Concert", "Z0104", datetime(2017, 6, 21, 19, 30), 180,
           1000, EventScale.LARGE, _leads(), 280.0, "megapopconcert", (-70.0, 150.0)),
    )

    lead_split_events = tuple(
        ev(
            f"LTS{i}",
            "Evening Night Market",
            "Z0202",
            datetime.combine(d, time(19, 30)),
            120,
            800,
            EventScale.MEDIUM,
            _leads(cdr=45, taxi=15, checkin=60, bus=60),
            200.0,
            "nightmarket",
        )
        for i, d in enumerate(
            [
                date(2017, 6, 5), date(2017, 6, 6), date(2017, 6, 7), date(2017, 6, 8),
                date(2017, 6, 9), date(2017, 6, 12), date(2017, 6, 13), date(2017, 6, 14),
                date(2017, 6, 15), date(2017, 6, 16),
            ]
        )
    )

    return {
        "baseline-quiet": SimConfig(seed=7, start_date=start, days=days),
        "concert-large": SimConfig(
            seed=7,
            start_date=start,
            days=days,
            events=(
                ev("CONCERT", "Mega Pop Concert", "Z0202", datetime(2017, 6, 30, 19, 30),
                   180, 1500, EventScale.LARGE, _leads(), 300.0, "megapopconcert",
                   (140.0, -110.0)),
            ),
        ),
        "multi-scale": SimConfig(seed=7, start_date=start, days=days, events=multi_scale_events),
        "holiday-low": SimConfig(
            seed=7,
            start_date=start,
            days=days,
            day_factors={"2017-06-12": 0.4},
        ),
        "lead-time-split": SimConfig(
            seed=7, start_date=start, days=days, events=lead_split_events
        ),
    }
