"""Read-mostly HTTP API over a loaded pipeline snapshot.

A snapshot is an immutable bundle of zones, scores, decisions, events and
annotation documents. GETs never mutate; toggling sources re-fuses into a
fresh snapshot version behind a non-blocking lock (a concurrent toggle gets
409). Numbers serialize through JSON repr, carrying full double precision.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field, replace
from datetime import date, timedelta
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel

from . import artifacts as art
from . import pipeline
from .annotate import build_docs, tfidf_top_k
from .config import PipelineConfig
from .detect import AnomalyDecision, Detector
from .errors import ConfigError
from .evaluate import decisions_to_points, fused_to_points, recall_curve
from .fuse import AlignedTable, fuse
from .geo import ZoneSet, haversine_m
from .ingest import Source


@dataclass
class Snapshot:
    version: int
    data_dir: Path
    config: PipelineConfig
    zones: ZoneSet
    meta: dict
    scored: list
    decisions: dict  # Detector -> list[AnomalyDecision]
    events: list
    enabled: tuple  # enabled Source members
    aligned: AlignedTable
    _docs: Optional[dict] = None
    _docs_lock: threading.Lock = field(default_factory=threading.Lock)

    def docs(self):
        with self._docs_lock:
            if self._docs is None:
                messages = pipeline.read_messages(self.data_dir)
                with open(self.data_dir / "checkins.csv") as fh:
                    checkins, _ = pipeline.parse_source(Source.CHECKIN, fh)
                self._docs, _ = build_docs(
                    messages, checkins, self.zones, self.config.fine_bin_minutes
                )
            return self._docs


def load_snapshot(data_dir: str | Path, config: PipelineConfig, version: int = 1) -> Snapshot:
    data_dir = Path(data_dir)
    paths = pipeline.artifact_paths(data_dir)
    zones = pipeline.load_zone_set(data_dir)
    meta = art.read_json(paths.meta)
    scored = art.read_scores(paths.scores)
    decisions = {}
    for det in Detector:
        p = paths.decisions(det)
        if p.exists():
            decisions[det] = art.read_decisions(p)
    events_path = data_dir / "events.csv"
    events = art.read_events(events_path) if events_path.exists() else []
    enabled = tuple(s for s in config.enabled_sources() if s.value in meta["sources"])
    aligned = _align(scored, meta, enabled)
    return Snapshot(
        version=version,
        data_dir=data_dir,
        config=config,
        zones=zones,
        meta=meta,
        scored=scored,
        decisions=decisions,
        events=events,
        enabled=enabled,
        aligned=aligned,
    )


def _align(scored, meta, enabled) -> AlignedTable:
    by_source = pipeline._scores_by_source(scored, enabled)
    bin_minutes = {s: meta["sources"][s.value]["bin_minutes"] for s in enabled}
    return pipeline.align_to_zones(by_source, bin_minutes, stop_zones=meta.get("stop_zones"))


class SourcesBody(BaseModel):
    enabled: list[str]


class SnapshotStore:
    def __init__(self, snapshot: Snapshot):
        self._snapshot = snapshot
        self._write_lock = threading.Lock()

    @property
    def snapshot(self) -> Snapshot:
        return self._snapshot

    def refuse_sources(self, enabled_values: list[str]) -> Snapshot:
        """Rebuild the fusion grid for a new enabled-source set (new version)."""
        if not self._write_lock.acquire(blocking=False):
            raise HTTPException(status_code=409, detail="re-fusion already in progress")
        try:
            snap = self._snapshot
            try:
                enabled = tuple(Source(v) for v in enabled_values)
            except ValueError as e:
                raise HTTPException(status_code=400, detail=str(e))
            known = set(snap.meta["sources"])
            missing = [s.value for s in enabled if s.value not in known]
            if not enabled or missing:
                raise HTTPException(
                    status_code=400,
                    detail=f"enabled sources must be a non-empty subset of {sorted(known)}",
                )
            aligned = _align(snap.scored, snap.meta, enabled)
            new = replace(
                snap,
                version=snap.version + 1,
                enabled=enabled,
                aligned=aligned,
                _docs=snap._docs,
                _docs_lock=snap._docs_lock,
            )
            self._snapshot = new
            return new
        finally:
            self._write_lock.release()


def _parse_date(text: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise HTTPException(status_code=400, detail=f"malformed date {text!r}")


def _detector(name: str) -> Detector:
    try:
        return Detector(name.upper())
    except ValueError:
        raise HTTPException(status_code=400, detail=f"unknown detector {name!r}")


def _parse_weights(text: Optional[str]) -> Optional[dict]:
    """``CDR:0.8,CHECKIN:0.1,TAXI_DROPOFF:0.1`` -> mapping, or None."""
    if text is None:
        return None
    out = {}
    try:
        for part in text.split(","):
            name, value = part.split(":")
            out[Source(name.strip()).value] = float(value)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=f"malformed weights {text!r}: {e}")
    return out


def _date_in_range(snap: Snapshot, d: date) -> bool:
    lo, hi = snap.meta["date_range"]
    return date.fromisoformat(lo) <= d <= date.fromisoformat(hi)


def create_app(store: SnapshotStore) -> FastAPI:
    app = FastAPI(title="zonepulse", docs_url=None, redoc_url=None)

    @app.get("/zones")
    def zones():
        return store.snapshot.zones.to_geojson()

    @app.get("/meta")
    def meta():
        snap = store.snapshot
        return {
            "version": snap.version,
            "enabled_sources": [s.value for s in snap.enabled],
            "available_sources": sorted(snap.meta["sources"]),
            "detectors": sorted(d.value for d in snap.decisions),
            "date_range": snap.meta["date_range"],
            "bin_minutes": {
                s: m["bin_minutes"] for s, m in snap.meta["sources"].items()
            },
            "n_events": len(snap.events),
        }

    @app.get("/anomalies")
    def anomalies(
        source: Optional[str] = None,
        date_: Optional[str] = Query(default=None, alias="date"),
        detector: str = "zscore",
    ):
        snap = store.snapshot
        det = _detector(detector)
        if det not in snap.decisions:
            raise HTTPException(status_code=404, detail=f"no decisions for {det.value}")
        rows = snap.decisions[det]
        if source is not None:
            try:
                src = Source(source)
            except ValueError:
                raise HTTPException(status_code=400, detail=f"unknown source {source!r}")
            rows = [r for r in rows if r.key.source is src]
        if date_ is not None:
            d = _parse_date(date_)
            if not _date_in_range(snap, d):
                raise HTTPException(status_code=404, detail=f"date {d} outside data range")
            rows = [r for r in rows if r.date == d]
        stop_zones = snap.meta.get("stop_zones") or {}

        def zone_of(r: AnomalyDecision):
            if r.key.source is Source.BUS:
                return stop_zones.get(r.key.location_id)
            return r.key.location_id

        return [
            {
                "source": r.key.source.value,
                "location_id": r.key.location_id,
                "zone_id": zone_of(r),
                "date": r.date.isoformat(),
                "bin_of_day": r.key.bin_of_day,
                "score": r.score,
                "direction": r.direction.value,
            }
            for r in rows
            if r.is_anomaly
        ]

    @app.get("/fused")
    def fused(
        method: str = "majority",
        S: float = Query(..., ge=0.0, le=1.0),
        k: Optional[int] = None,
        weights: Optional[str] = None,
    ):
        snap = store.snapshot
        try:
            policy = pipeline.make_policy(
                method, snap.config, S, snap.enabled, k, _parse_weights(weights)
            )
            decisions = fuse(snap.aligned, policy)
        except (ConfigError, ValueError) as e:
            raise HTTPException(status_code=400, detail=str(e))
        return {
            "method": method.lower(),
            "S": S,
            "k": policy.k,
            "sources": [s.value for s in snap.enabled],
            "version": snap.version,
            "cells": [
                {
                    "zone_id": f.location_id,
                    "date": f.date.isoformat(),
                    "bin_of_day": f.bin_of_day,
                    "fused_score": f.fused_score,
                    "votes": f.votes,
                }
                for f in decisions
                if f.is_anomaly
            ],
        }

    @app.get("/recall")
    def recall(
        R: float = Query(..., ge=0.0),
        offset: int = Query(0, ge=-1, le=0),
        method: str = "CDR",
        detector: str = "zscore",
        S: Optional[float] = None,
        k: Optional[int] = None,
        weights: Optional[str] = None,
    ):
        snap = store.snapshot
        if not snap.events:
            raise HTTPException(status_code=404, detail="no ground-truth events loaded")
        lo, hi = snap.meta["date_range"]
        period = (date.fromisoformat(lo), date.fromisoformat(hi))
        if method.upper() in Source.__members__:
            src = Source(method.upper())
            det = _detector(detector)
            if det not in snap.decisions:
                raise HTTPException(status_code=404, detail=f"no decisions for {det.value}")
            src_meta = snap.meta["sources"].get(src.value)
            if src_meta is None:
                raise HTTPException(status_code=404, detail=f"no data for {src.value}")
            points = decisions_to_points(
                [d for d in snap.decisions[det] if d.key.source is src],
                bin_minutes=src_meta["bin_minutes"],
                stop_zones=snap.meta.get("stop_zones"),
                coarse=src_meta.get("coarse", False),
            )
            label = src.value
        else:
            if S is None:
                raise HTTPException(status_code=400, detail="fused recall needs S")
            try:
                policy = pipeline.make_policy(
                    method, snap.config, S, snap.enabled, k, _parse_weights(weights)
                )
                decisions = fuse(snap.aligned, policy)
            except (ConfigError, ValueError) as e:
                raise HTTPException(status_code=400, detail=str(e))
            points = fused_to_points(decisions, snap.aligned.bin_minutes)
            label = method.lower()
        try:
            curve = recall_curve(
                snap.events, points, snap.zones, r_grid=[R],
                offset_hours=offset, label=label, period=period,
            )
        except ValueError as e:
            raise HTTPException(status_code=400, detail=str(e))
        return {
            "label": label,
            "offset_hours": offset,
            "R_m": R,
            "recall": curve.points[0][1],
            "version": snap.version,
        }

    @app.get("/sunburst")
    def sunburst(detector: str = "zscore"):
        snap = store.snapshot
        det = _detector(detector)
        if det not in snap.decisions:
            raise HTTPException(status_code=404, detail=f"no decisions for {det.value}")
        stop_zones = snap.meta.get("stop_zones") or {}
        tree: dict = {}
        total = 0
        for dec in snap.decisions[det]:
            if not dec.is_anomaly:
                continue
            month = dec.date.strftime("%Y-%m")
            daytype = dec.key.daytype.value
            b = f"bin {dec.key.bin_of_day:02d}"
            zone = dec.key.location_id
            if dec.key.source is Source.BUS:
                # keep unmapped stops under their own id so counts stay exact
                zone = stop_zones.get(zone, zone)
            tree.setdefault(month, {}).setdefault(daytype, {}).setdefault(b, {}).setdefault(zone, 0)
            tree[month][daytype][b][zone] += 1
            total += 1

        def to_children(node):
            if isinstance(node, int):
                return node
            return [
                {"name": name, **(
                    {"value": child} if isinstance(child, int)
                    else {"children": to_children(child)}
                )}
                for name, child in sorted(node.items())
            ]

        return {
            "name": det.value,
            "total": total,
            "children": to_children(tree),
        }

    @app.get("/annotations")
    def annotations(
        zone: str,
        date_: str = Query(..., alias="date"),
        bin_: int = Query(..., alias="bin", ge=0),
        k: int = Query(10, ge=1),
    ):
        snap = store.snapshot
        if zone not in snap.zones:
            raise HTTPException(status_code=404, detail=f"unknown zone {zone!r}")
        d = _parse_date(date_)
        if not _date_in_range(snap, d):
            raise HTTPException(status_code=404, detail=f"date {d} outside data range")
        docs = snap.docs()
        cell = (zone, d, bin_)
        if cell not in docs:
            return []
        return [{"term": t, "score": s} for t, s in tfidf_top_k(docs, cell, k)]

    @app.get("/events")
    def events(detector: str = "zscore", offset: int = Query(0, ge=-1, le=0)):
        snap = store.snapshot
        det = _detector(detector)
        decisions = snap.decisions.get(det, [])
        out = []
        for ev in snap.events:
            target = ev.start + timedelta(hours=offset)
            nearest = {}
            for src in snap.enabled:
                src_meta = snap.meta["sources"].get(src.value)
                if src_meta is None:
                    continue
                points = decisions_to_points(
                    [d for d in decisions if d.key.source is src and d.date == target.date()],
                    bin_minutes=src_meta["bin_minutes"],
                    stop_zones=snap.meta.get("stop_zones"),
                    coarse=src_meta.get("coarse", False),
                )
                best = None
                for pt in points:
                    if not (pt.hour_lo <= target.hour <= pt.hour_hi):
                        continue
                    if pt.zone_id not in snap.zones:
                        continue
                    dist = haversine_m(snap.zones.centroid_of(pt.zone_id), ev.venue)
                    if best is None or dist < best[1]:
                        best = (pt.zone_id, dist)
                if best:
                    nearest[src.value] = {"zone_id": best[0], "distance_m": best[1]}
            out.append(
                {
                    "event_id": ev.event_id,
                    "name": ev.name,
                    "venue": {"lon": ev.venue.lon, "lat": ev.venue.lat},
                    "start": ev.start.isoformat(),
                    "end": ev.end.isoformat(),
                    "scale": ev.scale.value,
                    "nearest_anomalous_zone": nearest,
                }
            )
        return out

    @app.put("/config/sources")
    def put_sources(body: SourcesBody):
        snap = store.refuse_sources(body.enabled)
        return {
            "version": snap.version,
            "enabled_sources": [s.value for s in snap.enabled],
        }

    return app


def serve_forever(data_dir: str | Path, config: PipelineConfig, host: str, port: int) -> None:
    import uvicorn

    snapshot = load_snapshot(data_dir, config)
    app = create_app(SnapshotStore(snapshot))
    uvicorn.run(app, host=host, port=port, log_level="warning")
