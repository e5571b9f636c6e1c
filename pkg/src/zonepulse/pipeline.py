"""End-to-end pipeline steps over a data directory.

Raw inputs (simulator output or real exports) live in ``data_dir``; derived
artifacts go to ``data_dir/artifacts``. Each step reads only documented file
formats, so steps can be re-run or replaced independently.
"""
from __future__ import annotations

from collections import defaultdict
from datetime import date
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import artifacts as art
from .annotate import Message, build_docs, tfidf_top_k
from .config import PipelineConfig
from .detect import (
    Detector,
    EsdConfig,
    detect_iqr,
    detect_shesd,
    detect_zscore,
)
from .errors import ConfigError, HeaderError
from .evaluate import (
    DEFAULT_R_GRID,
    RecallCurve,
    decisions_to_points,
    fused_to_points,
    recall_curve,
    sweep as run_sweep_grid,
)
from .fuse import AlignedTable, FusionMethod, FusionPolicy, align_to_zones, fuse
from .geo import ZoneSet, load_zones
from .ingest import (
    Daytype,
    OccupancySeries,
    SeriesKey,
    Source,
    coarse_rebin,
    compute_occupancy,
    parse_source,
)
from .normalcy import ScoredObservation, fit, normalize_scores, score_series, shapiro_wilk

RAW_FILES = {
    Source.CDR: "cdr.csv",
    Source.BUS: "bus.csv",
    Source.TAXI_PICKUP: "taxi.csv",
    Source.TAXI_DROPOFF: "taxi.csv",
    Source.CHECKIN: "checkins.csv",
}

MESSAGES_HEADER = ("timestamp", "lat", "lon", "text")


def artifact_paths(data_dir: str | Path) -> art.ArtifactPaths:
    return art.ArtifactPaths(Path(data_dir) / "artifacts")


def load_zone_set(data_dir: str | Path) -> ZoneSet:
    path = Path(data_dir) / "zones.geojson"
    with open(path, "rb") as fh:
        return load_zones(fh)


def read_messages(data_dir: str | Path) -> list[Message]:
    import csv
    from datetime import datetime

    from .geo import GeoPoint

    path = Path(data_dir) / "messages.csv"
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != list(MESSAGES_HEADER):
            raise HeaderError(f"{path}: header {header!r} != {list(MESSAGES_HEADER)!r}")
        for row in reader:
            out.append(
                Message(
                    timestamp=datetime.fromisoformat(row[0]),
                    location=GeoPoint(float(row[2]), float(row[1])),
                    text=row[3],
                )
            )
    return out


def run_ingest(data_dir: str | Path, config: PipelineConfig) -> dict:
    """Parse all raw files present and write occupancy.csv + meta/report."""
    data_dir = Path(data_dir)
    paths = artifact_paths(data_dir)
    zones = load_zone_set(data_dir)

    all_series: dict[SeriesKey, OccupancySeries] = {}
    reports = []
    meta_sources = {}
    for source in Source:
        raw = data_dir / RAW_FILES[source]
        if not raw.exists():
            continue
        with open(raw) as fh:
            records, rej = parse_source(source, fh)
        bin_minutes = config.bin_minutes_for(source)
        series, occ_report = compute_occupancy(
            source,
            records,
            zones=zones,
            bin_minutes=bin_minutes,
            holidays=config.holiday_dates(),
        )
        if source is Source.CDR and config.coarse:
            series = coarse_rebin(series)
        all_series.update(series)
        reports.append({"parse": rej.as_dict(), "occupancy": occ_report.as_dict()})
        dates = sorted({d for s in series.values() for d, _ in s.samples})
        meta_sources[source.value] = {
            "bin_minutes": bin_minutes,
            "coarse": bool(source is Source.CDR and config.coarse),
            "n_series": len(series),
            "date_range": [dates[0].isoformat(), dates[-1].isoformat()] if dates else None,
        }
        if occ_report.checkin_definition:
            meta_sources[source.value]["checkin_definition"] = occ_report.checkin_definition

    if not all_series:
        raise ConfigError(f"no raw source files found under {data_dir}")

    stops_path = data_dir / "stops.csv"
    stop_zones = {}
    if stops_path.exists():
        stop_zones = art.stop_zone_map(art.read_stops(stops_path), zones)

    art.write_occupancy(paths.occupancy, all_series)
    all_dates = sorted({d for s in all_series.values() for d, _ in s.samples})
    meta = {
        "sources": meta_sources,
        "stop_zones": stop_zones,
        "date_range": [all_dates[0].isoformat(), all_dates[-1].isoformat()],
        "holidays": list(config.holidays),
    }
    art.write_json(paths.meta, meta)
    art.write_json(paths.report, {"ingest": reports})
    return meta


def run_fit(data_dir: str | Path, config: PipelineConfig) -> int:
    paths = artifact_paths(data_dir)
    series = art.read_occupancy(paths.occupancy)
    models = fit(series, exclude_dates=config.holiday_dates())
    art.write_models(paths.models, models)
    return len(models)


def _period_for(key_group: tuple, meta: dict, config: PipelineConfig) -> int:
    if config.esd_period_bins is not None:
        return config.esd_period_bins
    source, _loc, daytype = key_group
    src_meta = meta["sources"][source.value]
    if src_meta.get("coarse"):
        nbins = 5
    else:
        nbins = 1440 // src_meta["bin_minutes"]
    days_per_week = 5 if daytype is Daytype.WEEKDAY else 2
    return nbins * days_per_week


def run_detect(
    data_dir: str | Path,
    config: PipelineConfig,
    methods: Sequence[str] = ("zscore", "iqr", "shesd"),
) -> dict:
    """Score all observations and write decisions per requested detector."""
    paths = artifact_paths(data_dir)
    meta = art.read_json(paths.meta)
    series = art.read_occupancy(paths.occupancy)
    models = art.read_models(paths.models)

    scored, skipped = score_series(series, models)
    scored = normalize_scores(scored)
    art.write_scores(paths.scores, scored)

    summary = {"skipped_zero_variance_keys": len(skipped)}
    for method in methods:
        if method == "zscore":
            decisions = detect_zscore(scored, threshold=config.z_threshold)
            art.write_decisions(paths.decisions(Detector.ZSCORE), decisions)
            summary["zscore_flags"] = sum(d.is_anomaly for d in decisions)
        elif method == "iqr":
            decisions = []
            for key in sorted(
                series,
                key=lambda k: (k.source.value, k.location_id, k.bin_of_day, k.daytype.value),
            ):
                model = models.get(key)
                if model is None:
                    continue
                for d, v in series[key].samples:
                    decisions.append(
                        detect_iqr(model, v, d, multiplier=config.iqr_multiplier)
                    )
            art.write_decisions(paths.decisions(Detector.IQR), decisions)
            summary["iqr_flags"] = sum(d.is_anomaly for d in decisions)
        elif method == "shesd":
            groups: dict = defaultdict(list)
            for obs in scored:
                groups[(obs.key.source, obs.key.location_id, obs.key.daytype)].append(obs)
            decisions = []
            skipped_groups: list = []
            for gkey in sorted(groups, key=lambda g: (g[0].value, g[1], g[2].value)):
                esd_cfg = EsdConfig(
                    alpha=config.esd_alpha,
                    max_anoms_fraction=config.esd_max_anoms_fraction,
                    period=_period_for(gkey, meta, config),
                )
                obs_list = sorted(groups[gkey], key=lambda o: (o.date, o.key.bin_of_day))
                if len(obs_list) < 2 * esd_cfg.period:
                    skipped_groups.append(gkey)
                    continue
                decisions.extend(detect_shesd(obs_list, esd_cfg))
            art.write_decisions(paths.decisions(Detector.SHESD), decisions)
            summary["shesd_flags"] = sum(d.is_anomaly for d in decisions)
            summary["shesd_skipped_groups"] = len(skipped_groups)
        else:
            raise ConfigError(f"unknown detector {method!r}")

    report = art.read_json(paths.report) if paths.report.exists() else {}
    report["detect"] = summary
    art.write_json(paths.report, report)
    return summary


def _scores_by_source(
    scored: Sequence[ScoredObservation], enabled: Sequence[Source]
) -> dict[Source, list[ScoredObservation]]:
    by_source: dict[Source, list[ScoredObservation]] = defaultdict(list)
    for obs in scored:
        if obs.key.source in enabled:
            by_source[obs.key.source].append(obs)
    missing = [s.value for s in enabled if s not in by_source]
    if missing:
        raise ConfigError(f"no scores present for enabled sources: {missing}")
    return by_source


def build_aligned_table(
    data_dir: str | Path,
    config: PipelineConfig,
    enabled: Optional[Sequence[Source]] = None,
) -> AlignedTable:
    paths = artifact_paths(data_dir)
    meta = art.read_json(paths.meta)
    scored = art.read_scores(paths.scores)
    enabled = tuple(enabled) if enabled else config.enabled_sources()
    by_source = _scores_by_source(scored, enabled)
    bin_minutes = {
        s: meta["sources"][s.value]["bin_minutes"] for s in enabled
    }
    stop_zones = meta.get("stop_zones") or None
    return align_to_zones(by_source, bin_minutes, stop_zones=stop_zones)


def make_policy(
    method: str,
    config: PipelineConfig,
    s_threshold: float,
    enabled: Sequence[Source],
    k: Optional[int] = None,
    weights: Optional[dict] = None,
) -> FusionPolicy:
    m = FusionMethod(method.upper())
    policy_weights = None
    if m is FusionMethod.WEIGHTED:
        raw = weights if weights is not None else config.weights
        if not raw:
            raise ConfigError("WEIGHTED fusion requires weights (config or request)")
        policy_weights = {Source(sv): float(w) for sv, w in raw.items()}
    return FusionPolicy(
        method=m,
        score_threshold=s_threshold,
        sources=tuple(enabled),
        weights=policy_weights,
        k=k if k is not None else config.k,
    )


def run_fuse(
    data_dir: str | Path,
    config: PipelineConfig,
    methods: Sequence[str],
    s_threshold: float,
    k: Optional[int] = None,
    enabled: Optional[Sequence[Source]] = None,
) -> dict:
    paths = artifact_paths(data_dir)
    enabled = tuple(enabled) if enabled else config.enabled_sources()
    table = build_aligned_table(data_dir, config, enabled)
    fused_by_method = {}
    for method in methods:
        policy = make_policy(method, config, s_threshold, enabled, k)
        fused_by_method[method.lower()] = fuse(table, policy)
    art.write_fused(paths.fused, fused_by_method)
    return {m: sum(f.is_anomaly for f in fs) for m, fs in fused_by_method.items()}


def _meta_period(meta: dict) -> tuple[date, date]:
    lo, hi = meta["date_range"]
    return date.fromisoformat(lo), date.fromisoformat(hi)


def run_eval(
    data_dir: str | Path,
    config: PipelineConfig,
    detector: str = "zscore",
    offsets: Sequence[int] = (0,),
    r_grid: Sequence[float] = DEFAULT_R_GRID,
    sources: Optional[Sequence[Source]] = None,
    include_fused: bool = False,
) -> list[RecallCurve]:
    """Per-source recall curves (plus fused curves when fused.csv is present)."""
    data_dir = Path(data_dir)
    paths = artifact_paths(data_dir)
    zones = load_zone_set(data_dir)
    events = art.read_events(data_dir / "events.csv")
    meta = art.read_json(paths.meta)
    period = _meta_period(meta)

    det = Detector(detector.upper())
    decisions = art.read_decisions(paths.decisions(det))
    sources = tuple(sources) if sources else config.enabled_sources()

    from .evaluate import eligible_events

    _, excluded = eligible_events(events, period)
    if excluded:
        report = art.read_json(paths.report) if paths.report.exists() else {}
        report["eval_excluded_events"] = [
            {"event_id": ev.event_id, "start": ev.start.isoformat()} for ev in excluded
        ]
        art.write_json(paths.report, report)

    curves = []
    for source in sources:
        src_dec = [d for d in decisions if d.key.source is source]
        src_meta = meta["sources"].get(source.value)
        if src_meta is None:
            continue
        points = decisions_to_points(
            src_dec,
            bin_minutes=src_meta["bin_minutes"],
            stop_zones=meta.get("stop_zones"),
            coarse=src_meta.get("coarse", False),
        )
        for off in offsets:
            curves.append(
                recall_curve(
                    events, points, zones, r_grid=r_grid, offset_hours=off,
                    label=source.value, period=period,
                )
            )
    if include_fused and paths.fused.exists():
        fused_by_method = art.read_fused(paths.fused)
        table_bin = max(
            meta["sources"][s.value]["bin_minutes"] for s in config.enabled_sources()
        )
        for method, fused in sorted(fused_by_method.items()):
            points = fused_to_points(fused, table_bin)
            for off in offsets:
                curves.append(
                    recall_curve(
                        events, points, zones, r_grid=r_grid, offset_hours=off,
                        label=method, period=period,
                    )
                )
    art.write_recall(paths.recall, curves)
    return curves


def run_sweep(
    data_dir: str | Path,
    config: PipelineConfig,
    methods: Sequence[str],
    r_values: Sequence[float],
    s_values: Sequence[float],
    offset_hours: int = 0,
    k: Optional[int] = None,
) -> list:
    data_dir = Path(data_dir)
    paths = artifact_paths(data_dir)
    zones = load_zone_set(data_dir)
    events = art.read_events(data_dir / "events.csv")
    meta = art.read_json(paths.meta)
    enabled = config.enabled_sources()
    table = build_aligned_table(data_dir, config, enabled)
    policies = {
        method.lower(): (
            lambda s, m=method: make_policy(m, config, s, enabled, k)
        )
        for method in methods
    }
    cells = run_sweep_grid(
        events, table, zones, r_values, s_values, policies,
        offset_hours=offset_hours, period=_meta_period(meta),
    )
    art.write_sweep(paths.sweep, cells)
    return cells


def _hourly_series(
    series_map: dict[SeriesKey, OccupancySeries],
    source: Source,
    meta: dict,
    stop_zones: Optional[dict] = None,
    per_zone: bool = False,
):
    """City-wide (or per-zone) hourly series for one source, ordered by time.

    Count sources sum fine bins into hours and sum across locations; BUS
    averages loading across member stops and bins.
    """
    src_meta = meta["sources"][source.value]
    if src_meta.get("coarse"):
        raise ConfigError("granger/normality need fine-grained occupancy, not coarse")
    width = src_meta["bin_minutes"]
    per_hour = 60 // width
    is_mean = source is Source.BUS

    # (group, date, hour) -> list of values
    acc: dict = defaultdict(list)
    for key, series in series_map.items():
        if key.source is not source:
            continue
        if per_zone:
            if source is Source.BUS:
                group = (stop_zones or {}).get(key.location_id)
                if group is None:
                    continue
            else:
                group = key.location_id
        else:
            group = "_city"
        hour = key.bin_of_day // per_hour
        for d, v in series.samples:
            acc[(group, d, hour)].append(v)
    out: dict = defaultdict(dict)
    for (group, d, hour), vals in acc.items():
        out[group][(d, hour)] = float(np.mean(vals)) if is_mean else float(np.sum(vals))
    return out


def run_granger(
    data_dir: str | Path,
    config: PipelineConfig,
    lag: int = 1,
    per_zone: bool = False,
) -> dict:
    from .granger import aggregate_pairwise, pairwise_granger

    paths = artifact_paths(data_dir)
    meta = art.read_json(paths.meta)
    series_map = art.read_occupancy(paths.occupancy)
    enabled = config.enabled_sources()
    grouped = {
        s: _hourly_series(series_map, s, meta, meta.get("stop_zones"), per_zone)
        for s in enabled
    }
    if per_zone:
        zone_ids = sorted(set().union(*(set(g) for g in grouped.values())))
        result_sets = []
        failures = []
        for zone in zone_ids:
            series_by_label = {}
            ok = True
            for s in enabled:
                cells = grouped[s].get(zone)
                if not cells:
                    ok = False
                    break
                series_by_label[s.value] = [v for _, v in sorted(cells.items())]
            lengths = {len(v) for v in series_by_label.values()}
            if not ok or len(lengths) != 1:
                continue
            res, fails = pairwise_granger(series_by_label, lag)
            result_sets.append(res)
            failures.extend((zone,) + f for f in fails)
        agg = aggregate_pairwise(result_sets)
        art.write_granger_agg(paths.granger_agg, agg)
        flat = [r for rs in result_sets for r in rs]
        art.write_granger(paths.granger, flat)
        return {"pairs": len(flat), "zones": len(result_sets), "failures": len(failures)}
    series_by_label = {}
    for s in enabled:
        cells = grouped[s].get("_city")
        if not cells:
            raise ConfigError(f"no occupancy for source {s.value}")
        series_by_label[s.value] = [v for _, v in sorted(cells.items())]
    n = min(len(v) for v in series_by_label.values())
    series_by_label = {k: v[:n] for k, v in series_by_label.items()}
    results, failures = pairwise_granger(series_by_label, lag)
    art.write_granger(paths.granger, results)
    return {"pairs": len(results), "failures": failures}


def run_normality(data_dir: str | Path, config: PipelineConfig) -> dict:
    """Shapiro-Wilk per (location, hour) pooling weekdays, per source."""
    paths = artifact_paths(data_dir)
    meta = art.read_json(paths.meta)
    series_map = art.read_occupancy(paths.occupancy)

    rows = []
    summary: dict = {}
    for source in config.enabled_sources():
        src_meta = meta["sources"].get(source.value)
        if src_meta is None or src_meta.get("coarse"):
            continue
        width = src_meta["bin_minutes"]
        per_hour = 60 // width
        is_mean = source is Source.BUS
        acc: dict = defaultdict(lambda: defaultdict(list))
        for key, series in series_map.items():
            if key.source is not source or key.daytype is not Daytype.WEEKDAY:
                continue
            hour = key.bin_of_day // per_hour
            for d, v in series.samples:
                acc[(key.location_id, hour)][d].append(v)
        n_pass = n_tested = 0
        for (loc, hour), by_date in sorted(acc.items()):
            values = [
                float(np.mean(vs)) if is_mean else float(np.sum(vs))
                for _, vs in sorted(by_date.items())
            ]
            arr = np.asarray(values)
            if arr.size < 3 or arr.size > 5000 or arr.min() == arr.max():
                continue
            w, p = shapiro_wilk(arr)
            rows.append((source.value, loc, hour, int(arr.size), w, p))
            n_tested += 1
            n_pass += p > 0.05
        if n_tested:
            summary[source.value] = {
                "tested": n_tested,
                "fraction_p_above_0.05": n_pass / n_tested,
            }
    art.write_shapiro(paths.shapiro, rows)
    return summary


def run_annotate(
    data_dir: str | Path,
    config: PipelineConfig,
    zone_id: str,
    day: date,
    bin_of_day: int,
    k: int = 10,
) -> list[dict]:
    data_dir = Path(data_dir)
    zones = load_zone_set(data_dir)
    messages = read_messages(data_dir)
    with open(data_dir / "checkins.csv") as fh:
        checkins, _ = parse_source(Source.CHECKIN, fh)
    docs, _report = build_docs(messages, checkins, zones, config.fine_bin_minutes)
    cell = (zone_id, day, bin_of_day)
    if cell not in docs:
        return []
    return [{"term": t, "score": s} for t, s in tfidf_top_k(docs, cell, k)]
