"""Pipeline configuration with YAML loading.

All thresholds default to the standard settings (z 3, IQR multiplier 1.5,
ESD alpha 0.05, anomaly cap 2%); the fusion score threshold S has no default
and must be given explicitly wherever fusion runs.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import date
from pathlib import Path
from typing import Optional

import yaml

from .errors import ConfigError
from .ingest import Source

DEFAULT_SOURCES = ("CDR", "TAXI_DROPOFF", "CHECKIN")


@dataclass(frozen=True)
class PipelineConfig:
    z_threshold: float = 3.0
    iqr_multiplier: float = 1.5
    esd_alpha: float = 0.05
    esd_max_anoms_fraction: float = 0.02
    esd_period_bins: Optional[int] = None  # default: one week of bins per daytype
    score_threshold: Optional[float] = None  # S; no privileged default
    weights: Optional[dict] = None  # source value -> weight, for WEIGHTED fusion
    k: int = 2
    sources: tuple = DEFAULT_SOURCES
    fine_bin_minutes: int = 15  # all sources except hourly CDR
    coarse: bool = False  # rebin CDR into the 5 named multi-hour bins
    holidays: tuple = ()  # ISO dates excluded from normalcy fitting
    utc_offset: str = "+08:00"  # documentation of the locale; inputs are local civil time
    seed: int = 7

    def bin_minutes_for(self, source: Source) -> int:
        return 60 if source is Source.CDR else self.fine_bin_minutes

    def holiday_dates(self) -> tuple[date, ...]:
        return tuple(date.fromisoformat(h) for h in self.holidays)

    def enabled_sources(self) -> tuple[Source, ...]:
        try:
            return tuple(Source(s) for s in self.sources)
        except ValueError as e:
            raise ConfigError(f"unknown source in config: {e}")


def load_config(path: Optional[str | Path]) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    raw = yaml.safe_load(Path(path).read_text()) or {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a mapping")
    known = {f for f in PipelineConfig.__dataclass_fields__}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {sorted(unknown)}")
    for tuple_key in ("sources", "holidays"):
        if tuple_key in raw and isinstance(raw[tuple_key], list):
            raw[tuple_key] = tuple(raw[tuple_key])
    cfg = PipelineConfig(**raw)
    cfg.enabled_sources()  # validate eagerly
    if 60 % cfg.fine_bin_minutes:
        raise ConfigError(f"fine_bin_minutes={cfg.fine_bin_minutes} must divide 60")
    return cfg


def override(cfg: PipelineConfig, **kwargs) -> PipelineConfig:
    kwargs = {k: v for k, v in kwargs.items() if v is not None}
    return replace(cfg, **kwargs) if kwargs else cfg
