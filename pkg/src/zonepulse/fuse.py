"""Decision- and data-level fusion of per-source anomaly evidence.

Per-source normalized scores are first aligned onto a common (zone, date,
coarse-bin) grid: bin widths are harmonized to the coarsest participating
width and bus stops are pooled to their zone, both by max-pooling. Fusion
then combines aligned scores by weighted linear combination, arithmetic
mean, or k-of-N majority voting over per-source threshold decisions.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from typing import Mapping, Optional, Sequence

from .errors import ConfigError
from .ingest import Source
from .normalcy import ScoredObservation


class FusionMethod(str, Enum):
    WEIGHTED = "WEIGHTED"
    MEAN = "MEAN"
    MAJORITY = "MAJORITY"


@dataclass(frozen=True)
class FusionPolicy:
    method: FusionMethod
    score_threshold: float  # S, over normalized scores in [0, 1]
    sources: tuple[Source, ...]  # enabled channels; N = len(sources)
    weights: Optional[Mapping[Source, float]] = None  # WEIGHTED only
    k: int = 2  # MAJORITY only

    def __post_init__(self):
        if not 0.0 <= self.score_threshold <= 1.0:
            raise ConfigError(f"score threshold S must be in [0, 1], got {self.score_threshold}")
        if not self.sources:
            raise ConfigError("fusion needs at least one enabled source")
        n = len(self.sources)
        if self.method is FusionMethod.MAJORITY and not 1 <= self.k <= n:
            raise ConfigError(f"majority voting needs 1 <= k <= N ({self.k} vs N={n})")
        if self.method is FusionMethod.WEIGHTED:
            if self.weights is None:
                raise ConfigError("WEIGHTED fusion needs weights")
            w = [self.weights.get(s, 0.0) for s in self.sources]
            if any(x < 0 for x in w):
                raise ConfigError("weights must be non-negative")
            if abs(sum(w) - 1.0) > 1e-9:
                raise ConfigError(f"weights over enabled sources must sum to 1, got {sum(w)}")

    def effective_weights(self) -> dict[Source, float]:
        if self.method is FusionMethod.WEIGHTED:
            return {s: float(self.weights.get(s, 0.0)) for s in self.sources}
        return {s: 1.0 / len(self.sources) for s in self.sources}


@dataclass(frozen=True, slots=True)
class FusedDecision:
    location_id: str
    date: date
    bin_of_day: int
    fused_score: Optional[float]  # absent for MAJORITY
    votes: int
    is_anomaly: bool
    contributing_sources: frozenset


@dataclass
class AlignedTable:
    """Per-(zone, date, bin) normalized scores per source; missing stays None."""

    bin_minutes: int
    sources: tuple[Source, ...]
    cells: dict = field(default_factory=dict)  # (zone, date, bin) -> {source: score}

    def sorted_cells(self):
        return sorted(self.cells.items(), key=lambda kv: kv[0])


def align_to_zones(
    scored_by_source: Mapping[Source, Sequence[ScoredObservation]],
    bin_minutes_by_source: Mapping[Source, int],
    stop_zones: Optional[Mapping[str, str]] = None,
) -> AlignedTable:
    """Build the fusion grid from per-source normalized scores.

    Scores are max-pooled into the coarsest participating bin width; BUS
    scores are max-pooled over a zone's member stops, which requires a
    bus_stop_id -> zone_id mapping.
    """
    sources = tuple(sorted(scored_by_source, key=lambda s: s.value))
    if not sources:
        raise ConfigError("align_to_zones needs at least one source")
    if Source.BUS in sources and stop_zones is None:
        raise ConfigError("BUS fusion requires stop coordinates mapped to zones")
    target = max(bin_minutes_by_source[s] for s in sources)
    if 1440 % target:
        raise ConfigError(f"target bin width {target} does not divide a day")

    cells: dict = defaultdict(dict)
    for source in sources:
        width = bin_minutes_by_source[source]
        if target % width:
            raise ConfigError(
                f"{source.value} bin width {width} does not nest in target {target}"
            )
        factor = target // width
        for obs in scored_by_source[source]:
            if source is Source.BUS:
                zone = stop_zones.get(obs.key.location_id)
                if zone is None:
                    continue  # stop without coordinates; counted by the caller
            else:
                zone = obs.key.location_id
            cell = (zone, obs.date, obs.key.bin_of_day // factor)
            prev = cells[cell].get(source)
            if prev is None or obs.normalized_z > prev:
                cells[cell][source] = obs.normalized_z
    return AlignedTable(bin_minutes=target, sources=sources, cells=dict(cells))


def _fuse_cells(table: AlignedTable, policy: FusionPolicy) -> list[FusedDecision]:
    out = []
    majority = policy.method is FusionMethod.MAJORITY
    weights = policy.effective_weights()
    s_threshold = policy.score_threshold
    for (zone, d, b), per_source in table.sorted_cells():
        present = [s for s in policy.sources if per_source.get(s) is not None]
        if not present:
            continue
        votes = sum(1 for s in present if per_source[s] >= s_threshold)
        if majority:
            fused_score = None
            is_anomaly = votes >= policy.k
        else:
            wsum = sum(weights[s] for s in present)
            if wsum <= 0.0:
                continue
            fused_score = sum(weights[s] * per_source[s] for s in present) / wsum
            is_anomaly = fused_score >= s_threshold
        out.append(
            FusedDecision(
                location_id=zone,
                date=d,
                bin_of_day=b,
                fused_score=fused_score,
                votes=votes,
                is_anomaly=is_anomaly,
                contributing_sources=frozenset(present),
            )
        )
    return out


def fuse_weighted(table: AlignedTable, policy: FusionPolicy) -> list[FusedDecision]:
    """Weighted linear combination of normalized scores; anomaly iff >= S.

    Cells where a source is missing renormalize the weights over the present
    sources; cells with no source present are skipped.
    """
    if policy.method not in (FusionMethod.WEIGHTED, FusionMethod.MEAN):
        raise ConfigError(f"fuse_weighted got policy method {policy.method}")
    return _fuse_cells(table, policy)


def fuse_majority(table: AlignedTable, policy: FusionPolicy) -> list[FusedDecision]:
    """k-of-N voting over per-source threshold decisions; missing = no vote."""
    if policy.method is not FusionMethod.MAJORITY:
        raise ConfigError(f"fuse_majority got policy method {policy.method}")
    return _fuse_cells(table, policy)


def fuse(table: AlignedTable, policy: FusionPolicy) -> list[FusedDecision]:
    if policy.method is FusionMethod.MAJORITY:
        return fuse_majority(table, policy)
    return fuse_weighted(table, policy)
