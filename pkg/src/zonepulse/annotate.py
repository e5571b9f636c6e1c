"""Semantic annotation of anomaly cells: hashtags and venue categories by TF-IDF.

Each non-empty (zone, date, bin) cell becomes one document whose tokens are
the hashtags of geotagged messages plus the venue category of each check-in
in that cell. Scores use raw term counts against ln(N/df) over the full
corpus of cells.
"""
from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from datetime import date, datetime
from typing import Sequence

import numpy as np

from .geo import GeoPoint, ZoneSet
from .ingest import CheckinRecord, bin_of

Cell = tuple[str, date, int]  # (zone_id, date, bin_of_day)


@dataclass(frozen=True, slots=True)
class Message:
    timestamp: datetime
    location: GeoPoint
    text: str


@dataclass
class AnnotationDoc:
    cell: Cell
    token_counts: Counter


def normalize_token(raw: str) -> str:
    """Strip leading '#' markers and lowercase; idempotent."""
    return raw.lstrip("#").lower()


def hashtags(text: str) -> list[str]:
    """'#'-prefixed whitespace-delimited terms, normalized."""
    out = []
    for word in text.split():
        if word.startswith("#"):
            token = normalize_token(word)
            if token:
                out.append(token)
    return out


@dataclass
class DocBuildReport:
    n_messages: int = 0
    n_messages_out_of_zone: int = 0
    n_checkins: int = 0
    n_checkins_out_of_zone: int = 0


def build_docs(
    messages: Sequence[Message],
    checkins: Sequence[CheckinRecord],
    zones: ZoneSet,
    bin_minutes: int,
) -> tuple[dict[Cell, AnnotationDoc], DocBuildReport]:
    """One document per non-empty cell; out-of-zone inputs are counted, not kept."""
    report = DocBuildReport(n_messages=len(messages), n_checkins=len(checkins))
    counts: dict[Cell, Counter] = defaultdict(Counter)
    if messages:
        lons = np.array([m.location.lon for m in messages])
        lats = np.array([m.location.lat for m in messages])
        idx = zones.assign_points(lons, lats)
        for msg, zi in zip(messages, idx):
            if zi < 0:
                report.n_messages_out_of_zone += 1
                continue
            tokens = hashtags(msg.text)
            if not tokens:
                continue
            cell = (
                zones.zone_at(int(zi)).zone_id,
                msg.timestamp.date(),
                bin_of(msg.timestamp, bin_minutes),
            )
            counts[cell].update(tokens)
    if checkins:
        lons = np.array([c.location.lon for c in checkins])
        lats = np.array([c.location.lat for c in checkins])
        idx = zones.assign_points(lons, lats)
        for rec, zi in zip(checkins, idx):
            if zi < 0:
                report.n_checkins_out_of_zone += 1
                continue
            cell = (
                zones.zone_at(int(zi)).zone_id,
                rec.timestamp.date(),
                bin_of(rec.timestamp, bin_minutes),
            )
            counts[cell][normalize_token(rec.category)] += 1
    docs = {cell: AnnotationDoc(cell=cell, token_counts=c) for cell, c in counts.items()}
    return docs, report


def tfidf_top_k(
    docs: dict[Cell, AnnotationDoc],
    cell: Cell,
    k: int,
) -> list[tuple[str, float]]:
    """Top-k terms of one cell by count * ln(N_docs / df); ties lexicographic."""
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    target = docs.get(cell)
    if target is None:
        raise KeyError(f"no document for cell {cell}")
    n_docs = len(docs)
    df: Counter = Counter()
    for doc in docs.values():
        df.update(doc.token_counts.keys())
    scored = [
        (term, count * math.log(n_docs / df[term]))
        for term, count in target.token_counts.items()
    ]
    scored.sort(key=lambda ts: (-ts[1], ts[0]))
    return scored[:k]
