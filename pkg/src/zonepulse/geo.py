"""Zone geometry: GeoJSON loading, point-to-zone lookup, great-circle distances.

Zones are administrative polygons (subzones, census tracts, or simulator grid
cells). A ZoneSet is immutable once loaded; all queries are pure.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Optional, Union

import numpy as np

from . import kernels
from .errors import DuplicateZoneIdError, GeoJsonError

EARTH_RADIUS_M = 6_371_000.0


@dataclass(frozen=True, slots=True)
class GeoPoint:
    lon: float
    lat: float

    def __post_init__(self):
        if not (math.isfinite(self.lon) and math.isfinite(self.lat)):
            raise ValueError(f"non-finite coordinate ({self.lon}, {self.lat})")
        if not (-180.0 <= self.lon <= 180.0 and -90.0 <= self.lat <= 90.0):
            raise ValueError(f"coordinate out of range ({self.lon}, {self.lat})")


@dataclass(frozen=True)
class Zone:
    zone_id: str
    rings: tuple  # tuple of (k, 2) float64 vertex arrays, each ring closed
    centroid: GeoPoint

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        vx = np.concatenate([r[:, 0] for r in self.rings])
        vy = np.concatenate([r[:, 1] for r in self.rings])
        return float(vx.min()), float(vy.min()), float(vx.max()), float(vy.max())


def _ring_area_centroid(ring: np.ndarray) -> tuple[float, float, float]:
    """Signed shoelace area and centroid of one closed ring."""
    x, y = ring[:-1, 0], ring[:-1, 1]
    xn, yn = ring[1:, 0], ring[1:, 1]
    cross = x * yn - xn * y
    area = 0.5 * cross.sum()
    if area == 0.0:
        return 0.0, float(x.mean()), float(y.mean())
    cx = ((x + xn) * cross).sum() / (6.0 * area)
    cy = ((y + yn) * cross).sum() / (6.0 * area)
    return float(area), float(cx), float(cy)


def _polygon_centroid(polygons: list[list[np.ndarray]]) -> GeoPoint:
    """Area-weighted centroid; exterior rings add weight, holes subtract."""
    total_w = 0.0
    sx = 0.0
    sy = 0.0
    for rings in polygons:
        for i, ring in enumerate(rings):
            area, cx, cy = _ring_area_centroid(ring)
            w = abs(area) if i == 0 else -abs(area)
            total_w += w
            sx += w * cx
            sy += w * cy
    if total_w == 0.0:
        # degenerate geometry: fall back to the vertex mean
        vx = np.concatenate([r[:-1, 0] for rings in polygons for r in rings])
        vy = np.concatenate([r[:-1, 1] for rings in polygons for r in rings])
        return GeoPoint(float(vx.mean()), float(vy.mean()))
    return GeoPoint(sx / total_w, sy / total_w)


def _validate_ring(ring, feature_idx: int) -> np.ndarray:
    arr = np.asarray(ring, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] < 2:
        raise GeoJsonError(f"feature {feature_idx}: ring is not a coordinate list")
    arr = arr[:, :2]
    if arr.shape[0] < 4:
        raise GeoJsonError(f"feature {feature_idx}: ring has fewer than 4 vertices")
    if not (arr[0] == arr[-1]).all():
        raise GeoJsonError(f"feature {feature_idx}: ring is not closed")
    if not np.isfinite(arr).all():
        raise GeoJsonError(f"feature {feature_idx}: non-finite ring coordinate")
    return arr


class ZoneSet:
    """Immutable collection of zones, ordered by ascending zone_id."""

    def __init__(self, zones: Iterable[Zone]):
        zones = sorted(zones, key=lambda z: z.zone_id)
        ids = [z.zone_id for z in zones]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise DuplicateZoneIdError(f"duplicate zone_id(s): {', '.join(dup)}")
        self._zones = tuple(zones)
        self._index = {z.zone_id: i for i, z in enumerate(zones)}
        self._pack = kernels.ZonePack([self._split_polygons(z) for z in zones])

    @staticmethod
    def _split_polygons(zone: Zone) -> list[np.ndarray]:
        return list(zone.rings)

    def __len__(self) -> int:
        return len(self._zones)

    def __iter__(self) -> Iterator[Zone]:
        return iter(self._zones)

    def __contains__(self, zone_id: str) -> bool:
        return zone_id in self._index

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(z.zone_id for z in self._zones)

    def get(self, zone_id: str) -> Zone:
        return self._zones[self._index[zone_id]]

    def centroid_of(self, zone_id: str) -> GeoPoint:
        return self.get(zone_id).centroid

    def zone_at(self, idx: int) -> Zone:
        return self._zones[idx]

    def locate(self, p: GeoPoint) -> Optional[str]:
        """Alias for :func:`point_to_zone` as a method."""
        idx = kernels.assign(self._pack, np.array([p.lon]), np.array([p.lat]))[0]
        return None if idx < 0 else self._zones[idx].zone_id

    def assign_points(self, lons: np.ndarray, lats: np.ndarray) -> np.ndarray:
        """Vectorized point-in-zone lookup; returns zone index or -1 per point."""
        return kernels.assign(self._pack, lons, lats)

    def to_geojson(self) -> dict:
        features = []
        for z in self._zones:
            rings = [r.tolist() for r in z.rings]
            features.append(
                {
                    "type": "Feature",
                    "properties": {"zone_id": z.zone_id},
                    "geometry": {"type": "Polygon", "coordinates": rings},
                }
            )
        return {"type": "FeatureCollection", "features": features}


def load_zones(document: Union[bytes, str, IO]) -> ZoneSet:
    """Parse an RFC 7946 feature collection into a ZoneSet.

    Each feature needs a string ``zone_id`` property and Polygon/MultiPolygon
    geometry. Centroids are computed area-weighted over rings.
    """
    if hasattr(document, "read"):
        document = document.read()
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as e:
        raise GeoJsonError(f"not valid JSON: {e}") from e
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise GeoJsonError("document is not a FeatureCollection")
    features = doc.get("features")
    if not isinstance(features, list):
        raise GeoJsonError("FeatureCollection has no features list")

    zones = []
    seen: set[str] = set()
    for fi, feat in enumerate(features):
        props = feat.get("properties") or {}
        zone_id = props.get("zone_id")
        if not isinstance(zone_id, str) or not zone_id:
            raise GeoJsonError(f"feature {fi}: missing string property 'zone_id'")
        if zone_id in seen:
            raise DuplicateZoneIdError(f"feature {fi}: duplicate zone_id {zone_id!r}")
        seen.add(zone_id)
        geom = feat.get("geometry") or {}
        gtype = geom.get("type")
        coords = geom.get("coordinates")
        if gtype == "Polygon":
            polygons = [coords]
        elif gtype == "MultiPolygon":
            polygons = coords
        else:
            raise GeoJsonError(f"feature {fi}: unsupported geometry type {gtype!r}")
        try:
            validated = [[_validate_ring(r, fi) for r in poly] for poly in polygons]
        except (TypeError, ValueError) as e:
            if isinstance(e, GeoJsonError):
                raise
            raise GeoJsonError(f"feature {fi}: malformed geometry ({e})") from e
        centroid = _polygon_centroid(validated)
        rings = tuple(r for poly in validated for r in poly)
        zones.append(Zone(zone_id=zone_id, rings=rings, centroid=centroid))
    return ZoneSet(zones)


def point_to_zone(p: GeoPoint, zones: ZoneSet) -> Optional[str]:
    """First zone (ascending zone_id) containing p; boundary counts as inside."""
    return zones.locate(p)


def haversine_m(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in meters on a 6,371 km sphere."""
    lon1, lat1, lon2, lat2 = map(math.radians, (a.lon, a.lat, b.lon, b.lat))
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    h = math.sin(dlat / 2.0) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def haversine_m_many(lons1, lats1, lon2: float, lat2: float) -> np.ndarray:
    """Vectorized distance from many points to one reference point."""
    lons1 = np.radians(np.asarray(lons1, dtype=np.float64))
    lats1 = np.radians(np.asarray(lats1, dtype=np.float64))
    rlon2, rlat2 = math.radians(lon2), math.radians(lat2)
    h = (
        np.sin((rlat2 - lats1) / 2.0) ** 2
        + np.cos(lats1) * math.cos(rlat2) * np.sin((rlon2 - lons1) / 2.0) ** 2
    )
    return 2.0 * EARTH_RADIUS_M * np.arcsin(np.minimum(1.0, np.sqrt(h)))
