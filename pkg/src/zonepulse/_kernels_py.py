"""Pure NumPy geometry kernels: ray-casting containment and batch zone assignment.

Both kernel backends (this module and the compiled ``_kernels_cy``) implement
the same contract against a :class:`ZonePack`:

* boundary points count as inside,
* containment uses the even-odd rule across all rings of a zone, so holes and
  multi-part polygons work without special casing,
* ``assign`` returns the first containing zone in pack order (zones are packed
  in ascending zone_id order, which fixes the tie-break for overlaps).
"""
from __future__ import annotations

import numpy as np

# absolute tolerance, in degrees, for the collinearity test of the
# point-on-edge check
BOUNDARY_EPS = 1e-12


class ZonePack:
    """Flattened polygon storage shared by both kernel backends.

    ``zones_rings[i]`` is the list of closed rings (each an (k, 2) float64
    array of lon/lat vertices, first == last) belonging to zone ``i``.
    """

    def __init__(self, zones_rings):
        vx, vy = [], []
        ring_start = [0]
        zone_ring_start = [0]
        for rings in zones_rings:
            for ring in rings:
                ring = np.asarray(ring, dtype=np.float64)
                vx.append(ring[:, 0])
                vy.append(ring[:, 1])
                ring_start.append(ring_start[-1] + ring.shape[0])
            zone_ring_start.append(zone_ring_start[-1] + len(rings))
        self.n_zones = len(zones_rings)
        self.vx = np.concatenate(vx) if vx else np.empty(0, dtype=np.float64)
        self.vy = np.concatenate(vy) if vy else np.empty(0, dtype=np.float64)
        self.ring_start = np.asarray(ring_start, dtype=np.int64)
        self.zone_ring_start = np.asarray(zone_ring_start, dtype=np.int64)
        bbox = np.empty((self.n_zones, 4), dtype=np.float64)
        for zi in range(self.n_zones):
            lo = self.ring_start[self.zone_ring_start[zi]]
            hi = self.ring_start[self.zone_ring_start[zi + 1]]
            bbox[zi, 0] = self.vx[lo:hi].min()
            bbox[zi, 1] = self.vy[lo:hi].min()
            bbox[zi, 2] = self.vx[lo:hi].max()
            bbox[zi, 3] = self.vy[lo:hi].max()
        self.bbox = bbox


def contains_many(pack: ZonePack, zi: int, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Even-odd containment of many points in one zone; boundary is inside."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    inside = np.zeros(xs.shape, dtype=bool)
    boundary = np.zeros(xs.shape, dtype=bool)
    for ri in range(pack.zone_ring_start[zi], pack.zone_ring_start[zi + 1]):
        lo = pack.ring_start[ri]
        hi = pack.ring_start[ri + 1]
        for e in range(lo, hi - 1):
            x1, y1 = pack.vx[e], pack.vy[e]
            x2, y2 = pack.vx[e + 1], pack.vy[e + 1]
            cross = (x2 - x1) * (ys - y1) - (xs - x1) * (y2 - y1)
            onseg = (
                (np.abs(cross) <= BOUNDARY_EPS)
                & (xs >= min(x1, x2) - BOUNDARY_EPS)
                & (xs <= max(x1, x2) + BOUNDARY_EPS)
                & (ys >= min(y1, y2) - BOUNDARY_EPS)
                & (ys <= max(y1, y2) + BOUNDARY_EPS)
            )
            boundary |= onseg
            straddles = (y1 > ys) != (y2 > ys)
            if y1 != y2:
                xint = x1 + (ys - y1) * (x2 - x1) / (y2 - y1)
                inside ^= straddles & (xs < xint)
    return inside | boundary


def contains(pack: ZonePack, zi: int, x: float, y: float) -> bool:
    return bool(contains_many(pack, zi, np.array([x]), np.array([y]))[0])


def assign(pack: ZonePack, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Map each point to the first containing zone index, or -1 if none."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    out = np.full(xs.shape, -1, dtype=np.int64)
    unassigned = np.ones(xs.shape, dtype=bool)
    for zi in range(pack.n_zones):
        if not unassigned.any():
            break
        x0, y0, x1, y1 = pack.bbox[zi]
        cand = (
            unassigned
            & (xs >= x0 - BOUNDARY_EPS)
            & (xs <= x1 + BOUNDARY_EPS)
            & (ys >= y0 - BOUNDARY_EPS)
            & (ys <= y1 + BOUNDARY_EPS)
        )
        idx = np.nonzero(cand)[0]
        if idx.size == 0:
            continue
        hit = contains_many(pack, zi, xs[idx], ys[idx])
        won = idx[hit]
        out[won] = zi
        unassigned[won] = False
    return out
