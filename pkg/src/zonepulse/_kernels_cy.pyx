# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled geometry kernels; same contract as ``_kernels_py``."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef double BOUNDARY_EPS = 1e-12


cdef bint _zone_contains(const double[::1] vx, const double[::1] vy,
                         const long long[::1] ring_start,
                         long long r_lo, long long r_hi,
                         double px, double py) nogil:
    cdef long long ri, e, lo, hi
    cdef double x1, y1, x2, y2, cross, xint, xmin, xmax, ymin, ymax
    cdef bint inside = 0
    for ri in range(r_lo, r_hi):
        lo = ring_start[ri]
        hi = ring_start[ri + 1]
        for e in range(lo, hi - 1):
            x1 = vx[e]; y1 = vy[e]
            x2 = vx[e + 1]; y2 = vy[e + 1]
            cross = (x2 - x1) * (py - y1) - (px - x1) * (y2 - y1)
            if cross <= BOUNDARY_EPS and cross >= -BOUNDARY_EPS:
                xmin = x1 if x1 < x2 else x2
                xmax = x1 if x1 > x2 else x2
                ymin = y1 if y1 < y2 else y2
                ymax = y1 if y1 > y2 else y2
                if (px >= xmin - BOUNDARY_EPS and px <= xmax + BOUNDARY_EPS
                        and py >= ymin - BOUNDARY_EPS and py <= ymax + BOUNDARY_EPS):
                    return 1
            if (y1 > py) != (y2 > py):
                xint = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
                if px < xint:
                    inside = not inside
    return inside


def contains(pack, long long zi, double x, double y):
    cdef const double[::1] vx = pack.vx
    cdef const double[::1] vy = pack.vy
    cdef const long long[::1] ring_start = pack.ring_start
    cdef const long long[::1] zone_ring_start = pack.zone_ring_start
    return bool(_zone_contains(vx, vy, ring_start,
                               zone_ring_start[zi], zone_ring_start[zi + 1], x, y))


def contains_many(pack, long long zi, xs, ys):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pxs = np.ascontiguousarray(xs, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pys = np.ascontiguousarray(ys, dtype=np.float64)
    cdef const double[::1] vx = pack.vx
    cdef const double[::1] vy = pack.vy
    cdef const long long[::1] ring_start = pack.ring_start
    cdef const long long[::1] zone_ring_start = pack.zone_ring_start
    cdef long long n = pxs.shape[0], i
    cdef cnp.ndarray[cnp.uint8_t, ndim=1, cast=True] out = np.zeros(n, dtype=bool)
    cdef long long r_lo = zone_ring_start[zi], r_hi = zone_ring_start[zi + 1]
    for i in range(n):
        out[i] = _zone_contains(vx, vy, ring_start, r_lo, r_hi, pxs[i], pys[i])
    return out


def assign(pack, xs, ys):
    """Map each point to the first containing zone index, or -1 if none."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pxs = np.ascontiguousarray(xs, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pys = np.ascontiguousarray(ys, dtype=np.float64)
    cdef const double[::1] vx = pack.vx
    cdef const double[::1] vy = pack.vy
    cdef const long long[::1] ring_start = pack.ring_start
    cdef const long long[::1] zone_ring_start = pack.zone_ring_start
    cdef const double[:, ::1] bbox = pack.bbox
    cdef long long n_zones = pack.n_zones
    cdef long long n = pxs.shape[0], i, zi
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.full(n, -1, dtype=np.int64)
    cdef double px, py
    for i in range(n):
        px = pxs[i]; py = pys[i]
        for zi in range(n_zones):
            if (px < bbox[zi, 0] - BOUNDARY_EPS or px > bbox[zi, 2] + BOUNDARY_EPS
                    or py < bbox[zi, 1] - BOUNDARY_EPS or py > bbox[zi, 3] + BOUNDARY_EPS):
                continue
            if _zone_contains(vx, vy, ring_start,
                              zone_ring_start[zi], zone_ring_start[zi + 1], px, py):
                out[i] = zi
                break
    return out
