"""Benchmark the compiled point-in-zone kernel against the NumPy fallback.

Run:  python3 benchmarks/bench_kernels.py [--points N] [--zones GRID]

Point-to-zone assignment dominates ingestion of taxi and check-in records,
so this is the package's hot loop. The two backends implement the same
contract; this script checks agreement and reports throughput for both.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from zonepulse import _kernels_py


def build_grid_pack(side: int):
    rings = []
    for r in range(side):
        for c in range(side):
            ring = np.array(
                [
                    [c, r],
                    [c + 1.0, r],
                    [c + 1.0, r + 1.0],
                    [c, r + 1.0],
                    [c, r],
                ],
                dtype=np.float64,
            )
            rings.append([ring])
    return _kernels_py.ZonePack(rings)


def bench(fn, pack, xs, ys, repeats: int) -> tuple[float, np.ndarray]:
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(pack, xs, ys)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=500_000)
    parser.add_argument("--zones", type=int, default=8, help="grid side length")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    pack = build_grid_pack(args.zones)
    xs = rng.uniform(-0.5, args.zones + 0.5, args.points)
    ys = rng.uniform(-0.5, args.zones + 0.5, args.points)

    backends = [("python", _kernels_py.assign)]
    try:
        from zonepulse import _kernels_cy

        backends.append(("cython", _kernels_cy.assign))
    except ImportError:
        print("compiled backend not built; benchmarking the fallback only")

    results = {}
    for name, fn in backends:
        seconds, out = bench(fn, pack, xs, ys, args.repeats)
        results[name] = (seconds, out)
        rate = args.points / seconds / 1e6
        print(f"{name:>7}: {seconds * 1e3:8.1f} ms   {rate:6.2f} M points/s")

    if len(results) == 2:
        agree = np.array_equal(results["python"][1], results["cython"][1])
        ratio = results["python"][0] / results["cython"][0]
        print(f"agreement: {agree}   speedup: {ratio:.1f}x")
        if not agree:
            raise SystemExit(1)


if __name__ == "__main__":
    main()
