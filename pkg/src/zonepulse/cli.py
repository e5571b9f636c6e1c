"""Command-line interface for the full pipeline.

Subcommands: simulate, ingest, fit, detect, fuse, eval, sweep, granger,
normality, annotate, serve. All steps operate on a data directory holding
the raw CSV/GeoJSON inputs; derived artifacts live in its ``artifacts/``
subdirectory. Exit codes: 0 ok, 1 data error, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from datetime import date
from pathlib import Path

from . import pipeline
from .config import load_config, override
from .errors import ZonePulseError
from .evaluate import DEFAULT_R_GRID
from .ingest import Source
from .simulate import generate, scenario_library


def _parse_range(text: str) -> list[float]:
    """``a:b:step`` inclusive grid, or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"range must be a:b:step, got {text!r}")
        lo, hi, step = (float(p) for p in parts)
        if step <= 0 or hi < lo:
            raise argparse.ArgumentTypeError(f"bad range {text!r}")
        out = []
        v = lo
        while v <= hi + 1e-9:
            out.append(round(v, 9))
            v += step
        return out
    return [float(p) for p in text.split(",") if p]


def _parse_sources(text: str) -> list[Source]:
    try:
        return [Source(p.strip()) for p in text.split(",") if p.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zonepulse",
        description="Multimodal urban occupancy anomaly detection and event evaluation",
    )
    parser.add_argument("--config", help="YAML config file", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic-city dataset")
    p.add_argument("--scenario", required=True, choices=sorted(scenario_library()))
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("ingest", help="parse raw files into occupancy series")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--coarse", action="store_true", help="rebin CDR into 5 named bins")

    p = sub.add_parser("fit", help="fit per-key normalcy models")
    p.add_argument("--data-dir", required=True)

    p = sub.add_parser("detect", help="run anomaly detectors")
    p.add_argument("--data-dir", required=True)
    p.add_argument(
        "--method",
        default="all",
        choices=["zscore", "iqr", "shesd", "all"],
    )
    p.add_argument("--threshold", type=float, default=None, help="z-score threshold")

    p = sub.add_parser("fuse", help="fuse per-source scores into joint decisions")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--method", default="majority",
                   help="comma list of weighted,mean,majority")
    p.add_argument("--S", dest="s_threshold", type=float, required=True,
                   help="normalized-score threshold in [0,1]")
    p.add_argument("--k", type=int, default=None, help="votes needed (majority)")
    p.add_argument("--sources", type=_parse_sources, default=None)

    p = sub.add_parser("eval", help="recall curves against ground-truth events")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--detector", default="zscore", choices=["zscore", "iqr", "shesd"])
    p.add_argument("--R", dest="r_grid", type=_parse_range, default=list(DEFAULT_R_GRID))
    p.add_argument("--offset", type=int, default=0, choices=[0, -1],
                   help="window: event start hour (0) or the hour prior (-1)")
    p.add_argument("--both-offsets", action="store_true")
    p.add_argument("--sources", type=_parse_sources, default=None)
    p.add_argument("--include-fused", action="store_true")

    p = sub.add_parser("sweep", help="recall grid over R and S")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--methods", default="mean,majority")
    p.add_argument("--R", dest="r_values", type=_parse_range, default=[500, 1000, 1500, 2000])
    p.add_argument("--S", dest="s_values", type=_parse_range, default=[0.7, 0.8, 0.9])
    p.add_argument("--offset", type=int, default=0, choices=[0, -1])
    p.add_argument("--k", type=int, default=None)

    p = sub.add_parser("granger", help="pairwise Granger-causality tests")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--lag", type=int, default=1)
    p.add_argument("--per-zone", action="store_true")

    p = sub.add_parser("normality", help="Shapiro-Wilk per (location, hour)")
    p.add_argument("--data-dir", required=True)

    p = sub.add_parser("annotate", help="TF-IDF terms for one anomaly cell")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--zone", required=True)
    p.add_argument("--date", required=True)
    p.add_argument("--bin", type=int, required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--out", default=None, help="write JSON here instead of stdout")

    p = sub.add_parser("serve", help="serve pipeline artifacts over HTTP")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--port", type=int, default=8808)
    p.add_argument("--host", default="127.0.0.1")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        if args.command == "simulate":
            cfg = scenario_library()[args.scenario]
            if args.seed is not None:
                from dataclasses import replace

                cfg = replace(cfg, seed=args.seed)
            out = generate(cfg, args.out)
            print(f"wrote {len(out.files)} files to {out.out_dir}")
        elif args.command == "ingest":
            config = override(config, coarse=args.coarse or None)
            meta = pipeline.run_ingest(args.data_dir, config)
            print(f"ingested sources: {', '.join(sorted(meta['sources']))}")
        elif args.command == "fit":
            n = pipeline.run_fit(args.data_dir, config)
            print(f"fit {n} models")
        elif args.command == "detect":
            config = override(config, z_threshold=args.threshold)
            methods = ["zscore", "iqr", "shesd"] if args.method == "all" else [args.method]
            summary = pipeline.run_detect(args.data_dir, config, methods)
            print(json.dumps(summary, sort_keys=True))
        elif args.command == "fuse":
            methods = [m.strip() for m in args.method.split(",") if m.strip()]
            counts = pipeline.run_fuse(
                args.data_dir, config, methods, args.s_threshold,
                k=args.k, enabled=args.sources,
            )
            print(json.dumps(counts, sort_keys=True))
        elif args.command == "eval":
            offsets = (0, -1) if args.both_offsets else (args.offset,)
            curves = pipeline.run_eval(
                args.data_dir, config,
                detector=args.detector, offsets=offsets, r_grid=args.r_grid,
                sources=args.sources, include_fused=args.include_fused,
            )
            print(f"wrote {len(curves)} curves ({sum(len(c.points) for c in curves)} points)")
        elif args.command == "sweep":
            methods = [m.strip() for m in args.methods.split(",") if m.strip()]
            cells = pipeline.run_sweep(
                args.data_dir, config, methods, args.r_values, args.s_values,
                offset_hours=args.offset, k=args.k,
            )
            print(f"wrote {len(cells)} sweep cells")
        elif args.command == "granger":
            summary = pipeline.run_granger(
                args.data_dir, config, lag=args.lag, per_zone=args.per_zone
            )
            print(json.dumps(summary, sort_keys=True, default=str))
        elif args.command == "normality":
            summary = pipeline.run_normality(args.data_dir, config)
            print(json.dumps(summary, sort_keys=True))
        elif args.command == "annotate":
            terms = pipeline.run_annotate(
                args.data_dir, config, args.zone, date.fromisoformat(args.date),
                args.bin, k=args.k,
            )
            blob = json.dumps(terms, indent=2)
            if args.out:
                Path(args.out).write_text(blob)
            else:
                print(blob)
        elif args.command == "serve":
            from .server import serve_forever

            serve_forever(args.data_dir, config, host=args.host, port=args.port)
        else:  # pragma: no cover
            parser.error(f"unknown command {args.command}")
    except (ZonePulseError, FileNotFoundError, KeyError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
