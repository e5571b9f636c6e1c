"""Record HTTP API responses from a concert-large snapshot for the dashboard.

The frontend's contract tests replay these fixtures instead of a live
server, so every number the UI shows is pinned to real API output.

Run:  python3 tools/record_fixtures.py [--out frontend/fixtures]
"""
from __future__ import annotations

import argparse
import json
import shutil
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from zonepulse import pipeline
from zonepulse.config import PipelineConfig
from zonepulse.server import SnapshotStore, create_app, load_snapshot
from zonepulse.simulate import generate, scenario_library


def record(out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    work = Path(tempfile.mkdtemp(prefix="zonepulse-fixtures-"))
    try:
        config = PipelineConfig()
        generate(scenario_library()["concert-large"], work)
        pipeline.run_ingest(work, config)
        pipeline.run_fit(work, config)
        pipeline.run_detect(work, config, ["zscore"])

        store = SnapshotStore(load_snapshot(work, config))
        client = TestClient(create_app(store))

        def save(name: str, payload) -> None:
            (out_dir / name).write_text(json.dumps(payload, indent=1, sort_keys=True))
            print(f"wrote {out_dir / name}")

        save("meta.json", client.get("/meta").json())
        save("zones.json", client.get("/zones").json())
        save("events.json", client.get("/events").json())
        save("sunburst.json", client.get("/sunburst", params={"detector": "zscore"}).json())
        save(
            "anomalies_zscore.json",
            client.get("/anomalies", params={"detector": "zscore"}).json(),
        )

        # R-slider sweep for the what-if panel (must render non-decreasing)
        sweep = []
        for r in range(0, 4001, 250):
            body = client.get(
                "/recall",
                params={"R": r, "offset": 0, "method": "majority", "S": 0.6, "k": 2},
            ).json()
            sweep.append({"R_m": body["R_m"], "recall": body["recall"]})
        save("recall_sweep_majority.json", sweep)

        save(
            "fused_all_sources.json",
            client.get("/fused", params={"method": "majority", "S": 0.6, "k": 2}).json(),
        )

        # weight-1-on-CDR sweep: must equal the single-channel curve the
        # weighted panel shows when a source's slider is pushed to 1
        weights = "CDR:1.0,CHECKIN:0.0,TAXI_DROPOFF:0.0"
        weighted_sweep = []
        for r in range(0, 4001, 500):
            body = client.get(
                "/recall",
                params={"R": r, "offset": 0, "method": "weighted", "S": 0.6,
                        "weights": weights},
            ).json()
            weighted_sweep.append({"R_m": body["R_m"], "recall": body["recall"]})
        save("recall_sweep_weighted_cdr_only.json", weighted_sweep)

        # single-channel baseline for the weighted identity: only CDR enabled,
        # any anomaly votes (k=1) -> exactly CDR's thresholded decisions
        put = client.put("/config/sources", json={"enabled": ["CDR"]})
        assert put.status_code == 200, put.text
        single_sweep = []
        for r in range(0, 4001, 500):
            body = client.get(
                "/recall",
                params={"R": r, "offset": 0, "method": "majority", "S": 0.6, "k": 1},
            ).json()
            single_sweep.append({"R_m": body["R_m"], "recall": body["recall"]})
        save("recall_sweep_cdr_single.json", single_sweep)

        # disable CHECKIN through the API, then re-query fused decisions
        put = client.put("/config/sources", json={"enabled": ["CDR", "TAXI_DROPOFF"]})
        assert put.status_code == 200, put.text
        save(
            "fused_no_checkin.json",
            client.get("/fused", params={"method": "majority", "S": 0.6, "k": 2}).json(),
        )

        # the same fusion straight from the pipeline (fresh run on one config),
        # for the dashboard's disable-one-source contract test
        from zonepulse.ingest import Source

        pipeline.run_fuse(
            work,
            config,
            ["majority"],
            0.6,
            k=2,
            enabled=[Source.CDR, Source.TAXI_DROPOFF],
        )
        from zonepulse import artifacts as art

        fused = art.read_fused(pipeline.artifact_paths(work).fused)["majority"]
        save(
            "cli_fused_no_checkin.json",
            [
                {
                    "zone_id": f.location_id,
                    "date": f.date.isoformat(),
                    "bin_of_day": f.bin_of_day,
                    "votes": f.votes,
                }
                for f in fused
                if f.is_anomaly
            ],
        )

        # word-cloud fixture for a concert arrival-ramp cell (19:15 -> bin 77)
        save(
            "annotations_concert.json",
            client.get(
                "/annotations",
                params={"zone": "Z0202", "date": "2017-06-30", "bin": 77, "k": 12},
            ).json(),
        )
    finally:
        shutil.rmtree(work, ignore_errors=True)


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="frontend/fixtures")
    args = parser.parse_args()
    record(Path(args.out))
