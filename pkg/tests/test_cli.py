import json
from pathlib import Path

import pytest

from zonepulse import artifacts as art
from zonepulse.cli import main
from zonepulse.pipeline import artifact_paths


class TestUsageErrors:
    def test_unknown_flag_exits_2(self, capsys):
        with pytest.raises(SystemExit) as err:
            main(["ingest", "--does-not-exist", "x"])
        assert err.value.code == 2

    def test_unknown_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as err:
            main(["frobnicate"])
        assert err.value.code == 2

    def test_missing_scenario_choice(self):
        with pytest.raises(SystemExit) as err:
            main(["simulate", "--scenario", "nope", "--out", "/tmp/x"])
        assert err.value.code == 2


class TestDataErrors:
    def test_missing_data_dir_exits_1(self, tmp_path, capsys):
        rc = main(["ingest", "--data-dir", str(tmp_path / "void")])
        assert rc == 1
        assert "error:" in capsys.readouterr().err

    def test_fuse_before_detect_exits_1(self, tmp_path, capsys):
        rc = main(["fuse", "--data-dir", str(tmp_path), "--S", "0.6"])
        assert rc == 1


class TestPipelineContract:
    def test_full_chain_produces_recall_csv(self, tiny_pipeline):
        data_dir, _sim_cfg, _config = tiny_pipeline
        rc = main(
            [
                "eval", "--data-dir", str(data_dir),
                "--R", "0:4000:250", "--offset", "-1",
                "--sources", "CDR",
            ]
        )
        assert rc == 0
        rows = art.read_recall(artifact_paths(data_dir).recall)
        assert len(rows) == 17  # 0..4000 step 250
        assert [r for _, _, r, _ in rows] == sorted({r for _, _, r, _ in rows})

    def test_detect_cli_matches_library(self, tiny_pipeline, tmp_path):
        from zonepulse.detect import detect_zscore
        from zonepulse.normalcy import normalize_scores, score_series
        from zonepulse import artifacts

        data_dir, _, config = tiny_pipeline
        paths = artifact_paths(data_dir)
        rc = main(["detect", "--data-dir", str(data_dir), "--method", "zscore",
                   "--threshold", "3"])
        assert rc == 0
        from zonepulse.detect import Detector

        decisions = artifacts.read_decisions(paths.decisions(Detector.ZSCORE))
        series = artifacts.read_occupancy(paths.occupancy)
        models = artifacts.read_models(paths.models)
        scored, _ = score_series(series, models)
        expected = detect_zscore(normalize_scores(scored), threshold=3.0)
        got_flags = {(d.key, d.date) for d in decisions if d.is_anomaly}
        want_flags = {(d.key, d.date) for d in expected if d.is_anomaly}
        assert got_flags == want_flags

    def test_annotate_outputs_json(self, tiny_pipeline, tmp_path, capsys):
        data_dir, sim_cfg, _ = tiny_pipeline
        out_file = tmp_path / "terms.json"
        rc = main(
            [
                "annotate", "--data-dir", str(data_dir),
                "--zone", "Z0101", "--date", "2017-05-31", "--bin", "77",
                "--k", "5", "--out", str(out_file),
            ]
        )
        assert rc == 0
        terms = json.loads(out_file.read_text())
        assert terms and {"term", "score"} <= set(terms[0])
        assert any(t["term"] == "testconcert" for t in terms)

    def test_coarse_mode_pipeline(self, tiny_dataset, tmp_path):
        import shutil

        from zonepulse import artifacts
        from zonepulse.detect import Detector
        from zonepulse.ingest import Source

        src_dir, _ = tiny_dataset
        data_dir = tmp_path / "coarse"
        data_dir.mkdir()
        for name in ("cdr.csv", "zones.geojson", "events.csv"):
            shutil.copy(src_dir / name, data_dir / name)

        assert main(["ingest", "--data-dir", str(data_dir), "--coarse"]) == 0
        assert main(["fit", "--data-dir", str(data_dir)]) == 0
        assert main(["detect", "--data-dir", str(data_dir), "--method", "iqr"]) == 0

        paths = artifact_paths(data_dir)
        series = artifacts.read_occupancy(paths.occupancy)
        cdr_bins = {k.bin_of_day for k in series if k.source is Source.CDR}
        assert cdr_bins == {0, 1, 2, 3, 4}
        decisions = artifacts.read_decisions(paths.decisions(Detector.IQR))
        assert decisions

        rc = main(
            ["eval", "--data-dir", str(data_dir), "--detector", "iqr",
             "--sources", "CDR", "--R", "0:4000:1000", "--offset", "0"]
        )
        assert rc == 0
        rows = art.read_recall(paths.recall)
        assert len(rows) == 5

    def test_simulate_cli_writes_manifest(self, tmp_path):
        rc = main(
            ["simulate", "--scenario", "baseline-quiet", "--seed", "5", "--out",
             str(tmp_path / "sim")]
        )
        assert rc == 0
        manifest = json.loads((tmp_path / "sim" / "manifest.json").read_text())
        assert manifest["seed"] == 5
        assert "config_sha256" in manifest
        for name in manifest["files"]:
            assert (tmp_path / "sim" / name).exists()

    def test_config_yaml_round_trip(self, tiny_pipeline, tmp_path):
        data_dir, _, _ = tiny_pipeline
        cfg = tmp_path / "cfg.yaml"
        cfg.write_text("z_threshold: 4.0\nk: 2\n")
        rc = main(["--config", str(cfg), "detect", "--data-dir", str(data_dir),
                   "--method", "zscore"])
        assert rc == 0

    def test_weighted_fusion_via_config(self, tiny_pipeline, tmp_path):
        data_dir, _, _ = tiny_pipeline
        cfg = tmp_path / "weights.yaml"
        cfg.write_text(
            "weights:\n  CDR: 0.8\n  TAXI_DROPOFF: 0.1\n  CHECKIN: 0.1\n"
        )
        rc = main(["--config", str(cfg), "fuse", "--data-dir", str(data_dir),
                   "--method", "weighted", "--S", "0.6"])
        assert rc == 0
        from zonepulse import artifacts

        fused = artifacts.read_fused(artifact_paths(data_dir).fused)
        assert "weighted" in fused and fused["weighted"]
        # restore the shared fixture's fused artifact for later tests
        from zonepulse.config import PipelineConfig
        from zonepulse import pipeline as pl

        pl.run_fuse(data_dir, PipelineConfig(), ["majority", "mean"], 0.6)

    def test_bad_config_key_exits_1(self, tiny_pipeline, tmp_path, capsys):
        data_dir, _, _ = tiny_pipeline
        cfg = tmp_path / "cfg.yaml"
        cfg.write_text("zzz_threshold: 4.0\n")
        rc = main(["--config", str(cfg), "fit", "--data-dir", str(data_dir)])
        assert rc == 1
