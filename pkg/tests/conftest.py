import json
from datetime import date, datetime

import pytest

from zonepulse.config import PipelineConfig
from zonepulse.evaluate import EventScale
from zonepulse.geo import load_zones
from zonepulse.simulate import EventSpec, SimConfig, _leads, generate


def square_feature(zone_id, x0, y0, size=1.0):
    ring = [
        [x0, y0], [x0 + size, y0], [x0 + size, y0 + size], [x0, y0 + size], [x0, y0],
    ]
    return {
        "type": "Feature",
        "properties": {"zone_id": zone_id},
        "geometry": {"type": "Polygon", "coordinates": [ring]},
    }


def feature_collection(*features):
    return json.dumps({"type": "FeatureCollection", "features": list(features)})


@pytest.fixture
def unit_square_zones():
    return load_zones(feature_collection(square_feature("A", 0.0, 0.0)))


@pytest.fixture
def adjacent_squares():
    # B shares the x=1 edge with A
    return load_zones(
        feature_collection(square_feature("A", 0.0, 0.0), square_feature("B", 1.0, 0.0))
    )


def tiny_event(zone="Z0101", start=datetime(2017, 5, 31, 19, 30), attendance=600):
    return EventSpec(
        event_id="E1",
        name="Test Concert",
        venue_zone=zone,
        start=start,
        duration_minutes=120,
        attendance=attendance,
        scale=EventScale.LARGE,
        lead_minutes=_leads(),
        spatial_decay_m=200.0,
        hashtag="testconcert",
    )


def tiny_config(seed=3, days=21, events=None, **kwargs):
    return SimConfig(
        seed=seed,
        start_date=date(2017, 5, 15),
        days=days,
        grid_rows=3,
        grid_cols=3,
        events=tuple(events) if events else (),
        **kwargs,
    )


@pytest.fixture(scope="session")
def tiny_dataset(tmp_path_factory):
    """One small simulated city with a single strong event; shared read-only."""
    out = tmp_path_factory.mktemp("tiny_sim")
    cfg = SimConfig(
        seed=3,
        start_date=date(2017, 5, 15),
        days=21,
        grid_rows=3,
        grid_cols=3,
        events=(tiny_event(),),
    )
    generate(cfg, out)
    return out, cfg


@pytest.fixture(scope="session")
def tiny_pipeline(tiny_dataset):
    """tiny_dataset with the full pipeline (ingest..fuse) already run."""
    from zonepulse import pipeline

    data_dir, sim_cfg = tiny_dataset
    config = PipelineConfig()
    pipeline.run_ingest(data_dir, config)
    pipeline.run_fit(data_dir, config)
    pipeline.run_detect(data_dir, config)
    pipeline.run_fuse(data_dir, config, ["majority", "mean"], 0.6)
    return data_dir, sim_cfg, config
