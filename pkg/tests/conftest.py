import random
from pathlib import Path

import pytest

from polyquery.engine import Engine

REPO_ROOT = Path(__file__).resolve().parent.parent
DEMO_DATA = REPO_ROOT / "data"


@pytest.fixture
def trips_engine(tmp_path) -> Engine:
    """Small fixed trips/zones corpus registered in a fresh data dir."""
    (tmp_path / "trips.csv").write_text(
        "trip_id,city,fare,duration\n"
        "1,a,10.5,30\n"
        "2,a,20.0,45\n"
        "3,b,7.25,12\n"
        "4,b,,20\n"
        "5,c,33.0,90\n"
    )
    (tmp_path / "zones.csv").write_text("city,zone\na,north\nb,south\nc,east\n")
    engine = Engine(tmp_path, workers=2)
    engine.load_table("trips", tmp_path / "trips.csv")
    engine.load_table("zones", tmp_path / "zones.csv")
    return engine


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0xC0FFEE)
