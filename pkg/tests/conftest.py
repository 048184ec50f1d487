from pathlib import Path

import pytest

from oamnet.network.topology import four_user_network

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "scenarios"


@pytest.fixture(scope="session")
def four_user():
    return four_user_network()


@pytest.fixture
def scenario_dir() -> Path:
    return SCENARIO_DIR
