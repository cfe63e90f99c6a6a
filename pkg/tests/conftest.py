from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for oracles.py

from chargeplan.ingest import load_scenario
from chargeplan.synth import benchmark24, toy_scenario

DATA = Path(__file__).parent.parent / "src" / "chargeplan" / "data"


@pytest.fixture(scope="session")
def toy():
    return toy_scenario()


@pytest.fixture(scope="session")
def bench24():
    return benchmark24()


@pytest.fixture(scope="session")
def toy_dir():
    return DATA / "toy"


@pytest.fixture(scope="session")
def bench24_dir():
    return DATA / "benchmark24"


@pytest.fixture(scope="session")
def toy_loaded():
    return load_scenario(DATA / "toy")
