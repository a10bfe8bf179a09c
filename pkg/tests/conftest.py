import json
from pathlib import Path

import pytest

from vdistill.io import load_fixture

ORACLES = Path(__file__).parent / "oracles"
PRIMARY = ("h2_2q_2.00", "h3_3q_2.00", "h2_4q_2.00")


def load_oracle(name):
    return json.loads((ORACLES / name).read_text())


@pytest.fixture(scope="session")
def fixtures():
    return {name: load_fixture(name) for name in PRIMARY}


@pytest.fixture(scope="session")
def depol_oracle():
    return load_oracle("depol_sweeps.json")


@pytest.fixture(scope="session")
def paper_circuits():
    return load_oracle("paper_circuits.json")
