import os

import numpy as np
import pytest

from app.config import SolverConfig
from app.services.potentials import make_tabulated, save_tabulated

WELL_DEPTH = 2.0
WELL_HALF_WIDTH = 1.0


def square_well():
    """v = -2 on |x| < 1: samples inside the well, the table's ends are the steps"""
    xs = np.linspace(-WELL_HALF_WIDTH, WELL_HALF_WIDTH, 9)
    return make_tabulated(xs, np.full(xs.size, -WELL_DEPTH), symmetric=True, source="well.csv")


@pytest.fixture(scope="session")
def solver_cfg():
    return SolverConfig()


@pytest.fixture
def well_file(tmp_path):
    return save_tabulated(tmp_path / "well.csv", square_well())


@pytest.fixture
def isolated_env(tmp_path, monkeypatch):
    """Run from an empty directory with no LEVWB_ variables set"""
    monkeypatch.chdir(tmp_path)
    for name in list(os.environ):
        if name.upper().startswith("LEVWB_"):
            monkeypatch.delenv(name)
    return tmp_path


@pytest.fixture(scope="session")
def well():
    return square_well()
