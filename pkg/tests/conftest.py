import os

import pytest

from plasmodis.grid import build_grid
from plasmodis.molecule import SurrogateParams, surrogate_molecule
from plasmodis.plasmon import mode_from_values
from plasmodis.system import CAPConfig, assemble

# user-supplied digitized H2 curve tables (see README); the published-number
# acceptance tests skip when they are absent
H2_DATA_DIR = os.path.join(os.path.dirname(__file__), "..", "data", "h2")
H2_FILES = {
    "vx": os.path.join(H2_DATA_DIR, "v_x.dat"),
    "vb": os.path.join(H2_DATA_DIR, "v_b.dat"),
    "dip": os.path.join(H2_DATA_DIR, "mu_xb.dat"),
}


def h2_data_present():
    return all(os.path.exists(p) for p in H2_FILES.values())


requires_h2_data = pytest.mark.skipif(
    not h2_data_present(),
    reason="digitized H2 curve tables not present in data/h2/",
)


@pytest.fixture(scope="session")
def small_grid():
    """Small box with an active absorber, cheap enough for the dense oracle."""
    return build_grid(0.5, 9.0, 12, 5)   # n_basis = 47


@pytest.fixture(scope="session")
def small_model(small_grid):
    return surrogate_molecule(SurrogateParams(), small_grid)


@pytest.fixture(scope="session")
def small_cap():
    return CAPConfig(strength=1e-4, r_abs=6.0)


@pytest.fixture(scope="session")
def default_mode():
    return mode_from_values(6.4, 0.476, 70.0)


@pytest.fixture(scope="session")
def small_ops(small_model, default_mode, small_cap):
    return assemble(small_model, default_mode, small_cap)
