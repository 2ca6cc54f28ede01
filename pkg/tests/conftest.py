import numpy as np
import pytest

from spinning_charge.external import ExternalField
from spinning_charge.grid import GridSpec
from spinning_charge.simulation import SimConfig, run

REF_GRID = GridSpec(32, 16.0)
REF_EXT = ExternalField("uniform_b", b=1.0)
REF_V0 = (0.2, 0.0, 0.1)
REF_W0 = (0.3, -0.2, 1.0)


def reference_config(**kw):
    """Fully coupled desk-scale run: N=32, L=16, sigma=1, dt=h/4, t_end=5."""
    base = dict(grid=REF_GRID, external=REF_EXT, v0=REF_V0, omega0=REF_W0,
                dt=REF_GRID.h / 4, t_end=5.0)
    base.update(kw)
    return SimConfig(**base)


@pytest.fixture(scope="session")
def grid():
    return REF_GRID


@pytest.fixture(scope="session")
def reference_run():
    return run(reference_config())


@pytest.fixture(scope="session")
def short_run():
    """Coupled solution over t in [0, 2], every step sampled."""
    return run(reference_config(t_end=2.0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
