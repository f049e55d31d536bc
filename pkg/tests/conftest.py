import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from besovflux.grid import TorusGrid

settings.register_profile(
    "default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def grid2():
    return TorusGrid(2, 64)


@pytest.fixture(scope="session")
def grid3():
    return TorusGrid(3, 32)


def rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.abs(a - b).max() / max(np.abs(b).max(), 1e-300))
