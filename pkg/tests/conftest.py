import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from rotground.geometry import rotation_polytope_periodic
from rotground.polygon_example import example1_potential, preset
from rotground.symbolic import PotentialTable

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def prop55():
    return preset("prop55", 10)


@pytest.fixture(scope="session")
def prop56():
    return preset("prop56", 10)


@pytest.fixture(scope="session")
def table55(prop55):
    return example1_potential(prop55)


@pytest.fixture(scope="session")
def table56(prop56):
    return example1_potential(prop56)


@pytest.fixture(scope="session")
def poly55(table55):
    return rotation_polytope_periodic(table55, 9)


@pytest.fixture
def bernoulli():
    """Range-1 potential on two symbols with values 0 and 1."""
    return PotentialTable(2, 1, [[0.0], [1.0]])


@pytest.fixture
def simplex():
    return PotentialTable(2, 1, [[1.0, 0.0], [0.0, 1.0]])


def random_table(rng, q, r, m=1, scale=1.0):
    return PotentialTable(q, r, scale * rng.normal(size=(q**r, m)))
