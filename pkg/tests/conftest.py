from fractions import Fraction

import pytest
from hypothesis import settings

from painleve_lab.linearization import solve_conjugation
from painleve_lab.maps import MapSpec

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")

HALF = Fraction(1, 2)
QUARTER = Fraction(1, 4)


@pytest.fixture(scope="session")
def logistic_half():
    return MapSpec.logistic(HALF)


@pytest.fixture(scope="session")
def cd64(logistic_half):
    return solve_conjugation(logistic_half, order=64, bits=512)


@pytest.fixture(scope="session")
def cd128(logistic_half):
    return solve_conjugation(logistic_half, order=128, bits=512)


@pytest.fixture(scope="session")
def frel_half():
    from painleve_lab.julia import solve_frel_series

    return solve_frel_series(HALF)


@pytest.fixture(scope="session")
def borel_grid():
    from painleve_lab.borel import default_grid

    return default_grid()
