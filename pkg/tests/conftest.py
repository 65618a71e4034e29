import numpy as np
import pytest

from henoncover import build_chart, certify_region, filtration_radius, make_henon


@pytest.fixture(scope="session")
def href():
    """Reference quadratic map (y, y^2 - 1.1 - 0.8 x)."""
    return make_henon([([-1.1, 0, 1], 0.8)])


@pytest.fixture(scope="session")
def hcubic():
    """Odd cubic map (y, y^3 - 0.5 x) with the (-x, -y) symmetry."""
    return make_henon([([0, 0, 0, 1], 0.5)])


@pytest.fixture(scope="session")
def htwo():
    """Two quadratic factors: d = 4, d' = 2."""
    return make_henon([([-0.1, 0, 1], 1.0), ([0.05, 0, 1], 0.9)])


@pytest.fixture(scope="session")
def href_radius(href):
    return filtration_radius(href)


@pytest.fixture(scope="session")
def href_region(href):
    return certify_region(href)


@pytest.fixture(scope="session")
def href_chart(href):
    return build_chart(href)


@pytest.fixture(scope="session")
def htwo_chart(htwo):
    return build_chart(htwo)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240811)
