import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cantilever.kernel import Grid
from cantilever.nonlinearity import parse_spec, power_quadratic, saturated_linear

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# filled by tests/test_acceptance.py, printed after the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture(scope="session")
def grid():
    return Grid(256)


@pytest.fixture(scope="session")
def sat():
    """4600 u up to 0.03, then 138."""
    return saturated_linear()


@pytest.fixture(scope="session")
def zero():
    return parse_spec("[0,inf): 0")


@pytest.fixture(scope="session")
def one():
    return parse_spec("[0,inf): 1")


@pytest.fixture(scope="session")
def pq5():
    return power_quadratic(0.5, 5.0)


def quartic(t):
    """Solution of u'''' = 1 with the cantilever conditions."""
    t = np.asarray(t, dtype=float)
    return (t**4 - 4 * t**3 + 6 * t**2) / 24
