import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from lorentz_orbits import catalog, potentials

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# Lines recorded by the acceptance suite, echoed in the terminal summary.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def pulse():
    return catalog.make("gaussian_pulse", 1.0)


@pytest.fixture(scope="session")
def zero_pair():
    return catalog.make("zero", 1.0)


@pytest.fixture(scope="session")
def slow_envelope_pair():
    """Gaussian well of width 1 under a pulse whose envelope is exp(-|x|^2 / 8)."""
    return potentials.combine(
        catalog.make("gaussian_pulse", 1.0, width=math.sqrt(8.0)), catalog.make("gaussian_well", 1.0)
    )
