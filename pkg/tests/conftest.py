import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mhdcrit.grid import Grid

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# filled by tests/test_acceptance.py, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def grid16():
    return Grid.cube(16)


@pytest.fixture(scope="session")
def grid32():
    return Grid.cube(32)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def smooth_scalar(grid, seed=0, kmax=3):
    """Random real trigonometric polynomial with modes |m_i| <= kmax."""
    r = np.random.default_rng(seed)
    x, y, z = grid.mesh()
    s = 2 * math.pi / grid.length
    f = np.zeros(grid.n)
    for _ in range(6):
        m = r.integers(-kmax, kmax + 1, 3)
        f = f + r.standard_normal() * np.cos(s * (m[0] * x + m[1] * y + m[2] * z) + r.uniform(0, 2 * math.pi))
    return f
