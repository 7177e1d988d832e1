import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tripledeck.grid import Grid, RoughnessProfile  # noqa: E402
from tripledeck.kernel import build_mode_kernel  # noqa: E402
from tripledeck.linear import build_multiplier  # noqa: E402
from tripledeck.nonlinear import solve_nonlinear  # noqa: E402


@pytest.fixture(scope="session")
def small_grid():
    return Grid(L=20.0, n_x=128, m_height=10.0, n_y=257)


@pytest.fixture(scope="session")
def grid20():
    return Grid(L=40.0, n_x=512, m_height=20.0, n_y=513)


@pytest.fixture(scope="session")
def ops20(grid20):
    return build_multiplier(grid20), build_mode_kernel(grid20.xi, grid20)


@pytest.fixture(scope="session")
def bump20(grid20):
    """Gaussian roughness with periodized H2 norm 1e-3."""
    unit = RoughnessProfile.gaussian(grid20)
    return unit.scaled(1e-3 / unit.h2_norm)


@pytest.fixture(scope="session")
def state20(grid20, ops20, bump20):
    table, kernel = ops20
    return solve_nonlinear(bump20, grid20, table=table, kernel=kernel)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
