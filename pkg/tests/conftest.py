import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hierdecay import CouplingSpec, ModelParams

from acceptance_log import ACCEPTANCE_LINES


@pytest.fixture
def zeno_params():
    """Constant couplings u = 0.1, D = 1, gamma = 1, N = 101."""
    return ModelParams(n_levels=101, bandwidth=1.0, gamma=1.0, coupling=CouplingSpec.constant(0.1))


@pytest.fixture
def case1_params():
    return ModelParams(n_levels=21, bandwidth=0.0, gamma=0.1, coupling=CouplingSpec.random(0.1))


@pytest.fixture
def case2_params():
    return ModelParams(n_levels=101, bandwidth=1.0, gamma=1.0, coupling=CouplingSpec.random(0.1))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
