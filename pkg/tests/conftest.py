import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from relaxqp import ElasticProblem, QpProblem  # noqa: E402

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20231015)


@pytest.fixture
def one_d():
    """min ½x² s.t. x ≥ 1, written as −x ≤ −1. Solution x = 1, z = 1."""
    return QpProblem([[1.0]], [0.0], G=[[-1.0]], h=[-1.0])


@pytest.fixture
def infeasible_pair():
    """x ≤ −1 and x ≥ 1 with ρ = 10: minimizer x = 0, t = (1, 1), objective 20."""
    return ElasticProblem([[1.0]], [0.0], [[1.0], [-1.0]], [-1.0, -1.0], [10.0, 10.0])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
