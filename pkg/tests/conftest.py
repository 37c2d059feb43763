import numpy as np
import pytest

from smoothext import bench, transmission as tm
from smoothext.mesh import generate_square_split


@pytest.fixture(scope="session")
def flat_case():
    return bench.case_flat()


@pytest.fixture(scope="session")
def circular_case():
    return bench.case_circular()


@pytest.fixture(scope="session")
def corner_case():
    return bench.case_corner()


@pytest.fixture(scope="session")
def flat_ops(flat_case):
    return tm.prepare(flat_case.problem(), generate_square_split(4))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
