import numpy as np
import pytest

from tests.helpers import random_instance


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def instance(rng):
    return random_instance(rng, M=2, N=2, K=2)


def pytest_terminal_summary(terminalreporter):
    from tests.acceptance_report import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
