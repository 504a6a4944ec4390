import numpy as np
import pytest

from qcompress.sources import bell_source


@pytest.fixture
def rng():
    return np.random.default_rng(20240521)


@pytest.fixture
def bell():
    return bell_source()


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
