import os

import numpy as np
import pytest

FIXTURES = os.path.join(os.path.dirname(__file__), os.pardir, "fixtures")

# one line per exit criterion, filled in by test_acceptance.report and
# printed after the run (outside pytest's output capture)
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURES, name)


@pytest.fixture
def rng():
    return np.random.default_rng(20260825)
