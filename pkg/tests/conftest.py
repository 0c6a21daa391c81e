import pytest

from hypersum.precision import PrecisionContext


@pytest.fixture
def ctx30():
    return PrecisionContext(30)


def rel(x, y):
    return abs(x - y) / abs(y)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
