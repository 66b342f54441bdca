import numpy as np
import pytest

from wosnn.geometry import Box, LShape2D


@pytest.fixture
def square():
    return Box([-1, -1], [1, 1])


@pytest.fixture
def cube():
    return Box([-1, -1, -1], [1, 1, 1])


@pytest.fixture
def lshape():
    return LShape2D()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# --- acceptance report ---------------------------------------------------------

_CRITERIA = []


@pytest.fixture
def criterion():
    """``criterion(label, ok, detail)`` records one line of the acceptance report."""

    def record(label, ok, detail):
        _CRITERIA.append((label, bool(ok), detail))
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in _CRITERIA:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
