import numpy as np
import pytest

from fadingbc.channel import validate_and_normalize

SQRT2 = 2 ** 0.5

ACCEPTANCE_LINES = []


def record_acceptance(criterion, ok, detail=""):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def two_state(g2, q=1.0):
    """The worked-example family h=[1,2], p=[1/2,1/2] with g**2 = g2."""
    return validate_and_normalize([1.0, 2.0], [0.5, 0.5], g2 ** 0.5, q)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def case1():
    return two_state(2.0)


@pytest.fixture
def case2_b2():
    return two_state(10 / 3)


@pytest.fixture
def case2_b3():
    return two_state(5 / 3)


@pytest.fixture
def case2_b1():
    return two_state(1.5)


@pytest.fixture
def case3():
    return two_state(11 / 8)
