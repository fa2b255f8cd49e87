import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gamma_lab.fundop import solve_fundamental
from gamma_lab.gamma import OperatorPair
from gamma_lab.generators import generate

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_pair(seed, n, kind="symmetrized_polynomial"):
    return generate(kind, n, np.random.default_rng(seed))


def scalar_pair(s, p):
    return OperatorPair(np.array([[s]], complex), np.array([[p]], complex))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def scalar_10():
    """S=[1], P=[0]: the simplest pair with nontrivial defects."""
    pair = scalar_pair(1, 0)
    return pair, solve_fundamental(pair)


@pytest.fixture
def scalar_21():
    """S=[2], P=[1]: a point of the distinguished boundary."""
    pair = scalar_pair(2, 1)
    return pair, solve_fundamental(pair)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
