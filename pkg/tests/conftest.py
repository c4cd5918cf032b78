import numpy as np
import pytest

from fsdcd.linalg import ProblemInstance, make_problem


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def small_problem():
    return make_problem("gaussian", 50, 20, 20, seed=11)


def consistent(A, x):
    A = np.asarray(A, dtype=float)
    x = np.asarray(x, dtype=float)
    return ProblemInstance(A=A, b=A @ x, solution=x, family="custom", seed=0)


def pytest_terminal_summary(terminalreporter):
    from tests.test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
