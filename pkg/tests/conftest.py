import math

import numpy as np
import pytest

from nepcorr import build_quadratic

LAM_SCALAR = -1 + math.sqrt(5)


@pytest.fixture
def scalar_quadratic():
    """``T(lam) = 0.5 + 0.25 lam``; eigenvalue -1 + sqrt(5) in the unit disk around 1."""
    return build_quadratic(-1.0, 0.5, 0.25)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_complex(rng, n, k=None, scale=1.0):
    k = n if k is None else k
    return scale * (rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k)))


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
