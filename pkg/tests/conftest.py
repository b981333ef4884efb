import sys
from pathlib import Path

import numpy as np
import pytest

# oracles.py lives next to the tests and is imported as a plain module
sys.path.insert(0, str(Path(__file__).resolve().parent))

from onofri_trace.quadrature import default_spec  # noqa: E402


@pytest.fixture
def spec2():
    return default_spec(2)


@pytest.fixture
def spec3():
    return default_spec(3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def naive_r_p(X, Y, p):
    """R_p straight from the definition, for comparison."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    nx = np.linalg.norm(X, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        third = np.where(nx > 0, p * nx ** (p - 2) * np.sum(X * Y, axis=-1), 0.0)
    return np.linalg.norm(X + Y, axis=-1) ** p - nx ** p - third


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
