import numpy as np
import pytest

from killedwalk.jump_model import JumpDistribution

M1 = {(1, 0): 0.3, (-1, 0): 0.2, (0, 1): 0.3, (0, -1): 0.2}
M2 = {(1, 0): 0.3, (-1, 0): 0.2, (0, 1): 0.3, (0, -1): 0.15, (0, -2): 0.05}
M3 = {(1, 0, 0): 0.2, (-1, 0, 0): 0.15, (0, 1, 0): 0.15, (0, -1, 0): 0.15, (0, 0, 1): 0.2, (0, 0, -1): 0.15}


@pytest.fixture(scope="session")
def m1():
    return JumpDistribution.from_dict(M1)


@pytest.fixture(scope="session")
def m2():
    return JumpDistribution.from_dict(M2)


@pytest.fixture(scope="session")
def m3():
    return JumpDistribution.from_dict(M3)


def upper_directions(n, seed=0):
    """``n`` deterministic directions on the closed upper half-circle."""
    th = np.random.default_rng(seed).uniform(0, np.pi, n)
    return np.column_stack([np.cos(th), np.sin(th)])


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
