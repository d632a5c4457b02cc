import numpy as np
import pytest

from mopsoplus.core import FEASIBLE, Feasibility, ObjectivePair, Solution, constrained_dominates
from mopsoplus.problems import enumerate_bruteforce, load_network, reduced_tln


def sol(r, c, decision=(), deficit=0.0):
    feas = FEASIBLE if deficit == 0.0 else Feasibility(False, deficit)
    return Solution(tuple(decision), ObjectivePair(float(r), float(c)), feas)


def brute_nd(solutions):
    """Quadratic reference filter: keep members nobody dominates, first of
    each objective-equal group."""
    out = []
    for i, s in enumerate(solutions):
        if any(constrained_dominates(t, s) for t in solutions):
            continue
        if any(o.objectives == s.objectives and o.feasibility == s.feasibility for o in out):
            continue
        out.append(s)
    return out


@pytest.fixture(scope="session")
def tln():
    return load_network("TLN")


@pytest.fixture(scope="session")
def han():
    return load_network("HAN")


@pytest.fixture(scope="session")
def tln4():
    return reduced_tln(4)


@pytest.fixture(scope="session")
def tln4_front(tln4):
    return enumerate_bruteforce(tln4)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed after the test session
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
