from fractions import Fraction

import pytest

from setrisk.market import Market, MarketSpec
from setrisk.riskmeasure import RiskEngine
from setrisk.tree import TreeSpec, build_tree

# filled by test_acceptance, printed after the run
ACCEPTANCE_LINES = []

FIXTURES = {
    # d = 2, m = 1
    "d2": dict(m=1, S0=[1], up=[2], lam=["1/10"]),
    # d = 3, m = 2
    "d3": dict(m=2, S0=[1, 2], up=[2, "3/2"], lam=["1/10", "1/20"]),
}


def make_engine(m, K, S0, up, lam, dt=None):
    tree = build_tree(TreeSpec(m=m, K=K, dt=tuple(dt or [1] * K)))
    market = Market(tree, MarketSpec(S0=tuple(S0), up=tuple(up), lam=tuple(lam)))
    return RiskEngine.superhedging(tree, market)


def fixture_engine(name, K, dt=None):
    return make_engine(K=K, dt=dt, **FIXTURES[name])


@pytest.fixture
def engine_d2():
    return fixture_engine("d2", 2, ["1/4", "1/4"])


@pytest.fixture
def engine_d3():
    return fixture_engine("d3", 2, ["1/4", "1/4"])


def solve_linear(A, b):
    """Gauss-Jordan over Fraction; A is square and invertible."""
    n = len(A)
    M = [[Fraction(int(x.numerator), int(x.denominator)) if hasattr(x, "numerator") else Fraction(x)
          for x in row] + [Fraction(int(bb.numerator), int(bb.denominator))] for row, bb in zip(A, b)]
    for col in range(n):
        piv = next(r for r in range(col, n) if M[r][col] != 0)
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col]
        M[col] = [v / p for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * c for a, c in zip(M[r], M[col])]
    return [M[r][n] for r in range(n)]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
