import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from fireretain.budgets import (
    SHIELD_BUDGET,
    BudgetError,
    Constant,
    Exponential,
    Polynomial,
    Table,
    iroot,
    parse_budget,
)


@given(st.integers(0, 10**40), st.integers(1, 7))
def test_iroot_is_floor_root(x, k):
    r = iroot(x, k)
    assert r**k <= x < (r + 1) ** k


def test_shield_budget_values():
    # 2^((n+2)/2): exact powers of two on even turns, floors on odd turns
    assert [SHIELD_BUDGET(n) for n in range(1, 9)] == [2, 4, 5, 8, 11, 16, 22, 32]
    for n in range(1, 40):
        assert SHIELD_BUDGET(n) == math.isqrt(2 ** (n + 2))


@given(st.integers(1, 60), st.integers(0, 2**32))
def test_exponential_allows_compares_exactly(n, size):
    # size <= 2^((n+2)/2)  <=>  size^2 <= 2^(n+2)
    assert SHIELD_BUDGET.allows(n, size) == (size * size <= 2 ** (n + 2))


@given(st.integers(0, 5), st.integers(1, 5), st.integers(1, 5), st.integers(1, 3), st.integers(1, 30))
def test_exponential_floor(coef, num, den, root, n):
    b = Exponential(coef, num, den, root)
    v = b(n)
    exact = Fraction(coef**root * num**n, den**n)
    assert v**root <= exact < (v + 1) ** root
    assert b.allows(n, v) and not b.allows(n, v + 1)


def test_prefix_sums():
    assert Constant(5).prefix_sum(10) == 50
    assert Polynomial(1, 2).prefix_sum(10) == 385
    assert Table((1, 2, 3)).prefix_sum(3) == 6


def test_classification():
    assert str(Constant(5).classify()) == "subexponential"
    assert str(Polynomial(3, 4).classify()) == "subexponential"
    c = SHIELD_BUDGET.classify()
    assert c.kind == "exponential"
    assert c.rate == pytest.approx(math.sqrt(2))
    assert Table((1,)).classify().kind == "unclassified"
    assert Exponential(3, 1).classify().kind == "subexponential"


def test_table_semantics():
    t = Table((3, 1))
    assert t(1) == 3 and t(2) == 1
    with pytest.raises(BudgetError):
        t(3)
    assert Table((3, 1), repeat_last=True)(50) == 1
    with pytest.raises(BudgetError):
        Table((-1,))


@pytest.mark.parametrize(
    "text,expected",
    [("const:4", Constant(4)), ("poly:2,3", Polynomial(2, 3)), ("exp:2,2,1,2", SHIELD_BUDGET),
     ("shield", SHIELD_BUDGET), ("table:1,2", Table((1, 2))), ("table:1,0,...", Table((1, 0), True))],
)
def test_parse_budget(text, expected):
    assert parse_budget(text) == expected
    assert parse_budget(expected.text) == expected


@pytest.mark.parametrize("bad", ["const:x", "poly:1", "linear:3", "const:-1", "exp:0,0"])
def test_parse_budget_rejects(bad):
    with pytest.raises(BudgetError):
        parse_budget(bad)
