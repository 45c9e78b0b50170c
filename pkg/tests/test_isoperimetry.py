from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import shared_ball
from fireretain.isoperimetry import (
    DomainTooSmall,
    ScalarField,
    check_isoperimetry,
    check_poincare,
    deviation_l1,
    gradient_l1,
    indicator_identities,
    isoperimetry_sweep,
    mean,
    poincare_sweep,
)


def line_field(R, fn):
    ball = shared_ball("Z", R)
    return ScalarField.from_function(ball, lambda x: fn(x[0]))


def test_worked_values_on_the_line():
    f = line_field(9, lambda x: x)
    assert gradient_l1(f, 3) == 12  # 6 unit edges, both orientations
    assert deviation_l1(f, 2) == 6
    res = check_poincare(f, 2)
    assert res.holds and res.lhs == 6 and res.rhs == Fraction(864, 5)
    b = shared_ball("Z", 3)
    assert gradient_l1(ScalarField.indicator(b, b.mask([(0,)])), 2) == 4
    iso = check_isoperimetry(b, 1, b.mask([(0,)]))
    assert iso.lhs == 2 and iso.rhs == Fraction(1, 10) and iso.holds


def test_constant_field_has_no_gradient():
    f = line_field(6, lambda x: 7)
    assert gradient_l1(f, 6) == 0 and deviation_l1(f, 2) == 0
    assert check_poincare(f, 2).holds


def test_rational_values_stay_exact():
    f = line_field(6, lambda x: Fraction(x, 3))
    assert f.denom == 3
    assert mean(f, 2) == 0
    assert deviation_l1(f, 1) == Fraction(2, 3)


def test_domain_checks():
    f = line_field(5, lambda x: x)
    with pytest.raises(DomainTooSmall):
        check_poincare(f, 2)
    with pytest.raises(DomainTooSmall):
        gradient_l1(f, 6)
    b = shared_ball("Z", 9)
    A = np.zeros(len(b), dtype=bool)
    A[-1] = True  # word length 9, outside B_6
    with pytest.raises(ValueError):
        check_isoperimetry(b, 2, A)
    with pytest.raises(DomainTooSmall):
        check_isoperimetry(b, 4, np.zeros(len(b), dtype=bool))


@settings(max_examples=80)
@given(st.lists(st.integers(-20, 20), min_size=13, max_size=13), st.integers(1, 6))
def test_poincare_on_line_fields(values, den):
    ball = shared_ball("Z", 6)
    f = ScalarField(ball, np.array(values, dtype=np.int64), den)
    assert check_poincare(f, 2).holds


@settings(max_examples=80)
@given(st.lists(st.booleans(), min_size=85, max_size=85))
def test_indicator_identities_z2(bits):
    ball = shared_ball("Z^2", 6)
    A = np.zeros(len(ball), dtype=bool)
    A[:85] = bits
    for R in (1, 2):
        ids = indicator_identities(ball, R, A)
        assert ids.deviation == ids.deviation_formula
        assert ids.gradient <= ids.gradient_bound
    assert check_isoperimetry(ball, 2, A).holds


@pytest.mark.parametrize("text", ["Z^2", "F2", "Z2wrZ", "H3"])
def test_sweeps_are_clean(text):
    ball = shared_ball(text, 6)
    iso = isoperimetry_sweep(ball, 2, 60, seed=3)
    poi = poincare_sweep(ball, 2, 60, seed=3)
    assert iso.ok and poi.ok
    assert iso.instances == poi.instances == 60
    assert iso.min_ratio >= 1 and poi.min_ratio >= 1


def test_sweeps_are_seeded():
    ball = shared_ball("Z^2", 6)
    a = isoperimetry_sweep(ball, 2, 20, seed=1).min_ratio
    assert a == isoperimetry_sweep(ball, 2, 20, seed=1).min_ratio
