import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import shared_ball
from fireretain.budgets import BudgetError, Constant, Polynomial, Table
from fireretain.engine import (
    BudgetExceeded,
    ExactnessGuardError,
    IllegalProtection,
    IllegalStrategyOutput,
    advance_turn,
    check_boundary_relation,
    init_fire,
    run_simulation,
    saved_fraction,
    spread_increment_audit,
)
from fireretain.strategies import BranchCutStrategy, NullStrategy, RandomStrategy

ZERO = Constant(0)


def test_init_fire_examples():
    z2 = shared_ball("Z^2", 6)
    s = init_fire(z2, [(0, 0)])
    assert s.r0 == 0 and s.burning.sum() == 1
    ll = shared_ball("Z2wrZ", 5)
    s = init_fire(ll, ll.elements[: ll.volume(1)])
    assert s.r0 == 1 and s.burning.sum() == 9
    with pytest.raises(ValueError):
        init_fire(z2, [(9, 0)])
    with pytest.raises(ValueError):
        init_fire(z2, [])


def test_advance_turn_examples():
    z2 = shared_ball("Z^2", 6)
    s = advance_turn(init_fire(z2, [(0, 0)]), [], ZERO)
    assert s.burning.sum() == 5
    z = shared_ball("Z", 4)
    s = advance_turn(init_fire(z, [(0,)]), [(1,)], Constant(1))
    assert z.elements_of(s.burning) == {(0,), (-1,)}
    s = init_fire(z2, z2.elements[:5])
    with pytest.raises(BudgetExceeded):
        advance_turn(s, z2.layers[2], Constant(4))


def test_illegal_protections():
    z2 = shared_ball("Z^2", 6)
    s = init_fire(z2, [(0, 0)])
    with pytest.raises(IllegalProtection):
        advance_turn(s, [(0, 0)], Constant(1))
    advance_turn(s, [(2, 0)], Constant(1))
    with pytest.raises(IllegalProtection):
        advance_turn(s, [(2, 0)], Constant(1))
    with pytest.raises(IllegalProtection):
        advance_turn(s, [(40, 0)], Constant(1))


def test_exactness_guard():
    z2 = shared_ball("Z^2", 6)
    s = init_fire(z2, [(0, 0)])
    for _ in range(5):
        advance_turn(s, [], ZERO)
    with pytest.raises(ExactnessGuardError):
        advance_turn(s, [], ZERO)
    with pytest.raises(ExactnessGuardError):
        run_simulation(z2, [(0, 0)], NullStrategy(), ZERO, 6)


def test_null_strategy_fills_balls():
    z2 = shared_ball("Z^2", 22)
    s = run_simulation(z2, [(0, 0)], NullStrategy(), ZERO, 20)
    for n in range(21):
        assert (s.burning_at(n) == (z2.lengths <= n)).all()
    assert s.log[2][1] == 25
    assert all(saved_fraction(s, r) == 0 for r in range(21))


def test_branch_cut_closed_forms():
    f2 = shared_ball("F2", 11)
    s = run_simulation(f2, [()], BranchCutStrategy(), Constant(1), 10)
    v10 = 2 * 3**10 - 1
    saved = (3**10 - 1) // 2
    assert s.log[-1][1] == v10 - saved
    assert saved_fraction(s, 10) == Fraction(saved, v10)
    assert check_boundary_relation(s).ok


def test_saved_fraction_range_errors():
    z2 = shared_ball("Z^2", 8)
    s = run_simulation(z2, [(0, 0)], NullStrategy(), ZERO, 3)
    with pytest.raises(ValueError):
        saved_fraction(s, 4)
    with pytest.raises(ValueError):
        saved_fraction(s, 9)


def test_strategy_errors_carry_turn():
    z2 = shared_ball("Z^2", 8)

    def cheat(state, allowance):
        return z2.elements[:1] if state.turn == 2 else []

    with pytest.raises(IllegalStrategyOutput) as exc:
        run_simulation(z2, [(0, 0)], cheat, Constant(1), 5)
    assert exc.value.turn == 3


def test_corrupted_trajectory_is_flagged():
    z2 = shared_ball("Z^2", 10)
    s = run_simulation(z2, [(0, 0)], NullStrategy(), ZERO, 6)
    assert check_boundary_relation(s).ok
    victim = z2.index[(2, 1)]
    s.burn_time[victim] = -1  # skipped by the spread, never protected
    rep = check_boundary_relation(s)
    assert not rep.ok
    assert rep.counterexamples[0] == (2, (2, 1))


def test_spread_audit_null_is_tight():
    z2 = shared_ball("Z^2", 12)
    s = run_simulation(z2, [(0, 0)], NullStrategy(), ZERO, 10)
    audit = spread_increment_audit(s, lambda n: 4 * n)
    assert audit.increments == audit.bounds
    assert audit.ok


def test_spread_audit_branch_cut_actual_values():
    # increments are 3^n against sphere sizes 4*3^(n-1) minus one protection
    f2 = shared_ball("F2", 9)
    s = run_simulation(f2, [()], BranchCutStrategy(), Constant(1), 8)
    audit = spread_increment_audit(s, lambda n: 4 * 3 ** (n - 1))
    assert audit.increments == [3**n for n in range(1, 9)]
    assert audit.totals == [(3 ** (n + 1) - 1) // 2 for n in range(1, 9)]
    assert audit.cumulative_bounds == [2 * (3**n - 1) - n for n in range(1, 9)]
    assert audit.cumulative == [True] + [False] * 7


def test_corollary_exponential_spread():
    f2 = shared_ball("F2", 11)
    s = run_simulation(f2, [()], NullStrategy(), ZERO, 10)
    for n, total, *_ in s.log:
        assert total == 2 * 3**n - 1
        assert total >= math.exp(n)


GROUPS = [("Z^2", 12), ("F2", 7), ("H3", 8), ("Z2wrZ", 7), ("F2xZ", 6), ("Z", 14)]


@settings(max_examples=40)
@given(st.sampled_from(GROUPS), st.integers(0, 2**31), st.integers(0, 6), st.integers(0, 1))
def test_random_runs_keep_invariants(gr, seed, K, r0):
    text, R = gr
    ball = shared_ball(text, R)
    T = R - r0 - 1
    s = run_simulation(ball, ball.elements[: ball.volume(r0)], RandomStrategy(seed), Constant(K), T)
    assert check_boundary_relation(s).ok
    for n in range(1, T + 1):
        prev, cur = s.burning_at(n - 1), s.burning_at(n)
        assert (prev <= cur).all()
        assert not (cur & s.protected_at(n)).any()
        assert (ball.lengths[cur] <= r0 + n).all()
        assert s.protected_on(n).sum() <= K
    assert not (s.burning & s.protected).any()


def test_determinism():
    ball = shared_ball("H3", 8)
    logs = []
    for _ in range(2):
        s = run_simulation(ball, [ball.group.identity], RandomStrategy(5), Polynomial(1, 1), 7)
        logs.append((s.log, s.burn_time.tobytes(), s.protect_time.tobytes()))
    assert logs[0] == logs[1]


def test_table_budget_exhaustion_surfaces():
    z2 = shared_ball("Z^2", 8)
    with pytest.raises(BudgetError):
        run_simulation(z2, [(0, 0)], NullStrategy(), Table((1, 1)), 3)
