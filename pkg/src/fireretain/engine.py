"""Exact protect-then-spread dynamics on a finite Cayley ball.

The whole history of a run is kept in two integer arrays over ball ids:
``burn_time`` (turn at which a vertex caught fire, -1 if it has not) and
``protect_time`` (turn at which it was protected, -1 if never).  Any
intermediate burning set or protection set is a comparison away.

A run refuses to continue once the fire could reach the edge of the ball,
so every number it reports is the infinite-graph value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from fireretain.budgets import Budget
from fireretain.cayley import Ball, outer_boundary_mask

LOG_COLUMNS = ("turn", "burned_total", "burned_new", "protected_this_turn", "protected_total")


class SimulationError(RuntimeError):
    turn: int | None = None

    def __init__(self, message: str, turn: int | None = None):
        super().__init__(message if turn is None else f"turn {turn}: {message}")
        self.turn = turn


class BudgetExceeded(SimulationError):
    pass


class IllegalProtection(SimulationError):
    pass


class ExactnessGuardError(SimulationError):
    pass


class IllegalStrategyOutput(SimulationError):
    pass


@dataclass
class FireState:
    ball: Ball
    r0: int
    burn_time: np.ndarray
    protect_time: np.ndarray
    turn: int = 0
    log: list[tuple[int, int, int, int, int]] = field(default_factory=list)
    notes: list[tuple[int, str]] = field(default_factory=list)
    budget: Budget | None = None
    strategy_name: str = ""

    @property
    def R_max(self) -> int:
        return self.ball.radius

    @property
    def burning(self) -> np.ndarray:
        return self.burn_time >= 0

    @property
    def protected(self) -> np.ndarray:
        return self.protect_time >= 0

    @property
    def initial(self) -> np.ndarray:
        return self.burn_time == 0

    def burning_at(self, n: int) -> np.ndarray:
        """Mask of F_n."""
        return (self.burn_time >= 0) & (self.burn_time <= n)

    def protected_at(self, n: int) -> np.ndarray:
        """Mask of W_1 u ... u W_n."""
        return (self.protect_time >= 1) & (self.protect_time <= n)

    def protected_on(self, n: int) -> np.ndarray:
        """Mask of W_n."""
        return self.protect_time == n

    @property
    def unburnt(self) -> np.ndarray:
        """U_T: vertices not on fire by the current turn."""
        return self.burn_time < 0

    def note(self, message: str) -> None:
        self.notes.append((self.turn + 1, message))

    def max_turn(self) -> int:
        """Last turn the exactness guard permits."""
        return self.R_max - self.r0 - 1


Trajectory = FireState


def init_fire(ball: Ball, F0: Iterable) -> FireState:
    F0 = list(F0)
    if not F0:
        raise ValueError("initial fire must be nonempty")
    missing = [x for x in F0 if x not in ball]
    if missing:
        raise ValueError(f"initial fire escapes the ball of radius {ball.radius}: {missing[0]!r}")
    ids = ball.ids(F0)
    burn = np.full(len(ball), -1, dtype=np.int32)
    burn[ids] = 0
    protect = np.full(len(ball), -1, dtype=np.int32)
    r0 = int(ball.lengths[ids].max())
    return FireState(ball, r0, burn, protect)


def advance_turn(state: FireState, W: Iterable, budget: Budget) -> FireState:
    """Protect ``W`` then spread the fire one step.  Mutates and returns ``state``."""
    n = state.turn + 1
    if state.r0 + n + 1 > state.R_max:
        raise ExactnessGuardError(
            f"fire of initial radius {state.r0} could reach the edge of the ball "
            f"(radius {state.R_max}); turn {n} needs radius >= {state.r0 + n + 1}",
            n,
        )
    try:
        ids = np.unique(state.ball.ids(W))
    except ValueError as exc:
        raise IllegalProtection(str(exc), n) from None
    if not budget.allows(n, len(ids)):
        raise BudgetExceeded(f"{len(ids)} vertices protected, budget allows {budget(n)}", n)
    if ids.size and state.burning[ids].any():
        bad = state.ball.elements[int(ids[state.burning[ids]][0])]
        raise IllegalProtection(f"vertex {bad!r} is already burning", n)
    if ids.size and state.protected[ids].any():
        bad = state.ball.elements[int(ids[state.protected[ids]][0])]
        raise IllegalProtection(f"vertex {bad!r} is already protected", n)
    state.protect_time[ids] = n

    front = state.burning
    nb = state.ball.neighbors[front].ravel()
    # guaranteed by the exactness guard
    assert not (nb < 0).any(), "fire reached the truncation boundary"
    nb = np.unique(nb)
    fresh = nb[(state.burn_time[nb] < 0) & (state.protect_time[nb] < 0)]
    state.burn_time[fresh] = n
    state.turn = n
    state.log.append(
        (n, int(np.count_nonzero(state.burn_time >= 0)), int(fresh.size), int(ids.size),
         int(np.count_nonzero(state.protect_time >= 0)))
    )
    return state


def run_simulation(ball: Ball, F0: Iterable, strategy: Callable, budget: Budget, T: int) -> FireState:
    """Play ``T`` turns of ``strategy`` under ``budget``; every turn is audited
    by :func:`advance_turn`."""
    state = init_fire(ball, F0)
    if state.r0 + T + 1 > ball.radius:
        raise ExactnessGuardError(
            f"horizon {T} with initial radius {state.r0} needs a ball of radius "
            f">= {state.r0 + T + 1}, got {ball.radius}"
        )
    state.budget = budget
    state.strategy_name = getattr(strategy, "spec", type(strategy).__name__)
    for n in range(1, T + 1):
        W = list(strategy(state, budget(n)))
        try:
            advance_turn(state, W, budget)
        except SimulationError as exc:
            raise IllegalStrategyOutput(
                f"strategy {state.strategy_name} made an illegal move: {exc}", n
            ) from exc
    return state


def saved_fraction(state: FireState, n: int) -> Fraction:
    """|U_T cap B_n| / v(n) as an exact rational."""
    if n < 0 or n > state.R_max:
        raise ValueError(f"radius {n} outside the ball (radius {state.R_max})")
    if n > state.r0 + state.turn:
        raise ValueError(
            f"radius {n} exceeds r0 + T = {state.r0 + state.turn}; unburnt-by-T is vacuous there"
        )
    vol = state.ball.volume(n)
    saved = int(np.count_nonzero(state.burn_time[:vol] < 0))
    return Fraction(saved, vol)


@dataclass
class BoundaryReport:
    holds: list[bool]
    counterexamples: list[tuple[int, object]]

    @property
    def ok(self) -> bool:
        return all(self.holds)


def check_boundary_relation(state: FireState) -> BoundaryReport:
    """Verify that the outer boundary of F_n lies in (F_{n+1} minus F_n)
    union W_1..W_{n+1} for every n < T."""
    if state.turn < 1:
        raise ValueError("need at least one simulated turn")
    holds = []
    bad = []
    bt, pt = state.burn_time, state.protect_time
    for n in range(state.turn):
        F = state.burning_at(n)
        bd = outer_boundary_mask(state.ball, F)
        covered = (bt == n + 1) | ((pt >= 1) & (pt <= n + 1))
        miss = np.flatnonzero(bd & ~covered)
        holds.append(miss.size == 0)
        if miss.size:
            bad.append((n, state.ball.elements[int(miss[0])]))
    return BoundaryReport(holds, bad)


@dataclass
class SpreadAudit:
    increments: list[int]
    bounds: list[int]
    per_turn: list[bool]
    totals: list[int]
    cumulative_bounds: list[int]
    cumulative: list[bool]

    @property
    def ok(self) -> bool:
        return all(self.per_turn) and all(self.cumulative)


def spread_increment_audit(state: FireState, g: Callable[[int], int] | Sequence[int]) -> SpreadAudit:
    """Compare |F_n minus F_(n-1)| with g(n) - f(n), and |F_n| with the
    partial sums of g(k) - f(k), where f is the run's budget."""
    if state.budget is None:
        raise ValueError("trajectory carries no budget")
    gf = g if callable(g) else (lambda n: g[n - 1])
    incs, bounds, per, tots, cb, cum = [], [], [], [], [], []
    acc = 0
    for n, total, new, _, _ in state.log:
        b = gf(n) - state.budget(n)
        acc += b
        incs.append(new)
        bounds.append(b)
        per.append(new >= b)
        tots.append(total)
        cb.append(acc)
        cum.append(total >= acc)
    return SpreadAudit(incs, bounds, per, tots, cb, cum)
