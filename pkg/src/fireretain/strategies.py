"""Protection strategies.

A strategy is a callable ``strategy(state, allowance) -> iterable of
elements`` that sees only the observable state (ball, burning and protected
sets, turn counter) and the number of vertices it may protect this turn.
All built-ins are stateless, so one instance can drive many runs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from fireretain.cayley import outer_boundary_mask
from fireretain.groups import LAMPLIGHTER, FreeGroupHandle, lamplighter_element


class StrategyError(ValueError):
    pass


class Strategy:
    spec = "strategy"

    def __call__(self, state, allowance: int):
        raise NotImplementedError


@dataclass(frozen=True)
class NullStrategy(Strategy):
    spec = "null"

    def __call__(self, state, allowance):
        return ()


@dataclass(frozen=True)
class BranchCutStrategy(Strategy):
    """On a free group with the fire started at the identity, protect the
    first generator on turn 1; the subtree behind it never burns."""

    spec = "branch-cut"

    def __call__(self, state, allowance):
        G = state.ball.group
        if not isinstance(G, FreeGroupHandle):
            raise StrategyError(f"branch-cut needs a free group, got {G.text}")
        if state.turn == 0:
            start = np.flatnonzero(state.initial)
            if start.tolist() != [0]:
                raise StrategyError("branch-cut needs the fire to start exactly at the identity")
            if allowance >= 1:
                return (G.generators[0],)
        return ()


def saved_branch(x) -> bool:
    """Membership in the subtree cut off by :class:`BranchCutStrategy`."""
    return len(x) > 0 and x[0] == 1


@dataclass(frozen=True)
class GreedyBoundaryStrategy(Strategy):
    """Protect boundary vertices of the fire, farthest from the identity first.

    Ties go to canonical order when ``seed`` is 0; any other seed breaks ties
    with a generator seeded by ``(seed, turn)``.
    """

    seed: int = 0

    @property
    def spec(self):
        return f"greedy:seed={self.seed}"

    def __call__(self, state, allowance):
        if allowance <= 0:
            return ()
        ball = state.ball
        cand = np.flatnonzero(outer_boundary_mask(ball, state.burning) & ~state.protected)
        if cand.size == 0:
            return ()
        if self.seed:
            rng = np.random.default_rng([self.seed, state.turn + 1])
            tie = rng.permutation(cand.size)
        else:
            tie = np.arange(cand.size)
        order = np.lexsort((tie, -ball.lengths[cand].astype(np.int64)))
        return [ball.elements[i] for i in cand[order[:allowance]].tolist()]


@dataclass(frozen=True)
class FixedSetStrategy(Strategy):
    """Protect ``schedule[n-1]`` on turn n.

    Vertices already burning, outside the ball, or beyond the allowance are
    dropped and recorded as a note on the state rather than raising.
    """

    schedule: tuple = ()
    source: str = ""

    @property
    def spec(self):
        return f"fixed:file={self.source}" if self.source else f"fixed:{len(self.schedule)}turns"

    def __call__(self, state, allowance):
        n = state.turn + 1
        if n > len(self.schedule):
            return ()
        ball = state.ball
        out = []
        dropped = 0
        for x in sorted(self.schedule[n - 1], key=ball.group.encode):
            i = ball.index.get(x)
            if i is None or state.burn_time[i] >= 0 or state.protect_time[i] >= 0:
                dropped += 1
            else:
                out.append(x)
        if len(out) > allowance:
            dropped += len(out) - allowance
            out = out[:allowance]
        if dropped:
            state.note(f"fixed schedule shortfall: {dropped} vertices not protected")
        return out


def load_schedule(group, path) -> FixedSetStrategy:
    """Read a schedule file: one ``turn hex-encoding`` pair per line."""
    sched: dict[int, set] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            turn, hexenc = line.split()
            sched.setdefault(int(turn), set()).add(group.decode(bytes.fromhex(hexenc)))
        except ValueError as exc:
            raise StrategyError(f"{path}:{lineno}: {exc}") from None
    if any(t < 1 for t in sched):
        raise StrategyError("schedule turns start at 1")
    last = max(sched, default=0)
    return FixedSetStrategy(tuple(frozenset(sched.get(t, ())) for t in range(1, last + 1)), str(path))


def write_schedule(group, schedule, path) -> None:
    lines = []
    for t, xs in enumerate(schedule, 1):
        for x in sorted(xs, key=group.encode):
            lines.append(f"{t} {group.encode(x).hex()}")
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


@dataclass(frozen=True)
class RandomStrategy(Strategy):
    """Fuzzing strategy: a random legal set of size <= allowance, drawn from
    the fire's boundary and the rest of the ball."""

    seed: int = 0

    @property
    def spec(self):
        return f"random:seed={self.seed}"

    def __call__(self, state, allowance):
        if allowance <= 0:
            return ()
        rng = np.random.default_rng([self.seed, state.turn + 1])
        free = ~state.burning & ~state.protected
        bd = np.flatnonzero(outer_boundary_mask(state.ball, state.burning) & free)
        k = int(rng.integers(0, allowance + 1))
        if k == 0:
            return ()
        take_bd = min(bd.size, int(rng.integers(0, k + 1)))
        chosen = set(rng.choice(bd, size=take_bd, replace=False).tolist()) if take_bd else set()
        pool = np.flatnonzero(free)
        extra = rng.choice(pool, size=min(pool.size, k - take_bd), replace=False).tolist()
        chosen.update(extra)
        chosen = sorted(chosen)[:allowance]
        return [state.ball.elements[i] for i in chosen]


# --------------------------------------------------------------------------
# lamplighter shield
# --------------------------------------------------------------------------


def in_shield(x, M: int) -> bool:
    """``x`` in S: lamps 0..M lit, nothing lit left of 0, lamplighter > M + 1."""
    pos, lamps = x
    lit = {g[0] for g, _ in lamps}
    return pos[0] > M + 1 and min(lit, default=0) >= 0 and all(i in lit for i in range(M + 1))


def shield_layer(M: int, n: int) -> list:
    """P_n: shield-boundary elements (lamplighter at M + 2) whose free lamps
    sit in M+1 .. M + n//2, ordered by highest lit lamp, then canonically."""
    free = range(M + 1, M + 1 + n // 2)
    out = []
    for bits in itertools.product((0, 1), repeat=len(free)):
        lit = list(range(M + 1)) + [p for p, b in zip(free, bits) if b]
        out.append(lamplighter_element(lit, M + 2))
    return out


def shield_order_key(group, x):
    return (max(g[0] for g, _ in x[1]), group.encode(x))


@dataclass(frozen=True)
class LamplighterShieldStrategy(Strategy):
    """Strong-retainment strategy on Z2 wr Z with budget 2**((n+2)/2).

    By turn n every element of P_n has been protected; each turn emits the
    not-yet-protected part of P_n, which is empty on odd turns after the
    first.
    """

    M: int

    @property
    def spec(self):
        return f"shield:M={self.M}"

    def __call__(self, state, allowance):
        G = state.ball.group
        if G.descriptor != LAMPLIGHTER:
            raise StrategyError(f"shield strategy needs Z2wrZ, got {G.text}")
        if self.M <= state.r0:
            raise StrategyError(f"shield parameter M={self.M} must exceed the fire radius {state.r0}")
        n = state.turn + 1
        ball = state.ball
        out = []
        skipped = 0
        for x in sorted(shield_layer(self.M, n), key=lambda x: shield_order_key(G, x)):
            i = ball.index.get(x)
            if i is None:
                skipped += 1
                continue
            if state.protect_time[i] >= 0:
                continue
            if ball.lengths[i] > self.M + n:
                # anything that far out cannot have been reached by turn n - 1
                assert state.burn_time[i] < 0
            if state.burn_time[i] >= 0:
                skipped += 1
                continue
            out.append(x)
            if len(out) == allowance:
                break
        if skipped:
            state.note(f"shield: {skipped} targets outside the ball or already burning")
        return out


def parse_strategy(text: str, group=None) -> Strategy:
    """``null``, ``branch-cut``, ``greedy:seed=N``, ``random:seed=N``,
    ``fixed:file=PATH``, ``shield:M=K``."""
    text = text.strip()
    kind, _, args = text.partition(":")
    opts = dict(kv.split("=", 1) for kv in args.split(",") if kv)
    try:
        if kind == "null":
            return NullStrategy()
        if kind == "branch-cut":
            return BranchCutStrategy()
        if kind == "greedy":
            return GreedyBoundaryStrategy(int(opts.get("seed", 0)))
        if kind == "random":
            return RandomStrategy(int(opts.get("seed", 0)))
        if kind == "shield":
            return LamplighterShieldStrategy(int(opts["M"]))
        if kind == "fixed":
            if group is None:
                raise StrategyError("fixed schedules need the group to decode elements")
            return load_schedule(group, opts["file"])
    except (KeyError, ValueError) as exc:
        raise StrategyError(f"bad strategy specifier {text!r}: {exc}") from None
    raise StrategyError(f"unknown strategy {text!r}")
