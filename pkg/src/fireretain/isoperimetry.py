"""Exact checkers for the L1 Poincare inequality on balls and the
ball-restricted isoperimetric inequality it implies.

Scalar fields are stored as integer numerators over one common positive
denominator, so every norm is an exact :class:`~fractions.Fraction`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator

import numpy as np

from fireretain.cayley import Ball, outer_boundary_mask


class DomainTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class ScalarField:
    ball: Ball
    numer: np.ndarray
    denom: int = 1

    def __post_init__(self):
        if self.numer.shape != (len(self.ball),):
            raise ValueError("field must assign a value to every element of the ball")
        if self.denom < 1:
            raise ValueError("denominator must be positive")

    @classmethod
    def from_values(cls, ball: Ball, values) -> "ScalarField":
        vals = [Fraction(v) for v in values]
        den = math.lcm(*(v.denominator for v in vals)) if vals else 1
        nums = [int(v * den) for v in vals]
        return cls(ball, _int_array(nums), den)

    @classmethod
    def from_function(cls, ball: Ball, fn: Callable) -> "ScalarField":
        return cls.from_values(ball, (fn(x) for x in ball.elements))

    @classmethod
    def indicator(cls, ball: Ball, mask: np.ndarray) -> "ScalarField":
        return cls(ball, mask.astype(np.int64), 1)

    def value(self, x) -> Fraction:
        return Fraction(int(self.numer[self.ball.index[x]]), self.denom)


def _int_array(nums) -> np.ndarray:
    big = max((abs(v) for v in nums), default=0)
    return np.array(nums, dtype=np.int64 if big < 2**40 else object)


def _check_radius(ball: Ball, r: int) -> int:
    if r < 0 or r > ball.radius:
        raise DomainTooSmall(f"radius {r} exceeds the field's ball (radius {ball.radius})")
    return ball.volume(r)


def gradient_l1(field: ScalarField, R: int) -> Fraction:
    """Sum of |f(e+) - f(e-)| over oriented edges with both ends in B_R."""
    n = _check_radius(field.ball, R)
    nb = field.ball.neighbors[:n]
    f = field.numer
    ok = (nb >= 0) & (nb < n)
    rows = np.nonzero(ok)
    diff = np.abs(f[nb[rows]] - f[rows[0]])
    return Fraction(int(diff.sum()), field.denom)


def deviation_l1(field: ScalarField, R: int) -> Fraction:
    """Sum over B_R of |f(x) - f_R|, with f_R the mean of f over B_R."""
    n = _check_radius(field.ball, R)
    f = field.numer[:n]
    total = int(f.sum())
    return Fraction(int(np.abs(f * n - total).sum()), n * field.denom)


def mean(field: ScalarField, R: int) -> Fraction:
    n = _check_radius(field.ball, R)
    return Fraction(int(field.numer[:n].sum()), n * field.denom)


@dataclass(frozen=True)
class PoincareResult:
    holds: bool
    lhs: Fraction
    rhs: Fraction

    @property
    def slack(self) -> Fraction:
        return self.rhs - self.lhs


def check_poincare(field: ScalarField, R: int) -> PoincareResult:
    """||f - f_R||_{L1(B_R)} <= 2R v(2R)/v(R) ||grad f||_{L1(B_3R)}."""
    if R < 1:
        raise ValueError("R must be at least 1")
    ball = field.ball
    if 3 * R > ball.radius:
        raise DomainTooSmall(f"field lives on B_{ball.radius}, Poincare check at R={R} needs B_{3 * R}")
    lhs = deviation_l1(field, R)
    rhs = Fraction(2 * R * ball.volume(2 * R), ball.volume(R)) * gradient_l1(field, 3 * R)
    return PoincareResult(lhs <= rhs, lhs, rhs)


@dataclass(frozen=True)
class IsoperimetryResult:
    holds: bool
    lhs: int
    rhs: Fraction
    inside: int
    outside: int
    constant: Fraction | None  # largest c making the inequality tight

    @property
    def ratio(self) -> Fraction | None:
        return None if self.rhs == 0 else self.lhs / self.rhs


def check_isoperimetry(ball: Ball, R: int, A: np.ndarray) -> IsoperimetryResult:
    """|B_3R cap dA| >= 1/(2|S|) * |B_R \\ A| |A cap B_R| / (R v(2R)),
    with dA the outer vertex boundary."""
    if R < 1:
        raise ValueError("R must be at least 1")
    if 3 * R > ball.radius:
        raise DomainTooSmall(f"need B_{3 * R}, have B_{ball.radius}")
    A = np.asarray(A, dtype=bool)
    n3 = ball.volume(3 * R)
    if A[n3:].any():
        raise ValueError("A must lie inside B_3R")
    nR = ball.volume(R)
    lhs = int(np.count_nonzero(outer_boundary_mask(ball, A)[:n3]))
    inside = int(np.count_nonzero(A[:nR]))
    outside = nR - inside
    scale = R * ball.volume(2 * R)
    rhs = Fraction(inside * outside, 2 * len(ball.group.generators) * scale)
    const = Fraction(lhs * scale, inside * outside) if inside * outside else None
    return IsoperimetryResult(lhs >= rhs, lhs, rhs, inside, outside, const)


@dataclass(frozen=True)
class IndicatorIdentities:
    deviation: Fraction
    deviation_formula: Fraction
    gradient: Fraction
    gradient_bound: int

    @property
    def ok(self) -> bool:
        return self.deviation == self.deviation_formula and self.gradient <= self.gradient_bound


def indicator_identities(ball: Ball, R: int, A: np.ndarray) -> IndicatorIdentities:
    """For f = 1_A: the deviation identity 2/v(R) |B_R \\ A| |A cap B_R| and
    the gradient bound 2|S| |B_R cap dA|."""
    A = np.asarray(A, dtype=bool)
    f = ScalarField.indicator(ball, A)
    nR = _check_radius(ball, R)
    inside = int(np.count_nonzero(A[:nR]))
    bd = int(np.count_nonzero(outer_boundary_mask(ball, A)[:nR]))
    return IndicatorIdentities(
        deviation_l1(f, R),
        Fraction(2 * (nR - inside) * inside, nR),
        gradient_l1(f, R),
        2 * len(ball.group.generators) * bd,
    )


# --------------------------------------------------------------------------
# random families
# --------------------------------------------------------------------------


def subset_family(ball: Ball, R: int, rng: np.random.Generator, trials: int) -> Iterator[tuple[str, np.ndarray]]:
    """Subsets of B_3R: Bernoulli(p) for p in {0.1, 0.5, 0.9} in rotation,
    interleaved with sub-balls and (for Z^d) half-spaces."""
    n3 = ball.volume(3 * R)
    structured = []
    for r in range(0, 3 * R + 1):
        m = np.zeros(len(ball), dtype=bool)
        m[: ball.volume(r)] = True
        structured.append((f"ball{r}", m))
    if type(ball.group).__name__ == "FreeAbelianGroup":
        coords = np.array([x[0] for x in ball.elements[:n3]])
        for c in range(-3 * R, 3 * R + 1):
            m = np.zeros(len(ball), dtype=bool)
            m[:n3] = coords >= c
            structured.append((f"half{c}", m))
    ps = (0.1, 0.5, 0.9)
    for t in range(trials):
        if t % 4 == 3 and structured:
            label, m = structured[(t // 4) % len(structured)]
            yield label, m
            continue
        p = ps[t % 3]
        m = np.zeros(len(ball), dtype=bool)
        m[:n3] = rng.random(n3) < p
        yield f"bernoulli{p}", m


def field_family(ball: Ball, R: int, rng: np.random.Generator, trials: int) -> Iterator[tuple[str, ScalarField]]:
    """Fields on the ball: random signs, random small integers, random
    rationals with denominator up to 12, and indicators of random sets."""
    n3 = ball.volume(3 * R)
    N = len(ball)
    for t in range(trials):
        kind = t % 4
        vals = np.zeros(N, dtype=np.int64)
        if kind == 0:
            vals[:n3] = rng.choice((-1, 1), size=n3)
            yield "signs", ScalarField(ball, vals)
        elif kind == 1:
            vals[:n3] = rng.integers(-5, 6, size=n3)
            yield "ints", ScalarField(ball, vals)
        elif kind == 2:
            den = int(rng.integers(2, 13))
            vals[:n3] = rng.integers(-3 * den, 3 * den + 1, size=n3)
            yield f"rational/{den}", ScalarField(ball, vals, den)
        else:
            vals[:n3] = rng.random(n3) < 0.5
            yield "indicator", ScalarField(ball, vals)


@dataclass
class SweepResult:
    kind: str
    instances: int = 0
    violations: int = 0
    identity_failures: int = 0
    min_ratio: Fraction | None = None  # tightest (larger side / smaller side); < 1 means violated
    first_violation: str | None = None

    @property
    def ok(self) -> bool:
        return self.violations == 0 and self.identity_failures == 0

    def record(self, big, small) -> None:
        if small > 0:
            r = Fraction(big) / small
            if self.min_ratio is None or r < self.min_ratio:
                self.min_ratio = r


def isoperimetry_sweep(ball: Ball, R: int, trials: int, seed: int) -> SweepResult:
    """Isoperimetric check plus both indicator identities on random subsets."""
    rng = np.random.default_rng(seed)
    out = SweepResult("isoperimetry")
    for label, A in subset_family(ball, R, rng, trials):
        res = check_isoperimetry(ball, R, A)
        ids = indicator_identities(ball, R, A)
        out.instances += 1
        out.record(res.lhs, res.rhs)
        if not res.holds:
            out.violations += 1
            out.first_violation = out.first_violation or f"{label}: {res.lhs} < {res.rhs}"
        if not ids.ok:
            out.identity_failures += 1
            out.first_violation = out.first_violation or f"{label}: indicator identity failed"
    return out


def poincare_sweep(ball: Ball, R: int, trials: int, seed: int) -> SweepResult:
    rng = np.random.default_rng(seed)
    out = SweepResult("poincare")
    for label, f in field_family(ball, R, rng, trials):
        res = check_poincare(f, R)
        out.instances += 1
        out.record(res.rhs, res.lhs)
        if not res.holds:
            out.violations += 1
            out.first_violation = out.first_violation or f"{label}: {res.lhs} > {res.rhs}"
    return out
