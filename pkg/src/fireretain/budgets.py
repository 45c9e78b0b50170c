"""Per-turn protection budgets f(n), evaluated in exact integer arithmetic."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


class BudgetError(ValueError):
    pass


def iroot(x: int, k: int) -> int:
    """Largest integer r with r**k <= x (x >= 0)."""
    if x < 0:
        raise ValueError("negative radicand")
    if k == 1 or x < 2:
        return x
    if k == 2:
        return math.isqrt(x)
    r = 1 << -(-x.bit_length() // k)
    while True:
        s = ((k - 1) * r + x // r ** (k - 1)) // k
        if s >= r:
            break
        r = s
    while r**k > x:
        r -= 1
    while (r + 1) ** k <= x:
        r += 1
    return r


@dataclass(frozen=True)
class BudgetClass:
    kind: str  # "subexponential", "exponential" or "unclassified"
    base: Fraction | None = None
    root: int = 1

    @property
    def rate(self) -> float | None:
        if self.base is None:
            return None
        return float(self.base) ** (1 / self.root)

    def __str__(self) -> str:
        if self.kind != "exponential":
            return self.kind
        b = str(self.base)
        return f"exponential({b})" if self.root == 1 else f"exponential({b}^(1/{self.root}))"


class Budget:
    def __call__(self, n: int) -> int:
        raise NotImplementedError

    def allows(self, n: int, size: int) -> bool:
        return size <= self(n)

    def prefix_sum(self, n: int) -> int:
        return sum(self(k) for k in range(1, n + 1))

    def classify(self) -> BudgetClass:
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(Budget):
    K: int

    def __post_init__(self):
        if self.K < 0:
            raise BudgetError("budget must be non-negative")

    def __call__(self, n):
        return self.K

    def prefix_sum(self, n):
        return self.K * max(n, 0)

    def classify(self):
        return BudgetClass("subexponential")

    @property
    def text(self):
        return f"const:{self.K}"


@dataclass(frozen=True)
class Polynomial(Budget):
    """K * n**d."""

    K: int
    d: int

    def __post_init__(self):
        if self.K < 0 or self.d < 0:
            raise BudgetError("polynomial budget needs K, d >= 0")

    def __call__(self, n):
        return self.K * n**self.d

    def classify(self):
        return BudgetClass("subexponential")

    @property
    def text(self):
        return f"poly:{self.K},{self.d}"


@dataclass(frozen=True)
class Exponential(Budget):
    """floor(coef * (num/den) ** (n/root)).

    ``Exponential(2, 2, 1, 2)`` is 2**((n+2)/2), the lamplighter shield budget.
    Comparisons raise both sides to the power ``root`` so no irrational number
    is ever formed.
    """

    coef: int
    num: int
    den: int = 1
    root: int = 1

    def __post_init__(self):
        if self.coef < 0 or self.num < 1 or self.den < 1 or self.root < 1:
            raise BudgetError("exponential budget needs coef >= 0, num, den, root >= 1")

    def _power(self, n: int) -> Fraction:
        return Fraction(self.coef**self.root * self.num**n, self.den**n)

    def __call__(self, n):
        return iroot(math.floor(self._power(n)), self.root)

    def allows(self, n, size):
        return Fraction(size) ** self.root <= self._power(n)

    def classify(self):
        if self.num <= self.den:
            return BudgetClass("subexponential")
        return BudgetClass("exponential", Fraction(self.num, self.den), self.root)

    @property
    def text(self):
        return f"exp:{self.coef},{self.num},{self.den},{self.root}"


SHIELD_BUDGET = Exponential(2, 2, 1, 2)


@dataclass(frozen=True)
class Table(Budget):
    """Explicit values f(1), f(2), ...; past the end either an error or, when
    ``repeat_last`` is set, the final value forever."""

    values: tuple[int, ...]
    repeat_last: bool = False

    def __post_init__(self):
        if any(v < 0 for v in self.values):
            raise BudgetError("budget must be non-negative")
        if self.repeat_last and not self.values:
            raise BudgetError("cannot repeat the last value of an empty table")

    def __call__(self, n):
        if n < 1:
            raise BudgetError("budgets are indexed from turn 1")
        if n <= len(self.values):
            return self.values[n - 1]
        if self.repeat_last:
            return self.values[-1]
        raise BudgetError(f"budget table has {len(self.values)} entries, turn {n} requested")

    def classify(self):
        return BudgetClass("unclassified")

    @property
    def text(self):
        body = ",".join(map(str, self.values))
        return f"table:{body}" + (",..." if self.repeat_last else "")


def parse_budget(text: str) -> Budget:
    """``const:K``, ``poly:K,d``, ``exp:coef,num[,den[,root]]``, ``shield``,
    ``table:v1,v2,...[,...]`` (trailing ``...`` repeats the last value)."""
    text = text.strip()
    if text == "shield":
        return SHIELD_BUDGET
    kind, _, args = text.partition(":")
    try:
        if kind == "const":
            return Constant(int(args))
        if kind == "poly":
            K, d = (int(x) for x in args.split(","))
            return Polynomial(K, d)
        if kind == "exp":
            return Exponential(*(int(x) for x in args.split(",")))
        if kind == "table":
            parts = [p for p in args.split(",") if p]
            repeat = bool(parts) and parts[-1] == "..."
            if repeat:
                parts = parts[:-1]
            return Table(tuple(int(p) for p in parts), repeat)
    except (TypeError, ValueError) as exc:
        raise BudgetError(f"bad budget specifier {text!r}: {exc}") from None
    raise BudgetError(f"unknown budget specifier {text!r}")
