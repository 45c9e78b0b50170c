"""Experiment runner: config files, reports, CSV output and ball caches."""

from __future__ import annotations

import configparser
import csv
import fcntl
import io
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from fireretain.budgets import (
    Budget,
    BudgetClass,
    Constant,
    Exponential,
    Polynomial,
    Table,
    parse_budget,
)
from fireretain.cayley import (
    DEFAULT_MEMORY_BUDGET,
    CacheError,
    cache_path,
    enumerate_ball,
    load_ball,
    read_header,
    save_ball,
)
from fireretain.engine import LOG_COLUMNS, FireState, check_boundary_relation, run_simulation
from fireretain.groups import construct_group
from fireretain.strategies import LamplighterShieldStrategy, in_shield, parse_strategy


class ExperimentError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    group: str
    fire: str = "ball:0"
    strategy: str = "null"
    budget: str = "const:0"
    T: int = 10
    R_max: int = 12
    report_radii: tuple[int, ...] = ()
    seed: int = 0
    output: str | None = None
    name: str = "experiment"

    def __post_init__(self):
        if self.T < 1:
            raise ExperimentError(f"{self.name}: horizon T must be positive")
        kind, _, arg = self.fire.partition(":")
        if kind == "ball":
            r0 = int(arg)
            if r0 + self.T + 1 > self.R_max:
                raise ExperimentError(
                    f"{self.name}: r0 + T + 1 = {r0 + self.T + 1} exceeds R_max = {self.R_max}"
                )
        elif kind != "list":
            raise ExperimentError(f"{self.name}: fire must be 'ball:r' or 'list:hex,...', got {self.fire!r}")
        bad = [r for r in self.report_radii if r < 0 or r > self.R_max]
        if bad:
            raise ExperimentError(f"{self.name}: report radius {bad[0]} outside 0..{self.R_max}")

    @classmethod
    def from_text(cls, text: str, name: str = "experiment") -> "ExperimentConfig":
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        parser.read_string(text)
        if "experiment" not in parser:
            raise ExperimentError(f"{name}: missing [experiment] section")
        sec = parser["experiment"]
        known = {"group", "fire", "strategy", "budget", "T", "R_max", "report_radii", "seed", "output"}
        extra = set(sec) - known
        if extra:
            raise ExperimentError(f"{name}: unknown keys {sorted(extra)}")
        if "group" not in sec:
            raise ExperimentError(f"{name}: 'group' is required")
        kw = {k: sec[k] for k in ("group", "fire", "strategy", "budget", "output") if k in sec}
        try:
            for k in ("T", "R_max", "seed"):
                if k in sec:
                    kw[k] = int(sec[k])
            if "report_radii" in sec:
                kw["report_radii"] = tuple(int(r) for r in sec["report_radii"].split(",") if r.strip())
        except ValueError as exc:
            raise ExperimentError(f"{name}: {exc}") from None
        return cls(name=name, **kw)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        return cls.from_text(path.read_text(), name=path.stem)

    def to_text(self) -> str:
        lines = [
            "[experiment]",
            f"group = {self.group}",
            f"fire = {self.fire}",
            f"strategy = {self.strategy}",
            f"budget = {self.budget}",
            f"T = {self.T}",
            f"R_max = {self.R_max}",
            f"report_radii = {','.join(map(str, self.report_radii))}",
            f"seed = {self.seed}",
        ]
        if self.output:
            lines.append(f"output = {self.output}")
        return "\n".join(lines) + "\n"


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    log: list[tuple[int, int, int, int, int]]
    budget_values: list[int]
    saved: dict[int, Fraction]
    saved_by_turn: dict[int, list[Fraction | None]]
    constants: dict[str, object]
    boundary_ok: bool
    notes: list[tuple[int, str]] = field(default_factory=list)
    wall_time: float = 0.0

    def summary(self) -> str:
        c = self.config
        out = [f"{c.group} | {c.strategy} | {c.budget} | T={c.T} R_max={c.R_max} seed={c.seed}"]
        if self.log:
            _, total, _, _, prot = self.log[-1]
            out.append(f"burning after T: {total}, protected: {prot}")
        for r, fr in sorted(self.saved.items()):
            out.append(f"saved fraction at radius {r}: {fr} ~ {float(fr):.6f}")
        for k, v in self.constants.items():
            if not isinstance(v, (list, tuple)):
                out.append(f"{k}: {v}")
        out.append(f"boundary relation: {'holds' if self.boundary_ok else 'VIOLATED'}")
        return "\n".join(out)


def _with_seed(strategy: str, seed: int) -> str:
    kind = strategy.partition(":")[0]
    if kind in ("greedy", "random") and "seed=" not in strategy:
        return f"{kind}:seed={seed}"
    return strategy


def _initial_fire(config: ExperimentConfig, group, ball):
    kind, _, arg = config.fire.partition(":")
    if kind == "ball":
        return ball.elements[: ball.volume(int(arg))]
    return [group.decode(bytes.fromhex(h.strip())) for h in arg.split(",") if h.strip()]


def saved_by_turn(state: FireState, radius: int) -> list[Fraction | None]:
    """|U_n cap B_radius| / v(radius) after each turn n; None while the
    radius is still beyond r0 + n."""
    vol = state.ball.volume(radius)
    bt = state.burn_time[:vol]
    out = []
    for n in range(1, state.turn + 1):
        if radius > state.r0 + n:
            out.append(None)
        else:
            unburnt = int(np.count_nonzero((bt < 0) | (bt > n)))
            out.append(Fraction(unburnt, vol))
    return out


def run_experiment(config: ExperimentConfig, memory_budget: int = DEFAULT_MEMORY_BUDGET, ball=None) -> ExperimentReport:
    """Group -> ball -> simulation -> audits -> report."""
    t0 = time.perf_counter()
    try:
        group = construct_group(config.group)
        if ball is None or ball.radius != config.R_max or ball.group is not group:
            ball = enumerate_ball(group, config.R_max, memory_budget)
        budget = parse_budget(config.budget)
        strategy = parse_strategy(_with_seed(config.strategy, config.seed), group)
        F0 = _initial_fire(config, group, ball)
        state = run_simulation(ball, F0, strategy, budget, config.T)
    except Exception as exc:
        raise ExperimentError(f"{config.name}: {type(exc).__name__}: {exc}") from exc

    report_radii = [r for r in config.report_radii if r <= state.r0 + state.turn]
    saved = {}
    for r in report_radii:
        vol = ball.volume(r)
        saved[r] = Fraction(int(np.count_nonzero(state.burn_time[:vol] < 0)), vol)
    constants: dict[str, object] = {}
    # |F_n| / v(r0 + n): equals 1 exactly when nothing was protected in time
    constants["burn_over_volume"] = [
        Fraction(total, ball.volume(state.r0 + n)) for n, total, _, _, _ in state.log
    ]
    lengths = ball.lengths
    constants["speed_limit_ok"] = all(
        int(lengths[state.burn_time == n].max(initial=0)) <= state.r0 + n for n in range(state.turn + 1)
    )
    if isinstance(strategy, LamplighterShieldStrategy):
        burnt = [x for x, b in zip(ball.elements, state.burn_time) if b >= 0 and in_shield(x, strategy.M)]
        constants["shield_burnt"] = len(burnt)
    report = ExperimentReport(
        config=config,
        log=list(state.log),
        budget_values=[budget(n) for n in range(1, state.turn + 1)],
        saved=saved,
        saved_by_turn={r: saved_by_turn(state, r) for r in config.report_radii},
        constants=constants,
        boundary_ok=check_boundary_relation(state).ok,
        notes=list(state.notes),
    )
    report.wall_time = time.perf_counter() - t0
    return report


# --------------------------------------------------------------------------
# csv
# --------------------------------------------------------------------------


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return str(v)


def csv_text(report: ExperimentReport | None, radii: tuple[int, ...] = ()) -> str:
    """CSV body: the trajectory log, f(n), and one saved-fraction column per
    requested radius (exact rationals as ``num/den``)."""
    if report is not None and not radii:
        radii = report.config.report_radii
    header = list(LOG_COLUMNS) + ["budget"] + [f"saved_r{r}" for r in radii]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    if report is not None:
        for i, row in enumerate(report.log):
            extra = [_cell(report.saved_by_turn[r][i]) for r in radii]
            w.writerow([*row, report.budget_values[i], *extra])
    return buf.getvalue()


def emit_csv(report: ExperimentReport | None, path) -> Path:
    path = Path(path)
    path.write_bytes(csv_text(report).encode("ascii"))
    return path


# --------------------------------------------------------------------------
# budget analytics
# --------------------------------------------------------------------------


def budget_prefix_sum(budget: Budget, n: int) -> int:
    """Exact sum f(1) + ... + f(n)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return budget.prefix_sum(n)


def classify_budget(budget: Budget) -> BudgetClass:
    return budget.classify()


def eventually_zero(budget: Budget) -> bool | None:
    """Symbolic: True if f vanishes from some turn on, False if it
    provably does not, None when a finite table cannot tell."""
    if isinstance(budget, Constant):
        return budget.K == 0
    if isinstance(budget, Polynomial):
        return budget.K == 0
    if isinstance(budget, Exponential):
        return budget.coef == 0
    if isinstance(budget, Table):
        return budget.values[-1] == 0 if budget.repeat_last else None
    return None


@dataclass
class RegimeReport:
    budget: str
    rows: list[tuple[int, int, int]]  # (n, sum_{k<=10n} f(k), v_Z(n))
    verdict: str  # "in-regime", "out-of-regime" or "undetermined"


def regime_check(budget: Budget, ns) -> RegimeReport:
    """Desk harness for F2 x Z: compare sum_{k<=10n} f(k) with v_Z(n) = 2n+1.

    For the closed budget variants f is integer valued and non-decreasing,
    so the sum is o(n) exactly when f is eventually zero."""
    rows = []
    for n in ns:
        try:
            s = budget.prefix_sum(10 * n)
        except Exception:
            break
        rows.append((n, s, 2 * n + 1))
    ez = eventually_zero(budget)
    verdict = "undetermined" if ez is None else ("in-regime" if ez else "out-of-regime")
    return RegimeReport(getattr(budget, "text", str(budget)), rows, verdict)


# --------------------------------------------------------------------------
# cache administration
# --------------------------------------------------------------------------


@dataclass
class CacheStatus:
    ok: bool
    lines: list[str]

    def __str__(self):
        return "\n".join(self.lines)


def cache_admin(command: str, cache_dir, group_text: str | None = None, R: int | None = None,
                memory_budget: int = DEFAULT_MEMORY_BUDGET) -> CacheStatus:
    cache_dir = Path(cache_dir)
    if command == "list":
        if not cache_dir.is_dir():
            return CacheStatus(True, [])
        lines = []
        for p in sorted(cache_dir.glob("*.cayb")):
            try:
                text, radius, sizes, _ = read_header(p.read_bytes())
                lines.append(f"{p.name}\t{text}\tR={radius}\tv={sum(sizes)}")
            except CacheError as exc:
                lines.append(f"{p.name}\tinvalid: {exc}")
        return CacheStatus(True, lines)
    if group_text is None or R is None:
        raise ValueError(f"cache {command} needs a group and a radius")
    group = construct_group(group_text)
    path = cache_path(cache_dir, group, R)
    if command == "build":
        cache_dir.mkdir(parents=True, exist_ok=True)
        with open(path.with_suffix(".lock"), "w") as lock:
            fcntl.flock(lock, fcntl.LOCK_EX)
            ball = enumerate_ball(group, R, memory_budget)
            save_ball(ball, path)
        return CacheStatus(True, [f"built {path.name}: {group.text} R={R} v={len(ball)}"])
    if command == "verify":
        if not path.exists():
            return CacheStatus(False, [f"missing {path.name}"])
        try:
            ball = load_ball(group, path)
        except CacheError as exc:
            return CacheStatus(False, [f"{path.name}: {type(exc).__name__}: {exc}"])
        if ball.radius != R:
            return CacheStatus(False, [f"{path.name}: radius {ball.radius}, expected {R}"])
        return CacheStatus(True, [f"ok {path.name}: {group.text} R={R} v={len(ball)}"])
    raise ValueError(f"unknown cache command {command!r}")
