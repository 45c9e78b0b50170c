"""Command line front end: ``fireretain <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

from fireretain.budgets import SHIELD_BUDGET
from fireretain.cayley import (
    DEFAULT_MEMORY_BUDGET,
    BallTooLarge,
    enumerate_ball,
    lamplighter_growth,
    shield_census,
)
from fireretain.engine import run_simulation
from fireretain.groups import LAMPLIGHTER, construct_group
from fireretain.isoperimetry import isoperimetry_sweep, poincare_sweep
from fireretain.strategies import LamplighterShieldStrategy, in_shield
from fireretain.wreath_paths import (
    PairFamily,
    PathError,
    classify_case,
    construct_connecting_paths,
    dilute_paths,
    verify_disjointness,
)
from fireretain.xlab import ExperimentConfig, ExperimentError, cache_admin, emit_csv, run_experiment

CACHE_ENV = "FIRERETAIN_CACHE"


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    return Path(env) if env else Path.home() / ".cache" / "fireretain"


def cmd_growth(args) -> int:
    group = construct_group(args.group)
    try:
        values = enumerate_ball(group, args.Rmax, args.memory_budget).growth()
    except BallTooLarge as exc:
        if group.descriptor != LAMPLIGHTER:
            print(exc, file=sys.stderr)
            return 2
        values = lamplighter_growth(args.Rmax)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["radius", "volume"])
    for r, v in enumerate(values):
        w.writerow([r, v])
    return 0


def cmd_simulate(args) -> int:
    config = ExperimentConfig.load(args.config)
    report = run_experiment(config, args.memory_budget)
    print(report.summary())
    out = args.output or config.output
    if out:
        emit_csv(report, out)
        print(f"wrote {out}")
    return 0 if report.boundary_ok else 1


def _sweep(args, fn) -> int:
    group = construct_group(args.group)
    ball = enumerate_ball(group, 3 * args.R, args.memory_budget)
    res = fn(ball, args.R, args.trials, args.seed)
    ratio = "n/a" if res.min_ratio is None else f"{float(res.min_ratio):.6g}"
    print(f"{res.kind} {group.text} R={args.R} seed={args.seed}: {res.instances} instances, "
          f"{res.violations} violations, {res.identity_failures} identity failures, tightest ratio {ratio}")
    if res.first_violation:
        print(f"first violation: {res.first_violation}")
    return 0 if res.ok else 1


def cmd_isoperim(args) -> int:
    return _sweep(args, isoperimetry_sweep)


def cmd_poincare(args) -> int:
    return _sweep(args, poincare_sweep)


def read_family(path) -> PairFamily:
    """Family file: ``group G``, ``n N``, optional ``case K``, then
    ``pair <hex a> <hex b>`` lines.  ``#`` starts a comment."""
    group = None
    n = None
    case = None
    A, B = [], []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].split()
        if not line:
            continue
        key, *rest = line
        try:
            if key == "group":
                group = construct_group(rest[0])
            elif key == "n":
                n = int(rest[0])
            elif key == "case":
                case = int(rest[0])
            elif key == "pair":
                if group is None:
                    raise PathError("'group' must precede the pairs")
                A.append(group.decode(bytes.fromhex(rest[0])))
                B.append(group.decode(bytes.fromhex(rest[1])))
            else:
                raise PathError(f"unknown key {key!r}")
        except (IndexError, ValueError) as exc:
            raise PathError(f"{path}:{lineno}: {exc}") from None
    if group is None or n is None:
        raise PathError(f"{path}: 'group' and 'n' are required")
    return PairFamily(group, n, A, B, case)


def cmd_paths(args) -> int:
    family = read_family(args.family)
    paths = construct_connecting_paths(family, require_in_ball=not args.no_ball_check)
    case = family.case or classify_case(family.A, family.B)
    report = verify_disjointness(paths, case, family.n)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["index", "length", "endpoint_ok", "intersections"])
    for p, c in zip(paths, report.counts):
        ok = family.group.word_product(p.word, p.start) == p.end
        w.writerow([p.index, p.length, int(ok), c])
    kept = dilute_paths(paths, report)
    print(f"# case {case}, n={family.n}: pairwise disjoint {report.pairwise_disjoint}, "
          f"max intersections {report.max_count} (bound {report.bound}), diluted to {len(kept)}")
    return 0 if report.ok else 1


def cmd_shield_verify(args) -> int:
    M, T = args.M, args.T
    radius = args.radius or T + 1
    group = construct_group(LAMPLIGHTER)
    ball = enumerate_ball(group, radius, args.memory_budget)
    strategy = LamplighterShieldStrategy(M)
    state = run_simulation(ball, [group.identity], strategy, SHIELD_BUDGET, T)
    burnt = sum(1 for x, b in zip(ball.elements, state.burn_time) if b >= 0 and in_shield(x, M))
    print("turn,protected,budget_sq_bound,ok")
    over = 0
    for n, _, _, w, _ in state.log:
        ok = SHIELD_BUDGET.allows(n, w)
        over += not ok
        print(f"{n},{w},{2 ** (n + 2)},{int(ok)}")
    print(f"# shield elements burnt by turn {T}: {burnt}")
    if args.census:
        print("radius,shield,volume,ratio")
        for r, hits, vol in shield_census(M, args.census):
            print(f"{r},{hits},{vol},{hits / vol:.8f}")
    return 0 if burnt == 0 and over == 0 else 1


def cmd_cache(args) -> int:
    cache_dir = Path(args.cache_dir) if args.cache_dir else default_cache_dir()
    status = cache_admin(args.action, cache_dir, args.group, args.R, args.memory_budget)
    if status.lines:
        print(status)
    return 0 if status.ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fireretain", description="Firefighting on Cayley graphs.")
    p.add_argument("--memory-budget", type=int, default=DEFAULT_MEMORY_BUDGET,
                   help="largest ball (in elements) any command may materialize")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("growth", help="print v(r) for r <= Rmax")
    s.add_argument("group")
    s.add_argument("Rmax", type=int)
    s.set_defaults(func=cmd_growth)

    s = sub.add_parser("simulate", help="run an experiment config")
    s.add_argument("config")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_simulate)

    for name, fn in (("isoperim", cmd_isoperim), ("poincare", cmd_poincare)):
        s = sub.add_parser(name, help=f"randomized {name} checks on B_3R")
        s.add_argument("group")
        s.add_argument("R", type=int)
        s.add_argument("--trials", type=int, default=200)
        s.add_argument("--seed", type=int, default=0)
        s.set_defaults(func=fn)

    s = sub.add_parser("paths", help="compile and audit connecting paths")
    s.add_argument("family")
    s.add_argument("--no-ball-check", action="store_true", help="allow pairs outside B_n")
    s.set_defaults(func=cmd_paths)

    s = sub.add_parser("shield-verify", help="run the lamplighter shield strategy")
    s.add_argument("M", type=int)
    s.add_argument("T", type=int)
    s.add_argument("--radius", type=int, default=0)
    s.add_argument("--census", type=int, default=0, metavar="R", help="also print the shield census to R")
    s.set_defaults(func=cmd_shield_verify)

    s = sub.add_parser("cache", help="build, verify or list ball caches")
    s.add_argument("action", choices=("build", "verify", "list"))
    s.add_argument("group", nargs="?")
    s.add_argument("R", type=int, nargs="?")
    s.add_argument("--cache-dir", help=f"defaults to ${CACHE_ENV} or ~/.cache/fireretain")
    s.set_defaults(func=cmd_cache)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ExperimentError, PathError, BallTooLarge, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
