"""Finite protection on Z^2: random fixed schedules of at most K vertices in
B_r, saved fraction at radius 100 by turn 120."""

import argparse

import numpy as np

from fireretain.budgets import Constant
from fireretain.cayley import enumerate_ball
from fireretain.engine import run_simulation, saved_fraction
from fireretain.groups import construct_group
from fireretain.strategies import FixedSetStrategy


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--K", type=int, default=20)
    ap.add_argument("--inner", type=int, default=20)
    ap.add_argument("--T", type=int, default=120)
    ap.add_argument("--radius", type=int, default=100)
    ap.add_argument("--placements", type=int, default=25)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    ball = enumerate_ball(construct_group("Z^2"), args.T + 1)
    rng = np.random.default_rng(args.seed)
    print("placement,protected,saved_at_radius,fraction")
    for p in range(args.placements):
        ids = rng.choice(np.arange(1, ball.volume(args.inner)), size=args.K, replace=False)
        turns = rng.integers(1, args.K + 1, size=args.K)
        sched = [set() for _ in range(args.K)]
        for i, t in zip(ids.tolist(), turns.tolist()):
            sched[t - 1].add(ball.elements[i])
        st = run_simulation(ball, [(0, 0)], FixedSetStrategy(tuple(map(frozenset, sched))), Constant(args.K), args.T)
        frac = saved_fraction(st, args.radius)
        saved = frac.numerator * ball.volume(args.radius) // frac.denominator
        print(f"{p},{int(st.protected.sum())},{saved},{float(frac):.6f}")


if __name__ == "__main__":
    main()
