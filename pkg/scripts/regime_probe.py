"""Desk probe on F2 x Z: check whether a budget is in the regime
sum_{k<=10n} f(k) = o(v_Z(n)) and, if so, run a greedy defence and report
the saved fraction."""

import argparse

from fireretain.budgets import parse_budget
from fireretain.xlab import ExperimentConfig, regime_check, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--budget", default="table:3,2,1,0,...")
    ap.add_argument("--T", type=int, default=6)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    budget = parse_budget(args.budget)
    reg = regime_check(budget, range(1, 11))
    print("n,prefix_sum_10n,v_Z(n)")
    for row in reg.rows:
        print(",".join(map(str, row)))
    print(f"# {args.budget}: {reg.verdict}")
    config = ExperimentConfig(group="F2xZ", strategy="greedy", budget=args.budget, T=args.T,
                              R_max=args.T + 1, report_radii=(args.T,), seed=args.seed)
    report = run_experiment(config)
    label = "in-regime" if reg.verdict == "in-regime" else "not in regime"
    print(f"# run ({label}):")
    print(report.summary())


if __name__ == "__main__":
    main()
