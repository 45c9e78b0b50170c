"""Growth table of several groups with doubling ratios v(2n)/v(n)."""

import argparse

from fireretain.cayley import BallTooLarge, growth_table
from fireretain.groups import construct_group

DEFAULT = ["Z", "Z^2", "Z^3", "H3", "F2", "F2xZ", "Z2wrZ", "Z3wrZ"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("groups", nargs="*", default=DEFAULT)
    ap.add_argument("--radius", type=int, default=10)
    ap.add_argument("--memory-budget", type=int, default=2_000_000)
    args = ap.parse_args()
    for text in args.groups:
        G = construct_group(text)
        R = args.radius
        while True:
            try:
                g = growth_table(G, R, args.memory_budget).values
                break
            except BallTooLarge as exc:
                R = exc.largest_radius
        ratios = " ".join(f"{g[2 * n] / g[n]:.2f}" for n in range(1, R // 2 + 1))
        print(f"{G.text:10s} |S|={len(G.generators):2d} R={R:2d} v={list(g)}")
        print(f"{'':10s} v(2n)/v(n): {ratios}")


if __name__ == "__main__":
    main()
