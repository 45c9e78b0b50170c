"""Shield density |S cap B_R| / v(R) on Z2 wr Z, by packed BFS and by
closed-form counting, next to 2^(-M-3) and (4/3) 2^(-M-3)."""

import argparse
import csv
import sys
from fractions import Fraction

from fireretain.cayley import shield_census


def closed_form_volume(R):
    total = 0
    for m in range(-R, 1):
        for M in range(0, R + 1):
            for k in range(m, M + 1):
                if m == M == 0:
                    total += 1 + (R >= 2)
                elif 2 * (M - m) - abs(k) <= R:
                    total += 2 ** (max(0, M - m - 1) + (m == min(0, k)) + (M == max(0, k)))
    return total


def closed_form_shield(R, M):
    return sum(2 ** (top - M - 1) if top > k else 2 ** (k - M)
               for k in range(M + 2, R + 1) for top in range(k, R + 1) if 2 * top - k <= R)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--M", type=int, default=3)
    ap.add_argument("--bfs-radius", type=int, default=19, help="largest radius for the packed BFS")
    ap.add_argument("--far", type=int, nargs="*", default=[30, 60, 120], help="extra radii by counting only")
    args = ap.parse_args()
    M = args.M
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["radius", "method", "shield", "volume", "ratio", "ratio_times_2^(M+3)"])
    for r, hits, vol in shield_census(M, args.bfs_radius):
        if r >= M + 2:
            q = Fraction(hits, vol)
            w.writerow([r, "bfs", hits, vol, f"{float(q):.10f}", f"{float(q * 2 ** (M + 3)):.8f}"])
    for r in args.far:
        hits, vol = closed_form_shield(r, M), closed_form_volume(r)
        q = Fraction(hits, vol)
        w.writerow([r, "count", hits, vol, f"{float(q):.10f}", f"{float(q * 2 ** (M + 3)):.8f}"])


if __name__ == "__main__":
    main()
