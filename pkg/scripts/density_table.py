#!/usr/bin/env python3
"""Exact density tables: share of homogeneous degree-d polynomials lying in
k[x1, x2^p, ..., xr^p], against the limit 1/p^(r-1)."""

import argparse

from fieldrec.lines import density_ratio


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--primes", type=int, nargs="+", default=[2, 3, 5])
    ap.add_argument("--r", type=int, nargs="+", default=[2, 3])
    ap.add_argument("--d", type=int, default=500)
    ap.add_argument("--step", type=int, default=100)
    args = ap.parse_args()

    print("p\tr\td\tratio\tdecimal\tlimit")
    for p in args.primes:
        for r in args.r:
            limit = 1 / p ** (r - 1)
            for d in range(args.step, args.d + 1, args.step):
                q = density_ratio(p, r, d)
                print(f"{p}\t{r}\t{d}\t{q.numerator}/{q.denominator}"
                      f"\t{float(q):.8f}\t{limit:.8f}")


if __name__ == "__main__":
    main()
