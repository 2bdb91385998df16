"""Compare dim W^k for orthogonal structures with the Schur module dimension of shape (k, 2).

Usage: python scripts/epstein_comparison.py [--n 2 3 4] [--max-order 3]
"""
import argparse

from gmoduli.lie import build_splitting, make_group
from gmoduli.moduli import epstein_dim, w_module


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, nargs="+", default=[2, 3])
    ap.add_argument("--max-order", type=int, default=3)
    args = ap.parse_args()
    print(f"{'n':>2} {'k':>2} {'dim W^k':>8} {'schur(k,2)':>10}  match")
    mismatches = 0
    for n in args.n:
        split = build_splitting(make_group(f"o:{n}"))
        for k in range(1, args.max_order + 1):
            w, e = w_module(k, split).dim, epstein_dim(n, k)
            mismatches += w != e
            print(f"{n:>2} {k:>2} {w:>8} {e:>10}  {'yes' if w == e else 'NO'}")
    raise SystemExit(1 if mismatches else 0)


if __name__ == "__main__":
    main()
