#!/usr/bin/env python3
"""Exact tangent dimension of the incidence variety at explicit fiber points."""

import argparse
import random

from gmpy2 import mpq

from jetconn import psl


def fiber_point(rng, n):
    lams, seen = [], {mpq(0), mpq(1)}
    while len(lams) < n - 1:
        v = mpq(rng.randint(-9, 9), rng.randint(1, 9))
        if v not in seen:
            seen.add(v)
            lams.append(v)
    return psl.explicit_fiber(lams, [mpq(rng.randint(-9, 9)) for _ in range(n - 1)])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dims", type=int, nargs="+", default=[2, 3], help="n >= 2")
    ap.add_argument("--samples", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    print(f"{'n':>2} {'fiber':>6} {'tangent':>8} {'sl-tangent':>11} {'n^2+2n-1':>9}")
    for n in args.dims:
        for _ in range(args.samples):
            fib = fiber_point(rng, n)
            tan = psl.incidence_tangent_dim(fib.A, fib.B, fib.Z, fib.particular)
            try:
                sl = psl.incidence_tangent_dim(fib.A, fib.B, fib.Z, fib.particular, special_linear=True)
            except psl.NotOnIncidenceError:  # det A != 1
                sl = "-"
            print(f"{n:>2} {fib.dimension:>6} {tan:>8} {sl:>11} {n * n + 2 * n - 1:>9}")
    # eigenvalues 2 and 1/2 make det A = 1, so the special linear variant applies
    fib = psl.explicit_fiber([mpq(2), mpq(1, 2)], [mpq(1), mpq(1)])
    tan = psl.incidence_tangent_dim(fib.A, fib.B, fib.Z, fib.particular)
    sl = psl.incidence_tangent_dim(fib.A, fib.B, fib.Z, fib.particular, special_linear=True)
    print(f"{3:>2} {fib.dimension:>6} {tan:>8} {sl:>11} {14:>9}")


if __name__ == "__main__":
    main()
