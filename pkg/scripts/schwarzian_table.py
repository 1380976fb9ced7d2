#!/usr/bin/env python3
"""Print Taylor coefficients of the scaled Schwarzian for a few standard germs."""

import argparse
from math import factorial

from gmpy2 import mpq

from jetconn import transverse_ode as to
from jetconn.series import TruncatedSeries


def germs(order):
    x = TruncatedSeries.variable(0, 1, order)
    return {
        "x + x^2": x + x * x,
        "exp(x)": TruncatedSeries.univariate([mpq(1, factorial(i)) for i in range(order + 1)]),
        "x/(1-x)": x * (1 - x).reciprocal(),
        "log(1+x)": TruncatedSeries.univariate([0] + [mpq((-1) ** (i + 1), i) for i in range(1, order + 1)]),
        "tan (ratio)": None,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--order", type=int, default=10)
    ap.add_argument("--terms", type=int, default=6)
    args = ap.parse_args()

    for name, f in germs(args.order).items():
        if f is None:
            z, one = TruncatedSeries.zero(1, args.order), TruncatedSeries.constant(1, 1, args.order)
            (c,), (s,) = to.fundamental_basis(to.TransverseEquation.second_order(z, one))
            th = to.schwarzian_ratio(s, c)
        else:
            th = to.schwarzian(f)
        coeffs = [str(v) for v in th.coeffs[: args.terms]]
        print(f"{name:<12} order {th.order:>2}: " + ", ".join(coeffs))


if __name__ == "__main__":
    main()
