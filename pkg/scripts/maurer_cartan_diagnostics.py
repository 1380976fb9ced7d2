#!/usr/bin/env python3
"""Maurer-Cartan residuals against the finite-difference step."""

import argparse
import random

from jetconn import psl


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dim", type=int, default=1)
    ap.add_argument("--points", type=int, default=5)
    ap.add_argument("--steps", type=float, nargs="+", default=[1e-2, 1e-3, 1e-4, 1e-5])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    q = psl.random_point(rng, args.dim, False, over_origin=True, max_condition=50)
    pts = [psl.random_point(rng, args.dim, False, max_condition=50) for _ in range(args.points)]
    ks = [psl.random_group_element(rng, args.dim, False, spread=0.5) for _ in range(3)]
    print(f"{'step':>8} {'flatness':>10} {'invariance':>11} {'equivariance':>13} {'verticality':>12}")
    for h in args.steps:
        d = psl.form_diagnostics(q, pts, ks, h=h)
        print(f"{h:>8.0e} {d.flatness:>10.2e} {d.invariance:>11.2e} {d.equivariance:>13.2e} {d.verticality:>12.2e}")


if __name__ == "__main__":
    main()
