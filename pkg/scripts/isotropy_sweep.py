#!/usr/bin/env python3
"""Sample rational points over the origin and tabulate stabiliser dimensions.

Small heights land on the special loci (Z an eigenvector of W^T) often enough
to show up in the histogram; large heights should give dimension 0 throughout.
"""

import argparse
import random
from collections import Counter

from jetconn import psl


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dims", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--heights", type=int, nargs="+", default=[1, 3, 9, 10 ** 6])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"{'n':>2} {'height':>8}  dimension histogram")
    for n in args.dims:
        for height in args.heights:
            rng = random.Random(f"{args.seed}:{n}:{height}")
            hist = Counter(psl.isotropy_nullspace(psl.random_point(rng, n, over_origin=True, height=height)).dimension
                           for _ in range(args.trials))
            print(f"{n:>2} {height:>8}  " + "  ".join(f"{d}:{c}" for d, c in sorted(hist.items())))


if __name__ == "__main__":
    main()
