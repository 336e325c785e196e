#!/usr/bin/env python3
"""Solve the four generated suites and drop one CSV per family.

Each suite holds a compatible half and an incompatible half at the
standard protocol (tol = eps, maxit = 4n).  The printed line per family
is the fraction of runs scoring relerr <= 1e-5 against the dense SVD
reference.
"""

import argparse
import os
import sys

sys.path.insert(
    0, os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "src"))

from symkrylov.cli import DEFAULT_SEED, run_suite, write_records

FAMILIES = {"cs-h": 50, "cs-m": 50, "ss": 51, "sh": 51}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=10,
                        help="problems per half suite (default 10)")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--out-dir", default="results")
    parser.add_argument("--families", nargs="*", default=sorted(FAMILIES),
                        choices=sorted(FAMILIES))
    parser.add_argument("--reorthogonalize", action="store_true",
                        help="full reorthogonalization (exact rank "
                             "termination on singular problems)")
    args = parser.parse_args(argv)

    os.makedirs(args.out_dir, exist_ok=True)
    for family in args.families:
        records = run_suite(family, FAMILIES[family], args.count, args.seed,
                            reorthogonalize=args.reorthogonalize)
        path = os.path.join(args.out_dir, f"{family}.csv")
        with open(path, "w", newline="") as fh:
            write_records(records, fh)
        good = sum(1 for r in records if r.relerr <= 1e-5)
        print(f"{family}: {good}/{len(records)} with relerr <= 1e-5 "
              f"-> {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
