#!/usr/bin/env python3
"""Compare the closed-form reduced basis with Buchberger for small classes."""

import argparse
import itertools
import time

from vizsos import polyalg as pa


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-vertices", type=int, default=5,
                    help="run Buchberger for n_g + n_h up to this (6 takes ~30 s per class)")
    ap.add_argument("--spairs", nargs=2, type=int, action="append", metavar=("NG", "NH"),
                    help="also check that all S-pairs of the closed form reduce to 0")
    a = ap.parse_args()

    for total in range(2, a.max_vertices + 1):
        for ng in range(1, total):
            p = pa.ClassParams(ng, total - ng)
            t = time.perf_counter()
            gb = pa.closed_form_gb(p)
            bb = pa.buchberger(pa.build_generators(p, gb[0].order))
            verdict = "IDENTICAL" if pa.same_basis(gb, bb) else "DIFFERENT"
            print(f"({p.n_g},{p.n_h})  closed form {len(gb):>3}  buchberger {len(bb):>3}  "
                  f"{verdict}  ({time.perf_counter() - t:.1f} s)")

    for ng, nh in a.spairs or ():
        t = time.perf_counter()
        gb = pa.closed_form_gb(pa.ClassParams(ng, nh))
        red = pa.Reducer(gb)
        bad = sum(not red(pa.s_polynomial(f, g)).is_zero()
                  for f, g in itertools.combinations(gb, 2))
        print(f"({ng},{nh})  {len(gb)} elements, S-pairs not reducing to 0: {bad}  "
              f"({time.perf_counter() - t:.1f} s)")


if __name__ == "__main__":
    main()
