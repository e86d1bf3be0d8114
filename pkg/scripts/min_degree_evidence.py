#!/usr/bin/env python3
"""Feasibility of the generic ell-SOS SDP on the full ring for small classes.

Results are numerical evidence only; the solver cannot prove infeasibility.
"""

import argparse
import time

from vizsos.certsearch import pipeline_sdp
from vizsos.sdpsolve import feasibility


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--classes", nargs=2, type=int, action="append", metavar=("NG", "NH"))
    ap.add_argument("--ell", type=int, nargs="+", default=[1, 2])
    a = ap.parse_args()
    classes = a.classes or [(2, 2), (3, 2), (2, 3)]
    print(f"{'class':<8}{'ell':>4}{'gram':>6}{'rows':>6}  {'result':<17}{'measure':>10}  time")
    for ng, nh in classes:
        for ell in a.ell:
            ps = pipeline_sdp(ng, nh, ell)
            t = time.perf_counter()
            r = feasibility(ps.problem)
            print(f"({ng},{nh})   {ell:>4}{ps.problem.n:>6}{len(ps.problem.constraints):>6}  "
                  f"{type(r).__name__:<17}{r.measure:>10.2e}  {time.perf_counter() - t:.2f} s")
    print("(numerical evidence)")


if __name__ == "__main__":
    main()
