#!/usr/bin/env python3
"""Search certificates for a range of d and write them as JSON files."""

import argparse
import logging
import time
from pathlib import Path

from vizsos.certsearch import NoSolutionFound, find_certificate, splits, verify_bruteforce, verify_exact


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--from", dest="d_from", type=int, default=3)
    ap.add_argument("--to", dest="d_to", type=int, default=12)
    ap.add_argument("--outdir", type=Path, default=Path("certificates"))
    ap.add_argument("--brute", action="store_true", help="also brute-force every small split")
    ap.add_argument("-v", "--verbose", action="store_true")
    a = ap.parse_args()
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING)
    a.outdir.mkdir(parents=True, exist_ok=True)

    for d in range(a.d_from, a.d_to + 1):
        t = time.perf_counter()
        try:
            c = find_certificate(d)
        except NoSolutionFound as e:
            print(f"d={d:<3} FAILED  {e}  ({time.perf_counter() - t:.2f} s)")
            continue
        ok = verify_exact(c).ok
        if a.brute:
            ok = ok and all(verify_bruteforce(c, ng, nh).ok for ng, nh in splits(d))
        path = a.outdir / f"cert_d{d}.json"
        path.write_text(c.dumps())
        fixed = ", ".join(f"{p.var}={p.value}" for p in c.provenance) or "nothing to fix"
        print(f"d={d:<3} {'ok' if ok else 'NOT VERIFIED'}  {fixed}  -> {path}  "
              f"({time.perf_counter() - t:.2f} s)")


if __name__ == "__main__":
    main()
