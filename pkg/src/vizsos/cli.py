"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage error,
3 no certificate found.
"""

from __future__ import annotations

import argparse
import logging
import random
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Sequence, TextIO

import numpy as np

from . import __version__
from . import certsearch as cs
from . import polyalg as pa
from .exactmath import rat, rat_str
from .rhocalc import entry_name, parse_entry
from .sdpsolve import feasibility

OK, FAILED, USAGE, NO_SOLUTION = 0, 1, 2, 3

# Buchberger on bigger classes takes minutes; keep the CLI oracle interactive
ORACLE_MAX_VERTICES = 6


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_fix(text: str) -> tuple[str, Fraction]:
    name, sep, value = text.partition("=")
    if not sep:
        raise UsageError(f"--fix expects F_i_j=p/q, got {text!r}")
    try:
        i, j = parse_entry(name.strip())
        return entry_name(i, j), rat(value.strip())
    except (ValueError, ZeroDivisionError) as e:
        raise UsageError(f"bad --fix {text!r}: {e}") from None


def _emit(out: TextIO, obj) -> None:
    out.write(cs.dumps_canonical(obj))


def _params(a) -> pa.ClassParams:
    try:
        return pa.ClassParams(a.ng, a.nh)
    except ValueError as e:
        raise UsageError(str(e)) from None


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_gb(a, out: TextIO) -> int:
    params = _params(a)
    try:
        gb = pa.closed_form_gb(params)
    except pa.CapExceeded as e:
        raise UsageError(str(e)) from None
    verdict = None
    if a.oracle:
        if params.n_g + params.n_h > ORACLE_MAX_VERTICES:
            raise UsageError(f"--oracle is limited to n_g + n_h <= {ORACLE_MAX_VERTICES}")
        t = time.perf_counter()
        bb = pa.buchberger(pa.build_generators(params, gb[0].order))
        same = pa.same_basis(gb, bb)
        verdict = ("IDENTICAL" if same else "DIFFERENT", len(bb), time.perf_counter() - t)
    if a.json:
        o = {"n_g": params.n_g, "n_h": params.n_h, "size": len(gb),
             "basis": [str(p) for p in gb]}
        if verdict:
            o["oracle"] = {"result": verdict[0], "buchberger_size": verdict[1]}
        _emit(out, o)
    else:
        for p in gb:
            print(p, file=out)
        print(f"# {len(gb)} elements", file=out)
        if verdict:
            print(f"{verdict[0]} (buchberger: {verdict[1]} elements, {verdict[2]:.1f} s)", file=out)
    return OK if verdict is None or verdict[0] == "IDENTICAL" else FAILED


def cmd_generators(a, out: TextIO) -> int:
    params = _params(a)
    gens = pa.build_generators(params)
    if a.json:
        _emit(out, {"n_g": params.n_g, "n_h": params.n_h,
                    "generators": [str(p) for p in gens],
                    "f_viz": str(pa.build_fviz(params))})
    else:
        for p in gens:
            print(p, file=out)
        print(f"# {len(gens)} generators; f_viz = {pa.build_fviz(params)}", file=out)
    return OK


def cmd_find_cert(a, out: TextIO) -> int:
    fixed = dict(_parse_fix(f) for f in a.fix)
    try:
        opts = cs.SearchOptions(margin=rat(a.margin), fixed=fixed,
                                max_backtracks=a.max_backtracks, order=a.order)
    except ValueError as e:
        raise UsageError(str(e)) from None
    try:
        c = cs.find_certificate(a.d, opts)
    except ValueError as e:
        raise UsageError(str(e)) from None
    text = c.dumps()
    if a.out:
        Path(a.out).write_text(text)
    if a.json:
        out.write(text)
    else:
        print(f"d = {c.d}, F =", file=out)
        for row in c.F.tolist():
            print("  " + "  ".join(f"{rat_str(x):>10}" for x in row), file=out)
        if c.rows is not None:
            print("square-root rows (radicand, coefficients):", file=out)
            for r, cs_ in c.rows:
                print(f"  {rat_str(r):>8}  [{', '.join(rat_str(x) for x in cs_)}]", file=out)
        for p in c.provenance:
            src = "fixed" if p.source == "fixed" else f"from [{p.lo:.6g}, {p.hi:.6g}]"
            print(f"  {p.var} = {rat_str(p.value)}  ({src})", file=out)
        print(c.anchor_note, file=out)
    return OK


def _load_cert(path: str) -> cs.Certificate:
    return cs.Certificate.loads(Path(path).read_text())


def cmd_verify(a, out: TextIO) -> int:
    v = cs.Verdict()
    try:
        c = _load_cert(a.file)
    except OSError as e:
        raise UsageError(str(e)) from None
    except (ValueError, KeyError, TypeError, IndexError, ZeroDivisionError) as e:
        v.add("parse", False, f"{type(e).__name__}: {e}")
        c = None
    if c is not None:
        v.extend(cs.verify_exact(c))
        for ng, nh in a.brute or ():
            try:
                v.extend(cs.verify_bruteforce(c, ng, nh, cap=a.cap))
            except (pa.CapExceeded, ValueError) as e:
                raise UsageError(str(e)) from None
    if a.json:
        _emit(out, v.to_json())
    else:
        for line in v.lines():
            print(line, file=out)
        print("OK" if v.ok else "FAILED: " + ", ".join(v.failed), file=out)
    return OK if v.ok else FAILED


def cmd_brute_check(a, out: TextIO) -> int:
    if a.file:
        c = _load_cert(a.file)
    else:
        c = cs.find_certificate(a.d)
    pairs = cs.splits(c.d, a.cap)
    if not pairs:
        raise UsageError(f"no split of d={c.d} fits the cap {a.cap}")
    v = cs.Verdict()
    for ng, nh in pairs:
        v.extend(cs.verify_bruteforce(c, ng, nh, cap=a.cap, full=a.full))
    if a.json:
        _emit(out, v.to_json())
    else:
        for line in v.lines():
            print(line, file=out)
        print("OK" if v.ok else "FAILED: " + ", ".join(v.failed), file=out)
    return OK if v.ok else FAILED


def cmd_sdp_pipeline(a, out: TextIO) -> int:
    try:
        ps = cs.pipeline_sdp(a.ng, a.nh, a.ell)
    except (pa.CapExceeded, ValueError) as e:
        raise UsageError(str(e)) from None
    t = time.perf_counter()
    res = feasibility(ps.problem)
    dt = time.perf_counter() - t
    o = {"n_g": a.ng, "n_h": a.nh, "ell": a.ell, "result": type(res).__name__,
         "measure": res.measure, "label": res.label,
         "gram_size": ps.problem.n, "constraints": len(ps.problem.constraints)}
    if a.json:
        _emit(out, o)
    else:
        print(f"({a.ng},{a.nh}) ell={a.ell}: Gram {o['gram_size']}x{o['gram_size']}, "
              f"{o['constraints']} constraints", file=out)
        print(f"{o['result']}  measure {res.measure:.3g}  [{res.label}]  {dt:.2f} s", file=out)
    return OK


def cmd_structure_check(a, out: TextIO) -> int:
    try:
        rows = cs.check_structure_identities(a.d_from, a.d_to)
    except ValueError as e:
        raise UsageError(str(e)) from None
    if a.json:
        _emit(out, [{"d": r.d, "check": r.check, "ok": r.ok, "tier": r.tier,
                     "detail": r.detail} for r in rows])
    else:
        for r in rows:
            print(f"d={r.d:<3} {'PASS' if r.ok else 'FAIL'}  {r.check:<40} "
                  f"[{r.tier}] {r.detail}", file=out)
    return OK if all(r.ok for r in rows) else FAILED


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="vizsos", description="SOS certificates for Vizing's conjecture "
                                            "(one dominating vertex per factor)")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--seed", type=int, default=0, help="seed for any randomized step")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def sizes(q):
        q.add_argument("--ng", type=int, required=True)
        q.add_argument("--nh", type=int, required=True)

    q = sub.add_parser("gb", help="closed-form reduced Groebner basis")
    sizes(q)
    q.add_argument("--oracle", action="store_true", help="compare with Buchberger")
    q.add_argument("--json", action="store_true")
    q.set_defaults(func=cmd_gb)

    q = sub.add_parser("generators", help="generators of the Vizing ideal")
    sizes(q)
    q.add_argument("--json", action="store_true")
    q.set_defaults(func=cmd_generators)

    q = sub.add_parser("find-cert", help="search for a rational certificate")
    q.add_argument("--d", type=int, required=True)
    q.add_argument("--fix", action="append", default=[], metavar="F_i_j=p/q")
    q.add_argument("--margin", default="1/20")
    q.add_argument("--max-backtracks", type=int, default=8)
    q.add_argument("--order", choices=("diagonal-first", "lexicographic"),
                   default="diagonal-first")
    q.add_argument("--json", action="store_true")
    q.add_argument("--out")
    q.set_defaults(func=cmd_find_cert)

    q = sub.add_parser("verify", help="check a certificate file")
    q.add_argument("--file", required=True)
    q.add_argument("--brute", nargs=2, type=int, action="append", metavar=("NG", "NH"))
    q.add_argument("--cap", type=int, default=pa.DEFAULT_CAP)
    q.add_argument("--json", action="store_true")
    q.set_defaults(func=cmd_verify)

    q = sub.add_parser("brute-check", help="evaluate a certificate on every small split")
    src = q.add_mutually_exclusive_group(required=True)
    src.add_argument("--file")
    src.add_argument("--d", type=int)
    q.add_argument("--cap", type=int, default=pa.DEFAULT_CAP)
    q.add_argument("--full", action="store_true", help="walk edge variables too")
    q.add_argument("--json", action="store_true")
    q.set_defaults(func=cmd_brute_check)

    q = sub.add_parser("sdp-pipeline", help="generic ell-SOS feasibility on the full ring")
    sizes(q)
    q.add_argument("--ell", type=int, required=True)
    q.add_argument("--json", action="store_true")
    q.set_defaults(func=cmd_sdp_pipeline)

    q = sub.add_parser("structure-check", help="exact identities of the F-system")
    q.add_argument("--from", dest="d_from", type=int, default=3)
    q.add_argument("--to", dest="d_to", type=int, default=14)
    q.add_argument("--json", action="store_true")
    q.set_defaults(func=cmd_structure_check)
    return p


def run(argv: Sequence[str] | None = None, out: TextIO | None = None,
        err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except UsageError as e:
        print(f"usage error: {e}", file=err)
        return USAGE
    except SystemExit as e:          # --help / --version
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    random.seed(a.seed)
    np.random.seed(a.seed)
    try:
        return a.func(a, out)
    except UsageError as e:
        print(f"usage error: {e}", file=err)
        return USAGE
    except cs.NoSolutionFound as e:
        print(f"no certificate: {e}", file=err)
        return NO_SOLUTION


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
