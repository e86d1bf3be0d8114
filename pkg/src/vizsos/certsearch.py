"""Certificate search, exact verification and brute-force checking.

A certificate for size ``d`` is a rational PSD matrix ``F`` (m = ceil(d/2))
solving the F-system.  Its square-root rows give polynomials
``s_w = sum_i c_{w,i} rho^i`` anchored at any vertex; together with the unit
squares ``x_v^2`` for vertices off the anchor's cross they sum to the Vizing
polynomial modulo the ideal.
"""

from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources
from math import comb
from typing import Any, Iterator, Mapping, Sequence

import numpy as np

from . import polyalg as pa
from .exactmath import (AffineSolutionSpace, LdlWitness, NeedsPivot, NotPsd, RatMatrix,
                        best_rational_in_interval, default_free_priority, gram_from_radical_rows,
                        ldlt_psd, rat, rat_cholesky_radical, rat_str, rationals_in_interval, rref)
from .rhocalc import (FSystem, UnsupportedD, build_f_system, entry_name, half_degree,
                      parse_entry, residual_target, sos_residual, sos_value_at)
from .sdpsolve import (Constraint, Feasible, SdpProblem, SolverOptions, Status, feasibility,
                       solve)

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
SOFT_MAX_D = 24
EXPERIMENTAL_D = 14


class NoSolutionFound(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Provenance:
    var: str
    value: Fraction
    lo: float | None = None
    hi: float | None = None
    margin: Fraction | None = None
    source: str = "sdp"          # "sdp" | "fixed"

    def to_json(self) -> dict:
        return {"var": self.var, "value": rat_str(self.value),
                "interval": None if self.lo is None else [self.lo, self.hi],
                "margin": None if self.margin is None else rat_str(self.margin),
                "source": self.source}

    @classmethod
    def from_json(cls, o: Mapping) -> "Provenance":
        iv = o.get("interval")
        return cls(o["var"], rat(o["value"]),
                   None if iv is None else float(iv[0]), None if iv is None else float(iv[1]),
                   None if o.get("margin") is None else rat(o["margin"]), o.get("source", "sdp"))


@dataclass(frozen=True)
class Certificate:
    d: int
    F: RatMatrix
    ldl: LdlWitness
    rows: tuple[tuple[Fraction, tuple[Fraction, ...]], ...] | None
    provenance: tuple[Provenance, ...] = ()

    @property
    def m(self) -> int:
        return half_degree(self.d)

    @property
    def anchor_note(self) -> str:
        return (f"valid at every anchor vertex of every product with "
                f"n_g + n_h - 1 = {self.d} and a dominating vertex in each factor")

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "m": self.m,
            "F": [[rat_str(x) for x in r] for r in self.F.tolist()],
            "ldl": {"permutation": list(self.ldl.permutation),
                    "L": [[rat_str(x) for x in r] for r in self.ldl.L.tolist()],
                    "D": [rat_str(x) for x in self.ldl.D]},
            "rows": None if self.rows is None else [
                {"radicand": rat_str(r), "coeffs": [rat_str(c) for c in cs]} for r, cs in self.rows],
            "provenance": [p.to_json() for p in self.provenance],
            "version": FORMAT_VERSION,
        }

    def dumps(self) -> str:
        return dumps_canonical(self.to_json())

    @classmethod
    def from_json(cls, o: Mapping) -> "Certificate":
        if o.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported certificate version {o.get('version')!r}")
        F = RatMatrix.from_rows([[rat(x) for x in r] for r in o["F"]])
        lo = o["ldl"]
        ldl = LdlWitness(tuple(int(i) for i in lo["permutation"]),
                         RatMatrix.from_rows([[rat(x) for x in r] for r in lo["L"]]),
                         tuple(rat(x) for x in lo["D"]))
        rows = None if o.get("rows") is None else tuple(
            (rat(r["radicand"]), tuple(rat(c) for c in r["coeffs"])) for r in o["rows"])
        prov = tuple(Provenance.from_json(p) for p in o.get("provenance", ()))
        return cls(int(o["d"]), F, ldl, rows, prov)

    @classmethod
    def loads(cls, s: str) -> "Certificate":
        return cls.from_json(json.loads(s))

    @classmethod
    def from_matrix(cls, d: int, F: RatMatrix, provenance: Sequence[Provenance] = ()) -> "Certificate":
        w = ldlt_psd(F)
        if isinstance(w, NotPsd):
            raise ValueError(f"matrix is not PSD (v^T F v = {w.value})")
        return cls(d, F, w, _radical_rows(F), tuple(provenance))

    @classmethod
    def from_rows(cls, d: int, rows: Sequence[tuple[Any, Sequence[Any]]],
                  provenance: Sequence[Provenance] = ()) -> "Certificate":
        """Assemble from square-root rows; F is their exact Gram matrix."""
        rows = tuple((rat(r), tuple(rat(c) for c in cs)) for r, cs in rows)
        F = gram_from_radical_rows(rows)
        w = ldlt_psd(F)
        if isinstance(w, NotPsd):
            raise ValueError("Gram matrix of the rows is not PSD")
        return cls(d, F, w, rows, tuple(provenance))


def dumps_canonical(o: Any) -> str:
    return json.dumps(o, sort_keys=True) + "\n"


def _radical_rows(F: RatMatrix):
    try:
        return tuple(rat_cholesky_radical(F))
    except NeedsPivot:
        return None


def load_fixture(name: str) -> Certificate:
    """Load a shipped certificate, e.g. ``cert_d5.json``."""
    text = resources.files("vizsos.fixtures").joinpath(name).read_text()
    return Certificate.loads(text)


FIXTURES = ("cert_d5.json", "cert_d6.json", "cert_d7.json", "cert_d8.json")


# ---------------------------------------------------------------------------
# verdicts
# ---------------------------------------------------------------------------

@dataclass
class Verdict:
    checks: list[tuple[str, bool, str]] = field(default_factory=list)

    def add(self, name: str, ok: bool, detail: str = "") -> None:
        self.checks.append((name, bool(ok), detail))

    @property
    def ok(self) -> bool:
        return bool(self.checks) and all(c[1] for c in self.checks)

    @property
    def failed(self) -> list[str]:
        return [c[0] for c in self.checks if not c[1]]

    def extend(self, other: "Verdict") -> None:
        self.checks.extend(other.checks)

    def to_json(self) -> dict:
        return {"ok": self.ok,
                "checks": [{"name": n, "ok": ok, "detail": d} for n, ok, d in self.checks]}

    def lines(self) -> list[str]:
        return [f"{'PASS' if ok else 'FAIL'}  {n}" + (f"  ({d})" if d else "")
                for n, ok, d in self.checks]


def verify_exact(c: Certificate) -> Verdict:
    """Zero-tolerance checks of the F-system, the LDL witness and the rho identity."""
    v = Verdict()
    m = half_degree(c.d)
    F = c.F
    shape_ok = F.shape == (m, m) and F.is_symmetric()
    v.add("shape", shape_ok, f"{F.rows}x{F.cols}, expected {m}x{m} symmetric")
    if not shape_ok:
        return v
    try:
        S = build_f_system(c.d)
    except UnsupportedD as e:
        v.add("f-system", False, str(e))
        return v
    for eq in S.equations:
        r = eq.residual(F)
        v.add(f"equation k={eq.k}", r == 0, "" if r == 0 else f"residual {rat_str(r)}")
    w = c.ldl
    ldl_ok = (len(w.D) == m and all(x >= 0 for x in w.D) and w.L.shape == (m, m)
              and all(w.L[i, i] == 1 for i in range(m))
              and all(w.L[i, j] == 0 for i in range(m) for j in range(i + 1, m))
              and sorted(w.permutation) == list(range(m)) and w.check(F))
    v.add("ldl witness", ldl_ok, "P^T F P = L D L^T, D >= 0")
    res = sos_residual(F, c.d)
    tgt = residual_target(F[0, 0], c.d)
    v.add("rho identity", res == tgt,
          "" if res == tgt else f"got {[rat_str(x) for x in res.coeffs]}")
    if c.rows is not None:
        rows_ok = (len(c.rows) == m and all(r >= 0 and len(cs) == m for r, cs in c.rows))
        if rows_ok:
            rows_ok = gram_from_radical_rows(c.rows, m) == F
        v.add("radical rows", rows_ok, "sum radicand * row row^T == F")
        tri = all(cs[i] == 0 for k, (_, cs) in enumerate(c.rows) for i in range(min(k, len(cs))))
        v.add("rows triangular", tri)
    return v


# ---------------------------------------------------------------------------
# brute force over the variety
# ---------------------------------------------------------------------------

def _supports(params: pa.ClassParams, full: bool, cap: int) -> Iterator[frozenset]:
    if full:
        for pt in pa.enumerate_variety(params, cap):
            yield pt.support
    else:
        yield from pa.variety_supports(params, cap)


def default_anchors(params: pa.ClassParams) -> list[pa.Vertex]:
    out = [pa.Vertex(params.n_g, params.n_h)]
    if out[0] != pa.Vertex(1, 1):
        out.append(pa.Vertex(1, 1))
    return out


def verify_bruteforce(c: Certificate, n_g: int, n_h: int,
                      anchors: Sequence[pa.Vertex] | None = None,
                      cap: int = pa.DEFAULT_CAP, full: bool = False) -> Verdict:
    """Compare the SOS value with sum(x) - 1 at every point of the variety.

    With ``full=False`` only the distinct x-parts are visited; the SOS value
    does not involve edge variables, so nothing is lost.
    """
    v = Verdict()
    params = pa.ClassParams(n_g, n_h)
    if params.d != c.d:
        v.add(f"split ({n_g},{n_h})", False, f"n_g + n_h - 1 = {params.d} != d = {c.d}")
        return v
    anchors = list(anchors) if anchors else default_anchors(params)
    table = [sos_value_at(c.F, t) for t in range(c.d + 1)]
    for anchor in anchors:
        T = set(params.cross(anchor.g, anchor.h))
        count = bad = negative = 0
        for D in _supports(params, full, cap):
            t = len(D & T)
            sos = table[t] + len(D - T)
            f = len(D) - 1
            count += 1
            bad += sos != f
            negative += f < 0
        tag = f"({n_g},{n_h}) anchor x_{anchor.g}{anchor.h}"
        v.add(f"brute {tag}", bad == 0 and count > 0, f"{count} points, {bad} mismatches")
        v.add(f"vizing {tag}", negative == 0, "sum(x) - 1 >= 0 at every point")
        allin = table[len(T)] + (n_g * n_h - len(T))
        v.add(f"all-ones {tag}", allin == n_g * n_h - 1, f"value {rat_str(allin)}")
    return v


def splits(d: int, cap: int = pa.DEFAULT_CAP) -> list[tuple[int, int]]:
    """All (n_g, n_h) with n_g + n_h - 1 = d and n_g * n_h <= cap."""
    return [(a, d + 1 - a) for a in range(1, d + 1) if a * (d + 1 - a) <= cap]


# ---------------------------------------------------------------------------
# search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SearchOptions:
    margin: Fraction = Fraction(1, 20)
    fixed: Mapping[str, Fraction] = field(default_factory=dict)
    max_backtracks: int = 8
    order: str = "diagonal-first"
    solver: SolverOptions = field(default_factory=SolverOptions)
    # wider margins to retry with, in order, when the whole search fails
    retry_margins: tuple[Fraction, ...] = (Fraction(1, 10), Fraction(1, 5), Fraction(1, 3))

    def __post_init__(self):
        m = rat(self.margin)
        retry = tuple(rat(x) for x in self.retry_margins)
        if not all(0 <= x < Fraction(1, 2) for x in (m,) + retry):
            raise ValueError("margin must lie in [0, 1/2)")
        object.__setattr__(self, "margin", m)
        object.__setattr__(self, "retry_margins", retry)
        object.__setattr__(self, "fixed", {entry_name(*parse_entry(k)): rat(v)
                                           for k, v in dict(self.fixed).items()})
        if self.order not in ("diagonal-first", "lexicographic"):
            raise ValueError(f"unknown order policy {self.order!r}")


def free_priority(variables: Sequence[str], order: str) -> list[str]:
    if order == "diagonal-first":
        return default_free_priority(variables)
    return sorted(variables, key=parse_entry)


def _entry_matrix(m: int, coeffs: Mapping[str, Any]) -> np.ndarray:
    A = np.zeros((m, m))
    for name, c in coeffs.items():
        i, j = parse_entry(name)
        if i == j:
            A[i - 1, i - 1] += float(c)
        else:
            A[i - 1, j - 1] += float(c) / 2
            A[j - 1, i - 1] += float(c) / 2
    return A


def f_sdp(m: int, equations: Sequence[tuple[Mapping[str, Any], Any]],
          objective: Mapping[str, Any] | None = None,
          trace_bound: float | None = None) -> SdpProblem:
    """SDP over the m x m matrix F subject to linear equations in its entries."""
    cons = [Constraint(_entry_matrix(m, co), float(rhs)) for co, rhs in equations if co]
    C = _entry_matrix(m, objective or {})
    return SdpProblem(m, C, cons, trace_bound)


# bounds only steer the rounding; the exact layer decides.  Stalled solves
# within LOOSE_BOUND_TOL are still usable (thin feasible sets at larger d).
BOUND_TOL = 1e-6
LOOSE_BOUND_TOL = 1e-3


def _interval(m: int, eqs, var: str, opts: SolverOptions) -> tuple[float, float] | None:
    lo = solve(f_sdp(m, eqs, {var: 1}), "min", opts)
    hi = solve(f_sdp(m, eqs, {var: 1}), "max", opts)
    if not (lo.near_optimal(BOUND_TOL) and hi.near_optimal(BOUND_TOL)):
        if lo.near_optimal(LOOSE_BOUND_TOL) and hi.near_optimal(LOOSE_BOUND_TOL):
            log.info("bounding %s: accepted at loose tolerance", var)
        else:
            log.info("bounding %s: min %s, max %s", var, lo.status.value, hi.status.value)
            return None
    a, b = lo.primal_obj, hi.primal_obj
    if b < a:
        a = b = (a + b) / 2
    return a, b


def _candidates(lo: float, hi: float, margin: Fraction) -> Iterator[Fraction]:
    if hi - lo > 1e-6:
        yield from rationals_in_interval(lo, hi, margin)
        return
    # numerically a point: look for simple rationals just around it
    pad = 1e-7 * max(1.0, abs(lo))
    yield from rationals_in_interval(lo - pad, hi + pad, 0)


def find_certificate(d: int, opts: SearchOptions | None = None) -> Certificate:
    """Fix free entries one at a time by min/max SDPs and rounding, then certify.

    Backtracking re-rounds the most recent SDP-chosen entry with the next
    candidate (increasing denominators) when a later step fails.  If the
    search still fails it is repeated with each of ``opts.retry_margins``.
    """
    opts = opts or SearchOptions()
    margins = [opts.margin] + [x for x in opts.retry_margins if x != opts.margin]
    for k, mg in enumerate(margins):
        try:
            return _search(d, replace(opts, margin=mg))
        except NoSolutionFound:
            if k + 1 == len(margins):
                raise
            log.info("d=%d: retrying with margin %s", d, rat_str(margins[k + 1]))
    raise AssertionError("unreachable")


def _search(d: int, opts: SearchOptions) -> Certificate:
    if d < 3:
        raise UnsupportedD("certificates are built for d >= 3")
    if d > SOFT_MAX_D:
        raise UnsupportedD(f"d > {SOFT_MAX_D} is beyond the supported range")
    if d > EXPERIMENTAL_D:
        log.warning("d = %d is experimental", d)
    S = build_f_system(d)
    m = S.m
    unknown = set(opts.fixed) - set(S.variables)
    if unknown:
        raise ValueError(f"no such matrix entries for d={d}: {sorted(unknown)}")
    space = rref(S.linear_system(), free_priority(S.variables, opts.order), S.variables)
    base = space.equations()

    # user fixes of dependent entries become extra equations up front
    pre = [({k: 1}, v) for k, v in opts.fixed.items() if k not in space.free_vars]
    order = list(space.free_vars)
    budget = [opts.max_backtracks]

    def fix_eq(var, val):
        return ({var: Fraction(1)}, val)

    # stack entries: (var, candidate iterator or None, chosen value, provenance)
    def descend(k: int, eqs: list, prov: list) -> tuple[dict, list] | None:
        if k == len(order):
            sol = rref(eqs, variables=S.variables)
            if sol.free_vars:
                return None
            vals = {v: sol.value(v) for v in S.variables}
            F = _matrix_from(vals, m)
            w = ldlt_psd(F)
            if isinstance(w, NotPsd):
                log.info("rounded matrix is not PSD (v^T F v = %s)", w.value)
                return None
            return vals, prov
        var = order[k]
        if var in opts.fixed:
            val = opts.fixed[var]
            try:
                rref(eqs + [fix_eq(var, val)], variables=S.variables)
            except ValueError:
                return None
            return descend(k + 1, eqs + [fix_eq(var, val)],
                           prov + [Provenance(var, val, source="fixed")])
        iv = _interval(m, eqs, var, opts.solver)
        if iv is None:
            return None
        lo, hi = iv
        tried = 0
        for val in _candidates(lo, hi, opts.margin):
            if tried:
                if budget[0] <= 0:
                    return None
                budget[0] -= 1
                log.info("backtrack: %s -> %s", var, rat_str(val))
            tried += 1
            got = descend(k + 1, eqs + [fix_eq(var, val)],
                          prov + [Provenance(var, val, lo, hi, opts.margin)])
            if got is not None:
                return got
            if budget[0] <= 0:
                return None
        return None

    try:
        rref(base + pre, variables=S.variables)
    except ValueError:
        raise NoSolutionFound("the fixed values contradict the F-system")
    got = descend(0, base + pre, [Provenance(k, v, source="fixed") for k, v in opts.fixed.items()
                                  if k not in space.free_vars])
    if got is None:
        raise NoSolutionFound(f"no rational PSD solution found for d={d}")
    vals, prov = got
    F = _matrix_from(vals, m)
    return Certificate.from_matrix(d, F, prov)


def _matrix_from(vals: Mapping[str, Fraction], m: int) -> RatMatrix:
    return RatMatrix.from_rows([[vals[entry_name(i, j)] for j in range(1, m + 1)]
                                for i in range(1, m + 1)])


# ---------------------------------------------------------------------------
# the generic SOS pipeline on the full polynomial ring
# ---------------------------------------------------------------------------

def standard_monomials(params: pa.ClassParams, ell: int,
                       gb: Sequence[pa.Polynomial] | None = None) -> list[pa.Mono]:
    """Monomials of degree <= ell that are not divisible by any leading term."""
    gb = gb if gb is not None else pa.closed_form_gb(params)
    leads = [g.lm for g in gb]
    nv = len(gb[0].order.priority)
    out = []
    for deg in range(ell + 1):
        for combo in itertools.combinations_with_replacement(range(nv), deg):
            e = [0] * nv
            for i in combo:
                e[i] += 1
            mono = tuple(e)
            if not any(all(a <= b for a, b in zip(l, mono)) for l in leads):
                out.append(mono)
    return out


@dataclass
class PipelineSdp:
    problem: SdpProblem
    monomials: list[str]
    constraint_monomials: list[str]


PIPELINE_MAX_VERTICES = 6
PIPELINE_MAX_ELL = 3


def full_sdp_pipeline(n_g: int, n_h: int, ell: int, trace_bound: float = 1e3) -> SdpProblem:
    return pipeline_sdp(n_g, n_h, ell, trace_bound).problem


def pipeline_sdp(n_g: int, n_h: int, ell: int, trace_bound: float = 1e3) -> PipelineSdp:
    """Gram-matrix SDP for an ell-SOS certificate of sum(x) - 1 modulo the ideal."""
    if n_g + n_h > PIPELINE_MAX_VERTICES or ell > PIPELINE_MAX_ELL or ell < 0:
        raise pa.CapExceeded("desk-scale limits: n_g + n_h <= 6 and ell <= 3")
    params = pa.ClassParams(n_g, n_h)
    gb = pa.closed_form_gb(params)
    R = gb[0].order
    reduce = pa.Reducer(gb)
    v = standard_monomials(params, ell, gb)
    N = len(v)
    if N > 64:
        raise pa.CapExceeded(f"{N} monomials exceed the dense solver limit")
    coeff: dict[pa.Mono, np.ndarray] = {}
    for a in range(N):
        for b in range(a, N):
            prod = pa.Polynomial._raw(R, {tuple(x + y for x, y in zip(v[a], v[b])): Fraction(1)})
            for mono, c in reduce(prod).terms.items():
                A = coeff.setdefault(mono, np.zeros((N, N)))
                A[a, b] += float(c)
                if a != b:
                    A[b, a] += float(c)
    target = reduce(pa.build_fviz(params, R)).terms
    monos = sorted(set(coeff) | set(target), key=pa.TermOrder.key, reverse=True)
    cons = [Constraint(coeff.get(mu, np.zeros((N, N))), float(target.get(mu, 0))) for mu in monos]
    probe = pa.Polynomial(R, {})
    names = [probe.mono_str(mu) or "1" for mu in v]
    cnames = [probe.mono_str(mu) or "1" for mu in monos]
    prob = SdpProblem(N, np.eye(N), cons, trace_bound)
    return PipelineSdp(prob, names, cnames)


# ---------------------------------------------------------------------------
# structural identities
# ---------------------------------------------------------------------------

@dataclass
class StructureRow:
    d: int
    check: str
    ok: bool
    tier: str      # "exact" | "numerical evidence"
    detail: str = ""


def check_structure_identities(d_from: int, d_to: int,
                               solver: SolverOptions | None = None,
                               trace_bound: float = 1e3) -> list[StructureRow]:
    if d_from < 3 or d_to > 14 or d_from > d_to:
        raise ValueError("range must lie within [3, 14]")
    out: list[StructureRow] = []
    for d in range(d_from, d_to + 1):
        S = build_f_system(d)
        m = S.m
        space = rref(S.linear_system(), variables=S.variables)
        if d % 2 == 0:
            ok = space.is_fixed("F_1_1") and space.value("F_1_1") == d - 1
            out.append(StructureRow(d, "F_1_1 = d - 1", ok, "exact",
                                    rat_str(space.value("F_1_1")) if space.is_fixed("F_1_1") else "free"))
            fmm = Fraction(d, comb(d, d // 2))
            name_mm, name_off = entry_name(m, m), entry_name(m - 1, m)
            ok = space.is_fixed(name_mm) and space.value(name_mm) == fmm
            out.append(StructureRow(d, f"{name_mm} = d / C(d, d/2)", ok, "exact", rat_str(fmm)))
            want = -fmm * (1 + Fraction(d, 4))
            ok = space.is_fixed(name_off) and space.value(name_off) == want
            out.append(StructureRow(d, f"{name_off} = -{name_mm} (1 + d/4)", ok, "exact",
                                    rat_str(want)))
        else:
            out.append(StructureRow(d, "F_1_1 free", "F_1_1" in space.free_vars, "exact"))
            eqs = space.equations() + [({"F_1_1": Fraction(1)}, Fraction(d - 1))]
            res = feasibility(f_sdp(m, eqs, trace_bound=trace_bound), solver)
            out.append(StructureRow(d, "F_1_1 = d - 1 admits no PSD solution",
                                    not isinstance(res, Feasible), "numerical evidence",
                                    f"infeasibility measure {res.measure:.3g}"))
    return out
