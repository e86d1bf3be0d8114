"""Multivariate polynomials over Q for the domination ideal of G x H.

Variables are the vertex indicators ``x_gh`` of the product graph and the
edge indicators ``e_g{a}{b}``, ``e_h{a}{b}`` of the two factor graphs.  The
dominators are fixed to ``g1 = 1`` and ``h1 = 1``.

Monomials are exponent tuples indexed by the ring's variable order; the term
order is degree-then-lexicographic with that order as variable priority.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Any, Iterable, Iterator, Mapping, Sequence, Union

from .exactmath import rat, rat_str

Mono = tuple[int, ...]


@dataclass(frozen=True, order=True)
class Vertex:
    g: int
    h: int

    @property
    def name(self) -> str:
        return f"x_{self.g}{self.h}"


@dataclass(frozen=True, order=True)
class EdgeG:
    a: int
    b: int

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError("edge indices must satisfy a < b")

    @property
    def name(self) -> str:
        return f"e_g{self.a}{self.b}"


@dataclass(frozen=True, order=True)
class EdgeH:
    a: int
    b: int

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError("edge indices must satisfy a < b")

    @property
    def name(self) -> str:
        return f"e_h{self.a}{self.b}"


VarId = Union[Vertex, EdgeG, EdgeH]


def edge_g(a: int, b: int) -> EdgeG:
    return EdgeG(min(a, b), max(a, b))


def edge_h(a: int, b: int) -> EdgeH:
    return EdgeH(min(a, b), max(a, b))


@dataclass(frozen=True)
class ClassParams:
    """Graph classes with ``n_g``/``n_h`` vertices and dominators g1 = h1 = 1."""

    n_g: int
    n_h: int

    def __post_init__(self):
        if self.n_g < 1 or self.n_h < 1:
            raise ValueError("n_g and n_h must be >= 1")

    g1 = 1
    h1 = 1

    @property
    def d(self) -> int:
        return self.n_g + self.n_h - 1

    @property
    def vertices(self) -> list[Vertex]:
        return [Vertex(g, h) for g in range(1, self.n_g + 1) for h in range(1, self.n_h + 1)]

    @property
    def g_edges(self) -> list[EdgeG]:
        return [EdgeG(a, b) for a, b in itertools.combinations(range(1, self.n_g + 1), 2)]

    @property
    def h_edges(self) -> list[EdgeH]:
        return [EdgeH(a, b) for a, b in itertools.combinations(range(1, self.n_h + 1), 2)]

    def cross(self, g: int, h: int) -> list[Vertex]:
        """Vertices sharing a coordinate with (g, h), including itself."""
        return [v for v in self.vertices if v.g == g or v.h == h]


# ---------------------------------------------------------------------------
# term order / ring
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TermOrder:
    """Total-degree lexicographic order; ``priority[0]`` is the largest variable."""

    priority: tuple[VarId, ...]
    kind: str = "deglex"

    @classmethod
    def default(cls, params: ClassParams) -> "TermOrder":
        return cls(tuple(params.vertices) + tuple(params.g_edges) + tuple(params.h_edges))

    @cached_property
    def index(self) -> dict[VarId, int]:
        return {v: i for i, v in enumerate(self.priority)}

    @property
    def nvars(self) -> int:
        return len(self.priority)

    @staticmethod
    def key(m: Mono) -> tuple[int, Mono]:
        return (sum(m), m)


class Polynomial:
    """Immutable polynomial: mapping exponent-tuple -> nonzero Fraction."""

    __slots__ = ("order", "terms")

    def __init__(self, order: TermOrder, terms: Mapping[Mono, Any] | None = None):
        self.order = order
        t = {}
        for m, c in (terms or {}).items():
            c = rat(c)
            if c:
                t[m] = c
        self.terms: dict[Mono, Fraction] = t

    @classmethod
    def _raw(cls, order: TermOrder, terms: dict[Mono, Fraction]) -> "Polynomial":
        p = cls.__new__(cls)
        p.order = order
        p.terms = terms
        return p

    # constructors
    @classmethod
    def const(cls, order: TermOrder, c: Any) -> "Polynomial":
        return cls(order, {(0,) * order.nvars: c})

    @classmethod
    def var(cls, order: TermOrder, v: VarId) -> "Polynomial":
        e = [0] * order.nvars
        e[order.index[v]] = 1
        return cls(order, {tuple(e): 1})

    # arithmetic
    def _coerce(self, other: Any) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.order != self.order:
                raise ValueError("polynomials live in different rings")
            return other
        return Polynomial.const(self.order, other)

    def __add__(self, other: Any) -> "Polynomial":
        other = self._coerce(other)
        t = dict(self.terms)
        for m, c in other.terms.items():
            s = t.get(m, 0) + c
            if s:
                t[m] = s
            else:
                t.pop(m, None)
        return Polynomial._raw(self.order, t)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw(self.order, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: Any) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Any) -> "Polynomial":
        return self._coerce(other) - self

    def __mul__(self, other: Any) -> "Polynomial":
        if not isinstance(other, Polynomial):
            c = rat(other)
            if not c:
                return Polynomial._raw(self.order, {})
            return Polynomial._raw(self.order, {m: c * a for m, a in self.terms.items()})
        other = self._coerce(other)
        t: dict[Mono, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                s = t.get(m, 0) + c1 * c2
                if s:
                    t[m] = s
                else:
                    t.pop(m, None)
        return Polynomial._raw(self.order, t)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        out = Polynomial.const(self.order, 1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Polynomial):
            return self.order == other.order and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == Polynomial.const(self.order, other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    # order-dependent accessors
    def sorted_terms(self) -> list[tuple[Mono, Fraction]]:
        return sorted(self.terms.items(), key=lambda mc: TermOrder.key(mc[0]), reverse=True)

    @property
    def lm(self) -> Mono:
        return max(self.terms, key=TermOrder.key)

    @property
    def lc(self) -> Fraction:
        return self.terms[self.lm]

    @property
    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=-1)

    def monic(self) -> "Polynomial":
        return self * (1 / self.lc)

    def evaluate(self, point: Mapping[VarId, Any]) -> Fraction:
        vals = [rat(point[v]) if v in point else None for v in self.order.priority]
        total = Fraction(0)
        for m, c in self.terms.items():
            t = c
            for i, e in enumerate(m):
                if e:
                    if vals[i] is None:
                        raise KeyError(f"no value for {self.order.priority[i]}")
                    t *= vals[i] ** e
            total += t
        return total

    def variables(self) -> set[VarId]:
        out = set()
        for m in self.terms:
            out.update(self.order.priority[i] for i, e in enumerate(m) if e)
        return out

    # text / json
    def mono_str(self, m: Mono) -> str:
        parts = []
        for i, e in enumerate(m):
            if e:
                nm = self.order.priority[i].name
                parts.append(nm if e == 1 else f"{nm}^{e}")
        return "*".join(parts)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        out = []
        for k, (m, c) in enumerate(self.sorted_terms()):
            ms = self.mono_str(m)
            neg = c < 0
            a = -c if neg else c
            if ms:
                body = ms if a == 1 else f"{rat_str(a)}*{ms}"
            else:
                body = rat_str(a)
            if k == 0:
                out.append(("-" if neg else "") + body)
            else:
                out.append((" - " if neg else " + ") + body)
        return "".join(out)

    __repr__ = __str__

    def to_json(self) -> list:
        """``[[coeff, [[var, exp], ...]], ...]`` in decreasing term order."""
        return [[rat_str(c), [[self.order.priority[i].name, e] for i, e in enumerate(m) if e]]
                for m, c in self.sorted_terms()]


def ring(params: ClassParams) -> TermOrder:
    return TermOrder.default(params)


# ---------------------------------------------------------------------------
# ideal generators
# ---------------------------------------------------------------------------

def build_generators(params: ClassParams, order: TermOrder | None = None) -> list[Polynomial]:
    """Generators of the graph ideals of both factors and of the product."""
    R = order or ring(params)
    X = lambda g, h: Polynomial.var(R, Vertex(g, h))
    EG = lambda a, b: Polynomial.var(R, edge_g(a, b))
    EH = lambda a, b: Polynomial.var(R, edge_h(a, b))
    gens: list[Polynomial] = []
    for e in params.g_edges:
        v = Polynomial.var(R, e)
        gens.append(v * (v - 1))
    for g in range(2, params.n_g + 1):
        gens.append(1 - EG(1, g))
    for e in params.h_edges:
        v = Polynomial.var(R, e)
        gens.append(v * (v - 1))
    for h in range(2, params.n_h + 1):
        gens.append(1 - EH(1, h))
    for v in params.vertices:
        x = X(v.g, v.h)
        gens.append(x * (x - 1))
    for v in params.vertices:
        gens.append(domination_generator(params, v.g, v.h, R))
    return gens


def domination_generator(params: ClassParams, g: int, h: int,
                         order: TermOrder | None = None) -> Polynomial:
    """``(1 - x_gh) prod (1 - e_gg' x_g'h) prod (1 - e_hh' x_gh')``."""
    R = order or ring(params)
    p = 1 - Polynomial.var(R, Vertex(g, h))
    for g2 in range(1, params.n_g + 1):
        if g2 != g:
            p = p * (1 - Polynomial.var(R, edge_g(g, g2)) * Polynomial.var(R, Vertex(g2, h)))
    for h2 in range(1, params.n_h + 1):
        if h2 != h:
            p = p * (1 - Polynomial.var(R, edge_h(h, h2)) * Polynomial.var(R, Vertex(g, h2)))
    return p


def build_fviz(params: ClassParams, order: TermOrder | None = None) -> Polynomial:
    R = order or ring(params)
    p = Polynomial.const(R, -1)
    for v in params.vertices:
        p = p + Polynomial.var(R, v)
    return p


# ---------------------------------------------------------------------------
# closed-form reduced Groebner basis
# ---------------------------------------------------------------------------

MAX_GB_SIZE = 16


def u_sets(params: ClassParams, g: int, h: int) -> tuple[list[Vertex], list[Vertex]]:
    """Row part and column part of the cross vertices that are only
    conditionally adjacent to (g, h)."""
    ur = [] if h == params.h1 else [
        Vertex(g, h2) for h2 in range(1, params.n_h + 1) if h2 not in (params.h1, h)]
    uc = [] if g == params.g1 else [
        Vertex(g2, h) for g2 in range(1, params.n_g + 1) if g2 not in (params.g1, g)]
    return ur, uc


def b_element(params: ClassParams, g: int, h: int, M: Iterable[Vertex],
              order: TermOrder | None = None) -> Polynomial:
    """Degree-d basis element for vertex (g, h) and subset ``M`` of its U-set."""
    R = order or ring(params)
    M = set(M)
    ur, uc = u_sets(params, g, h)
    U = set(ur) | set(uc)
    if not M <= U:
        raise ValueError("M must be a subset of the U-set")
    p = Polynomial.const(R, 1)
    for v in params.cross(g, h):
        if v not in U:
            p = p * (Polynomial.var(R, v) - 1)
    for v in ur:
        e = Polynomial.var(R, edge_h(h, v.h))
        x = Polynomial.var(R, v)
        p = p * (x - 1 if v in M else e - 1)
    for v in uc:
        e = Polynomial.var(R, edge_g(g, v.g))
        x = Polynomial.var(R, v)
        p = p * (x - 1 if v in M else e - 1)
    return p


def closed_form_gb(params: ClassParams, order: TermOrder | None = None) -> list[Polynomial]:
    """Reduced Groebner basis of the Vizing ideal, written down directly."""
    if params.n_g + params.n_h > MAX_GB_SIZE:
        raise ValueError(f"refusing full basis for n_g + n_h > {MAX_GB_SIZE}")
    R = order or ring(params)
    out: list[Polynomial] = []
    for g in range(2, params.n_g + 1):
        out.append(Polynomial.var(R, edge_g(1, g)) - 1)
    for h in range(2, params.n_h + 1):
        out.append(Polynomial.var(R, edge_h(1, h)) - 1)
    for e in params.g_edges:
        if e.a != params.g1:
            v = Polynomial.var(R, e)
            out.append(v * (v - 1))
    for e in params.h_edges:
        if e.a != params.h1:
            v = Polynomial.var(R, e)
            out.append(v * (v - 1))
    for v in params.vertices:
        x = Polynomial.var(R, v)
        out.append(x * (x - 1))
    for v in params.vertices:
        ur, uc = u_sets(params, v.g, v.h)
        U = ur + uc
        for mask in range(1 << len(U)):
            M = [U[k] for k in range(len(U)) if mask >> k & 1]
            out.append(b_element(params, v.g, v.h, M, R))
    if params.n_g == 1 or params.n_h == 1:
        # crosses coincide when a factor is a single vertex: the list then has
        # repeats and reducible members, so inter-reduce it
        return reduce_basis(out)
    return out


# ---------------------------------------------------------------------------
# reduction and Buchberger
# ---------------------------------------------------------------------------

def _divides(a: Mono, b: Mono) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _lcm(a: Mono, b: Mono) -> Mono:
    return tuple(max(x, y) for x, y in zip(a, b))


def _sub(a: Mono, b: Mono) -> Mono:
    return tuple(x - y for x, y in zip(a, b))


def _add(a: Mono, b: Mono) -> Mono:
    return tuple(x + y for x, y in zip(a, b))


def _reduce_terms(terms: dict[Mono, Fraction],
                  basis: Sequence[tuple[Mono, Fraction, dict[Mono, Fraction]]]) -> dict[Mono, Fraction]:
    """Full reduction of ``terms`` by (lm, lc, terms) triples."""
    p = dict(terms)
    rem: dict[Mono, Fraction] = {}
    key = TermOrder.key
    while p:
        m = max(p, key=key)
        c = p[m]
        for blm, blc, bt in basis:
            if _divides(blm, m):
                q = _sub(m, blm)
                f = c / blc
                for bm, bc in bt.items():
                    mm = _add(bm, q)
                    s = p.get(mm, 0) - f * bc
                    if s:
                        p[mm] = s
                    else:
                        p.pop(mm, None)
                break
        else:
            rem[m] = c
            del p[m]
    return rem


def _prepare(basis: Sequence[Polynomial]):
    out = []
    for b in basis:
        if b.is_zero():
            raise ValueError("basis elements must be nonzero")
        out.append((b.lm, b.lc, b.terms))
    return out


def normal_form(p: Polynomial, basis: Sequence[Polynomial],
                order: TermOrder | None = None) -> Polynomial:
    """Remainder of full multivariate division; canonical for a Groebner basis.

    Ties between divisors go to the earliest basis element.
    """
    if order is not None and order != p.order:
        p = reembed(p, order)
        basis = [reembed(b, order) for b in basis]
    return Polynomial._raw(p.order, _reduce_terms(p.terms, _prepare(basis)))


class Reducer:
    """Reusable normal-form operator for a fixed basis."""

    def __init__(self, basis: Sequence[Polynomial]):
        self.basis = list(basis)
        self._prep = _prepare(self.basis)

    def __call__(self, p: Polynomial) -> Polynomial:
        return Polynomial._raw(p.order, _reduce_terms(p.terms, self._prep))


def reembed(p: Polynomial, order: TermOrder) -> Polynomial:
    """Same polynomial expressed in another variable order."""
    if p.order == order:
        return p
    perm = [p.order.index[v] for v in order.priority]
    if len(perm) != p.order.nvars:
        raise ValueError("orders do not share a variable set")
    return Polynomial(order, {tuple(m[i] for i in perm): c for m, c in p.terms.items()})


def s_polynomial(f: Polynomial, g: Polynomial) -> Polynomial:
    L = _lcm(f.lm, g.lm)
    a = Polynomial._raw(f.order, {_add(m, _sub(L, f.lm)): c / f.lc for m, c in f.terms.items()})
    b = Polynomial._raw(g.order, {_add(m, _sub(L, g.lm)): c / g.lc for m, c in g.terms.items()})
    return a - b


def buchberger(gens: Sequence[Polynomial], order: TermOrder | None = None) -> list[Polynomial]:
    """Reduced Groebner basis (product and chain criteria, normal selection)."""
    G = [g for g in gens if not g.is_zero()]
    if order is not None:
        G = [reembed(g, order) for g in G]
    if not G:
        return []
    R = G[0].order
    G = [g.monic() for g in G]
    pairs = {(i, j) for j in range(len(G)) for i in range(j)}
    key = TermOrder.key

    def lcm_key(ij):
        return key(_lcm(G[ij[0]].lm, G[ij[1]].lm)), ij

    while pairs:
        i, j = min(pairs, key=lcm_key)
        pairs.discard((i, j))
        fi, fj = G[i], G[j]
        L = _lcm(fi.lm, fj.lm)
        if L == _add(fi.lm, fj.lm):
            continue
        if any(k not in (i, j) and _divides(G[k].lm, L)
               and (min(i, k), max(i, k)) not in pairs
               and (min(j, k), max(j, k)) not in pairs
               for k in range(len(G))):
            continue
        r = normal_form(s_polynomial(fi, fj), G)
        if r.is_zero():
            continue
        G.append(r.monic())
        n = len(G) - 1
        pairs.update((k, n) for k in range(n))
    return reduce_basis(G)


def reduce_basis(G: Sequence[Polynomial]) -> list[Polynomial]:
    """Minimalize, inter-reduce and normalize a Groebner basis."""
    G = [g.monic() for g in G if not g.is_zero()]
    G.sort(key=lambda g: TermOrder.key(g.lm))
    minimal: list[Polynomial] = []
    for g in G:
        if not any(_divides(h.lm, g.lm) for h in minimal):
            minimal = [h for h in minimal if not _divides(g.lm, h.lm)]
            minimal.append(g)
    out = []
    for k, g in enumerate(minimal):
        others = minimal[:k] + minimal[k + 1:]
        lead = {g.lm: g.lc}
        tail = {m: c for m, c in g.terms.items() if m != g.lm}
        red = _reduce_terms(tail, _prepare(others)) if others else tail
        lead.update(red)
        out.append(Polynomial(g.order, lead).monic())
    return out


def is_reduced_basis(G: Sequence[Polynomial]) -> bool:
    for k, g in enumerate(G):
        if g.lc != 1:
            return False
        for m in g.terms:
            if any(_divides(h.lm, m) for j, h in enumerate(G) if j != k):
                return False
    return True


def same_basis(A: Sequence[Polynomial], B: Sequence[Polynomial]) -> bool:
    """Equality as sets of monic polynomials."""
    return {a.monic() for a in A} == {b.monic() for b in B} and len(A) == len(B)


# ---------------------------------------------------------------------------
# variety
# ---------------------------------------------------------------------------

class CapExceeded(ValueError):
    pass


DEFAULT_CAP = 12


@dataclass(frozen=True)
class VarietyPoint:
    assignment: Mapping[VarId, int]

    @property
    def support(self) -> frozenset[Vertex]:
        return frozenset(v for v, val in self.assignment.items()
                         if isinstance(v, Vertex) and val)


def dominates(params: ClassParams, D: set[Vertex] | frozenset[Vertex],
              g_adj: Mapping[EdgeG, int], h_adj: Mapping[EdgeH, int]) -> bool:
    """Does ``D`` dominate the product of the graphs given by edge indicators?"""
    for v in params.vertices:
        if v in D:
            continue
        if any(Vertex(g2, v.h) in D and g_adj[edge_g(v.g, g2)]
               for g2 in range(1, params.n_g + 1) if g2 != v.g):
            continue
        if any(Vertex(v.g, h2) in D and h_adj[edge_h(v.h, h2)]
               for h2 in range(1, params.n_h + 1) if h2 != v.h):
            continue
        return False
    return True


def _check_cap(params: ClassParams, cap: int) -> None:
    if params.n_g * params.n_h > cap:
        raise CapExceeded(f"n_g * n_h = {params.n_g * params.n_h} exceeds cap {cap}")


def enumerate_variety(params: ClassParams, cap: int = DEFAULT_CAP,
                      start: int = 0) -> Iterator[VarietyPoint]:
    """Every (G, H, D) point, in a fixed order; ``start`` skips that many."""
    _check_cap(params, cap)
    V = params.vertices
    free_g = [e for e in params.g_edges if e.a != params.g1]
    free_h = [e for e in params.h_edges if e.a != params.h1]
    gen = _variety_points(params, V, free_g, free_h)
    return itertools.islice(gen, start, None)


def _variety_points(params, V, free_g, free_h):
    for gbits in range(1 << len(free_g)):
        g_adj = {e: 1 for e in params.g_edges}
        for k, e in enumerate(free_g):
            g_adj[e] = gbits >> k & 1
        for hbits in range(1 << len(free_h)):
            h_adj = {e: 1 for e in params.h_edges}
            for k, e in enumerate(free_h):
                h_adj[e] = hbits >> k & 1
            for xbits in range(1 << len(V)):
                D = {V[k] for k in range(len(V)) if xbits >> k & 1}
                if dominates(params, D, g_adj, h_adj):
                    a: dict[VarId, int] = {v: int(v in D) for v in V}
                    a.update(g_adj)
                    a.update(h_adj)
                    yield VarietyPoint(a)


def variety_supports(params: ClassParams, cap: int = DEFAULT_CAP) -> Iterator[frozenset[Vertex]]:
    """Distinct x-parts of the variety.

    A vertex set dominates some product in the class iff it dominates the
    product of the two complete graphs, so the free edges can be set to 1.
    """
    _check_cap(params, cap)
    V = params.vertices
    g_adj = {e: 1 for e in params.g_edges}
    h_adj = {e: 1 for e in params.h_edges}
    for xbits in range(1 << len(V)):
        D = frozenset(V[k] for k in range(len(V)) if xbits >> k & 1)
        if dominates(params, D, g_adj, h_adj):
            yield D
