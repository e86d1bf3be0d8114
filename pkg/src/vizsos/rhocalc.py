"""Algebra over the basis rho^0..rho^d attached to one anchor vertex.

``rho^i`` is the sum of all squarefree degree-i monomials in the x-variables
of the cross through the anchor; modulo the ideal these span a ring whose
multiplication depends only on ``d``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Mapping, Sequence

from .exactmath import RatMatrix, gram_from_radical_rows, rat, rat_str
from .polyalg import ClassParams, Polynomial, TermOrder, Vertex, ring

PASCAL_MAX = 64


def _pascal(n: int) -> list[list[int]]:
    rows = [[1]]
    for k in range(1, n + 1):
        prev = rows[-1]
        rows.append([1] + [prev[j - 1] + prev[j] for j in range(1, k)] + [1])
    return rows


_PASCAL = _pascal(PASCAL_MAX)


def binom(n: int, k: int) -> int:
    if k < 0 or n < 0 or k > n:
        return 0
    if n <= PASCAL_MAX:
        return _PASCAL[n][k]
    from math import comb
    return comb(n, k)


class DimensionMismatch(ValueError):
    pass


class UnsupportedD(ValueError):
    pass


@dataclass(frozen=True)
class RhoPoly:
    d: int
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.d + 1:
            raise DimensionMismatch("coefficient vector must have length d + 1")
        object.__setattr__(self, "coeffs", tuple(rat(c) for c in self.coeffs))

    @classmethod
    def zero(cls, d: int) -> "RhoPoly":
        return cls(d, (Fraction(0),) * (d + 1))

    @classmethod
    def basis(cls, d: int, i: int, c: Any = 1) -> "RhoPoly":
        v = [Fraction(0)] * (d + 1)
        v[i] = rat(c)
        return cls(d, tuple(v))

    @classmethod
    def of(cls, d: int, coeffs: Sequence[Any]) -> "RhoPoly":
        """Pad ``coeffs`` with zeros up to length d + 1."""
        if len(coeffs) > d + 1:
            raise DimensionMismatch("too many coefficients for this d")
        return cls(d, tuple(coeffs) + (0,) * (d + 1 - len(coeffs)))

    def _check(self, other: "RhoPoly") -> None:
        if self.d != other.d:
            raise DimensionMismatch(f"d mismatch: {self.d} vs {other.d}")

    def __add__(self, other: "RhoPoly") -> "RhoPoly":
        self._check(other)
        return RhoPoly(self.d, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "RhoPoly") -> "RhoPoly":
        self._check(other)
        return RhoPoly(self.d, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def scale(self, c: Any) -> "RhoPoly":
        c = rat(c)
        return RhoPoly(self.d, tuple(c * a for a in self.coeffs))

    def __mul__(self, other: "RhoPoly") -> "RhoPoly":
        return rho_mul(self, other)

    def evaluate(self, t: int) -> Fraction:
        """Value at a 0/1 point with ``t`` active variables in the cross."""
        return sum((c * eval_rho_point(i, t) for i, c in enumerate(self.coeffs)), Fraction(0))

    def to_json(self) -> list[str]:
        return [rat_str(c) for c in self.coeffs]


def rho_product_coeffs(i: int, j: int, d: int) -> dict[int, int]:
    """rho^i * rho^j as {k: coefficient}, reduced modulo the ideal."""
    if i > j:
        i, j = j, i
    out: dict[int, int] = {}
    for r in range(0, min(i, d - j) + 1):
        c = binom(i, r) * binom(j + r, i)
        if c:
            out[j + r] = c
    return out


def rho_mul(a: RhoPoly, b: RhoPoly) -> RhoPoly:
    a._check(b)
    d = a.d
    out = [Fraction(0)] * (d + 1)
    for i, ca in enumerate(a.coeffs):
        if not ca:
            continue
        for j, cb in enumerate(b.coeffs):
            if not cb:
                continue
            for k, c in rho_product_coeffs(i, j, d).items():
                out[k] += ca * cb * c
    return RhoPoly(d, tuple(out))


def inclusion_exclusion(d: int) -> RhoPoly:
    """Expansion of the product of (1 - x) over the cross."""
    if d < 0:
        raise ValueError("d must be >= 0")
    return RhoPoly(d, tuple(Fraction((-1) ** i) for i in range(d + 1)))


def eval_rho_point(i: int, t: int) -> Fraction:
    return Fraction(binom(t, i))


def float_square_coeffs(rows: Sequence[Sequence[float]], d: int) -> list[float]:
    """Sum of (sum_i r_i rho^i)^2 over ``rows``, in double precision."""
    out = [0.0] * (d + 1)
    for r in rows:
        for i, a in enumerate(r):
            for j, b in enumerate(r):
                if a and b:
                    for k, c in rho_product_coeffs(i, j, d).items():
                        out[k] += a * b * c
    return out


def two_square_residuals(d: int, alpha: float, beta: float, delta: float = 0.0) -> list[float]:
    """Residuals of the low-degree certificate s1 = -a + a rho^1 + b rho^2, s2 = c rho^2.

    Adding the x^2 terms of the other vertices turns s1^2 + s2^2 into
    f_viz + (a^2 + 1)(1 - rho^1 + rho^2 - ...); the entries returned are
    coefficient minus target for rho^2..rho^d, all zero for a valid tuple.
    """
    if d < 2:
        raise UnsupportedD("need d >= 2")
    got = float_square_coeffs([(-alpha, alpha, beta), (0.0, 0.0, delta)], d)
    scale = alpha * alpha + 1
    return [got[k] - scale * (-1) ** k for k in range(2, d + 1)]


def half_degree(d: int) -> int:
    return (d + 1) // 2


def square_row(c: Sequence[Any], d: int) -> RhoPoly:
    """Closed-form expansion of (sum_i c_i rho^i)^2 for i = 0..m."""
    m = half_degree(d)
    if len(c) != m + 1:
        raise DimensionMismatch(f"row must have length m + 1 = {m + 1}")
    c = [rat(x) for x in c]
    out = [Fraction(0)] * (d + 1)
    for k in range(d + 1):
        s = Fraction(0)
        for i in range((k + 1) // 2, min(k, m) + 1):
            s += c[i] * c[i] * binom(i, k - i) * binom(k, i)
        for j in range((k + 2) // 2, min(k, m) + 1):
            for i in range(k - j, j):
                s += 2 * c[i] * c[j] * binom(i, k - j) * binom(k, i)
        out[k] = s
    return RhoPoly(d, tuple(out))


# ---------------------------------------------------------------------------
# F-system
# ---------------------------------------------------------------------------

Entry = tuple[int, int]


def entry_name(i: int, j: int) -> str:
    i, j = min(i, j), max(i, j)
    return f"F_{i}_{j}"


def parse_entry(name: str) -> Entry:
    parts = name.split("_")
    if len(parts) != 3 or parts[0] != "F":
        raise ValueError(f"bad matrix entry name {name!r}")
    i, j = int(parts[1]), int(parts[2])
    if i < 1 or j < 1:
        raise ValueError(f"indices must be >= 1 in {name!r}")
    return (min(i, j), max(i, j))


def _extended_pairs(i: int, j: int) -> list[tuple[int, Entry]]:
    """Express extended entry F_{i,j} (indices from 0) over stored entries."""
    i, j = min(i, j), max(i, j)
    if i == 0 and j == 0:
        return [(1, (1, 1))]
    if i == 0:
        return [(-1, (1, j))]
    return [(1, (i, j))]


def quadratic_form_coeffs(d: int) -> list[dict[Entry, int]]:
    """For each k, the rho^k coefficient of v^T F_ext v as a linear form in F."""
    m = half_degree(d)
    forms: list[dict[Entry, int]] = [dict() for _ in range(d + 1)]
    for i in range(m + 1):
        for j in range(m + 1):
            for k, c in rho_product_coeffs(i, j, d).items():
                for s, e in _extended_pairs(i, j):
                    forms[k][e] = forms[k].get(e, 0) + s * c
    return [{e: c for e, c in f.items() if c} for f in forms]


@dataclass(frozen=True)
class FEquation:
    """``lhs_sign * (F_11 + 1) = sum(coeff * F_ij)``."""

    k: int
    lhs_sign: int
    terms: tuple[tuple[Entry, int], ...]

    def as_linear(self) -> tuple[dict[str, Fraction], Fraction]:
        """Move everything to the left: coeffs . F = rhs."""
        co: dict[str, Fraction] = {}
        for e, c in self.terms:
            co[entry_name(*e)] = co.get(entry_name(*e), Fraction(0)) + c
        co["F_1_1"] = co.get("F_1_1", Fraction(0)) - self.lhs_sign
        return {k: v for k, v in co.items() if v}, Fraction(self.lhs_sign)

    def residual(self, F: RatMatrix) -> Fraction:
        rhs = sum((c * F[e[0] - 1, e[1] - 1] for e, c in self.terms), Fraction(0))
        return rhs - self.lhs_sign * (F[0, 0] + 1)


@dataclass(frozen=True)
class FSystem:
    d: int
    m: int
    equations: tuple[FEquation, ...]

    @property
    def variables(self) -> list[str]:
        return [entry_name(i, j) for i in range(1, self.m + 1) for j in range(i, self.m + 1)]

    def linear_system(self) -> list[tuple[dict[str, Fraction], Fraction]]:
        return [eq.as_linear() for eq in self.equations]

    def residuals(self, F: RatMatrix) -> list[Fraction]:
        return [eq.residual(F) for eq in self.equations]

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "equations": [
                {"k": eq.k, "lhs_sign": eq.lhs_sign,
                 "terms": [{"i": e[0], "j": e[1], "coeff": c} for e, c in eq.terms]}
                for eq in self.equations
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def build_f_system(d: int) -> FSystem:
    """Linear conditions on the symmetric m x m matrix F (m = ceil(d/2)).

    For k = 2..d the rho^k coefficient of the extended quadratic form must
    equal (-1)^k (F_11 + 1); rows k = 0, 1 hold automatically.
    """
    if d < 3:
        raise UnsupportedD("the F-system is defined for d >= 3")
    m = half_degree(d)
    eqs = []
    for k in range(2, d + 1):
        terms: dict[Entry, int] = {}

        def add(i: int, j: int, c: int) -> None:
            for s, e in _extended_pairs(i, j):
                terms[e] = terms.get(e, 0) + s * c

        for i in range((k + 1) // 2, min(k, m) + 1):
            add(i, i, binom(i, k - i) * binom(k, i))
        for j in range((k + 2) // 2, min(k, m) + 1):
            for i in range(k - j, j):
                add(i, j, 2 * binom(i, k - j) * binom(k, i))
        ordered = tuple(sorted((e, c) for e, c in terms.items() if c))
        eqs.append(FEquation(k, (-1) ** k, ordered))
    return FSystem(d, m, tuple(eqs))


def extend_matrix(F: RatMatrix) -> RatMatrix:
    """Add row/column 0 with F_00 = F_11 and F_0j = -F_1j."""
    m = F.rows
    rows = [[Fraction(0)] * (m + 1) for _ in range(m + 1)]
    for i in range(m + 1):
        for j in range(m + 1):
            (s, (a, b)), = _extended_pairs(i, j)
            rows[i][j] = s * F[a - 1, b - 1]
    return RatMatrix.from_rows(rows)


def sos_residual(F: RatMatrix, d: int) -> RhoPoly:
    """Sum of squares encoded by F, expanded in the rho-basis."""
    m = half_degree(d)
    if F.shape != (m, m):
        raise DimensionMismatch(f"F must be {m}x{m} for d = {d}")
    if not F.is_symmetric():
        raise DimensionMismatch("F must be symmetric")
    E = extend_matrix(F)
    out = RhoPoly.zero(d)
    for i in range(m + 1):
        for j in range(m + 1):
            if E[i, j]:
                out = out + rho_mul(RhoPoly.basis(d, i), RhoPoly.basis(d, j)).scale(E[i, j])
    return out


def residual_target(F11: Any, d: int) -> RhoPoly:
    """What the F-form must expand to for a valid certificate."""
    shift = RhoPoly.of(d, [-1, 1])
    return inclusion_exclusion(d).scale(rat(F11) + 1) + shift


def sos_value_at(F: RatMatrix, t: int) -> Fraction:
    """Extended quadratic form at the point vector (C(t,0), ..., C(t,m))."""
    E = extend_matrix(F)
    v = [eval_rho_point(i, t) for i in range(E.rows)]
    return E.quad(v)


def gram_rows(rows: Sequence[tuple[Any, Sequence[Any]]]) -> RatMatrix:
    """sum radicand * row row^T for rows given as (radicand, coefficients)."""
    return gram_from_radical_rows([(rat(r), tuple(rat(x) for x in c)) for r, c in rows])


# ---------------------------------------------------------------------------
# lifting to polynomials
# ---------------------------------------------------------------------------

def cross(params: ClassParams, anchor: Vertex) -> list[Vertex]:
    return params.cross(anchor.g, anchor.h)


def rho_polynomial(params: ClassParams, anchor: Vertex, i: int,
                   order: TermOrder | None = None) -> Polynomial:
    """Elementary symmetric polynomial of degree i in the cross variables."""
    R = order or ring(params)
    T = cross(params, anchor)
    p = Polynomial(R, {})
    for S in itertools.combinations(T, i):
        t = Polynomial.const(R, 1)
        for v in S:
            t = t * Polynomial.var(R, v)
        p = p + t
    return p


def lift(r: RhoPoly, params: ClassParams, anchor: Vertex,
         order: TermOrder | None = None) -> Polynomial:
    if r.d != params.d:
        raise DimensionMismatch("RhoPoly cap differs from n_g + n_h - 1")
    R = order or ring(params)
    p = Polynomial(R, {})
    for i, c in enumerate(r.coeffs):
        if c:
            p = p + rho_polynomial(params, anchor, i, R) * c
    return p


def coerce_counts(point: Mapping[Vertex, int], params: ClassParams, anchor: Vertex) -> int:
    return sum(int(point[v]) for v in cross(params, anchor))
