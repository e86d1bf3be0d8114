"""Exact rational arithmetic and dense linear algebra.

Rationals are :class:`fractions.Fraction` throughout (always in lowest terms,
positive denominator).  This module adds the pieces the certificate pipeline
needs on top of that: an immutable dense matrix, RREF with caller-chosen free
variables, a pivoted LDL^T that either proves positive semidefiniteness or
returns an explicit negative direction, rounding of a float interval to a
small-denominator rational, and the radical form of a rational Cholesky
factor.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Hashable, Iterable, Iterator, Mapping, Sequence

Rational = Fraction

__all__ = [
    "Rational",
    "rat",
    "rat_str",
    "RatMatrix",
    "LdlWitness",
    "NotPsd",
    "AffineSolutionSpace",
    "Inconsistent",
    "NotSymmetric",
    "EmptyInterval",
    "NeedsPivot",
    "rref",
    "default_free_priority",
    "ldlt_psd",
    "ldlt_nopivot",
    "best_rational_in_interval",
    "rationals_in_interval",
    "shrink_interval",
    "squarefree_split",
    "rat_cholesky_radical",
]


class Inconsistent(ValueError):
    """The linear system has no solution."""


class NotSymmetric(ValueError):
    pass


class EmptyInterval(ValueError):
    pass


class NeedsPivot(ArithmeticError):
    """Unpivoted LDL^T met a zero pivot whose column is not zero."""


def rat(x: Any) -> Fraction:
    """Coerce ``x`` to a Fraction.

    Strings use the ``"p/q"`` form; floats are taken at their exact binary
    value.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


def rat_str(q: Fraction) -> str:
    """Canonical ``"p/q"`` (or ``"p"``) form used in all JSON output."""
    q = rat(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


class RatMatrix:
    """Immutable dense matrix of Fractions, stored row-major."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries: Iterable[Any]):
        ent = tuple(rat(e) for e in entries)
        if len(ent) != rows * cols:
            raise ValueError(f"expected {rows * cols} entries, got {len(ent)}")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "entries", ent)

    def __setattr__(self, name, value):
        raise AttributeError("RatMatrix is immutable")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Any]]) -> "RatMatrix":
        nr = len(rows)
        nc = len(rows[0]) if nr else 0
        if any(len(r) != nc for r in rows):
            raise ValueError("ragged rows")
        return cls(nr, nc, (e for r in rows for e in r))

    @classmethod
    def zeros(cls, rows: int, cols: int | None = None) -> "RatMatrix":
        cols = rows if cols is None else cols
        return cls(rows, cols, [0] * (rows * cols))

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls(n, n, (int(i == j) for i in range(n) for j in range(n)))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def col(self, j: int) -> tuple[Fraction, ...]:
        return self.entries[j::self.cols]

    def tolist(self) -> list[list[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    @property
    def T(self) -> "RatMatrix":
        return RatMatrix(self.cols, self.rows,
                         (self[i, j] for j in range(self.cols) for i in range(self.rows)))

    def __matmul__(self, other: "RatMatrix") -> "RatMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        out = []
        ocols = [other.col(j) for j in range(other.cols)]
        for i in range(self.rows):
            r = self.row(i)
            for c in ocols:
                out.append(sum((a * b for a, b in zip(r, c) if a and b), Fraction(0)))
        return RatMatrix(self.rows, other.cols, out)

    def __add__(self, other: "RatMatrix") -> "RatMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return RatMatrix(self.rows, self.cols, (a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: "RatMatrix") -> "RatMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return RatMatrix(self.rows, self.cols, (a - b for a, b in zip(self.entries, other.entries)))

    def scale(self, s: Any) -> "RatMatrix":
        s = rat(s)
        return RatMatrix(self.rows, self.cols, (s * a for a in self.entries))

    def is_symmetric(self) -> bool:
        return self.rows == self.cols and all(
            self[i, j] == self[j, i] for i in range(self.rows) for j in range(i))

    def quad(self, v: Sequence[Any]) -> Fraction:
        """Exact v^T M v."""
        v = [rat(x) for x in v]
        return sum((v[i] * self[i, j] * v[j]
                    for i in range(self.rows) for j in range(self.cols)
                    if v[i] and v[j]), Fraction(0))

    def to_float(self):
        import numpy as np
        return np.array([[float(x) for x in self.row(i)] for i in range(self.rows)])

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, RatMatrix) and self.shape == other.shape
                and self.entries == other.entries)

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self.entries))

    def __repr__(self) -> str:
        body = "; ".join(", ".join(rat_str(x) for x in self.row(i)) for i in range(self.rows))
        return f"RatMatrix([{body}])"


# ---------------------------------------------------------------------------
# RREF
# ---------------------------------------------------------------------------

Var = Hashable
LinearEquation = tuple[Mapping[Var, Any], Any]


@dataclass(frozen=True)
class AffineSolutionSpace:
    """Solution set ``dep = const + sum(coeff * free)`` of a linear system."""

    free_vars: tuple[Var, ...]
    dependent_exprs: Mapping[Var, tuple[Fraction, Mapping[Var, Fraction]]]

    @property
    def variables(self) -> tuple[Var, ...]:
        return tuple(self.dependent_exprs) + self.free_vars

    def substitute(self, assignment: Mapping[Var, Any]) -> dict[Var, Fraction]:
        """Full solution for an assignment of every free variable."""
        missing = [v for v in self.free_vars if v not in assignment]
        if missing:
            raise KeyError(f"free variables not assigned: {missing}")
        vals = {v: rat(assignment[v]) for v in self.free_vars}
        for dep, (const, lin) in self.dependent_exprs.items():
            vals[dep] = const + sum((c * vals[f] for f, c in lin.items()), Fraction(0))
        return vals

    def is_fixed(self, var: Var) -> bool:
        """True when ``var`` takes the same value in every solution."""
        return var in self.dependent_exprs and not self.dependent_exprs[var][1]

    def value(self, var: Var) -> Fraction:
        if not self.is_fixed(var):
            raise ValueError(f"{var!r} is not fixed by the system")
        return self.dependent_exprs[var][0]

    def equations(self) -> list[LinearEquation]:
        """Independent equations equivalent to the source system."""
        out = []
        for dep, (const, lin) in self.dependent_exprs.items():
            coeffs = {dep: Fraction(1)}
            for f, c in lin.items():
                coeffs[f] = -c
            out.append((coeffs, const))
        return out


_ENTRY_RE = re.compile(r"F_(\d+)_(\d+)")


def default_free_priority(variables: Iterable[Var]) -> list[Var]:
    """Diagonal entries (``(i, i)`` or ``"F_i_i"``) first, then off-diagonals, each by (i, j)."""
    vs = list(variables)

    def key(v):
        if isinstance(v, str):
            m = _ENTRY_RE.fullmatch(v)
            if m:
                v = (int(m.group(1)), int(m.group(2)))
        if isinstance(v, tuple) and len(v) == 2:
            return (0 if v[0] == v[1] else 1, v)
        return (2, repr(v))

    return sorted(vs, key=key)


def rref(equations: Sequence[LinearEquation],
         priority: Sequence[Var] | None = None,
         variables: Iterable[Var] | None = None) -> AffineSolutionSpace:
    """Parametrize the solution set of ``sum(coeffs[v] * v) = rhs`` equations.

    ``priority`` lists variables in the order in which they should be kept
    free; elimination pivots on the lowest-priority columns first, so among
    all valid pivot choices the highest-priority variables stay free.

    Raises :class:`Inconsistent` if the system has no solution.
    """
    seen: dict[Var, None] = {}
    for v in variables or ():
        seen[v] = None
    for coeffs, _ in equations:
        for v in coeffs:
            seen[v] = None
    allvars = list(seen)
    if priority is None:
        priority = default_free_priority(allvars)
    else:
        priority = list(priority)
        rest = [v for v in default_free_priority(allvars) if v not in set(priority)]
        priority = [v for v in priority if v in seen] + rest
    cols = list(reversed(priority))
    index = {v: k for k, v in enumerate(cols)}
    ncol = len(cols)

    rows: list[list[Fraction]] = []
    for coeffs, rhs in equations:
        r = [Fraction(0)] * (ncol + 1)
        for v, c in coeffs.items():
            r[index[v]] += rat(c)
        r[ncol] = rat(rhs)
        rows.append(r)

    pivots: list[int] = []
    prow = 0
    for c in range(ncol):
        sel = next((i for i in range(prow, len(rows)) if rows[i][c] != 0), None)
        if sel is None:
            continue
        rows[prow], rows[sel] = rows[sel], rows[prow]
        piv = rows[prow][c]
        rows[prow] = [x / piv for x in rows[prow]]
        for i in range(len(rows)):
            if i != prow and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[prow])]
        pivots.append(c)
        prow += 1
        if prow == len(rows):
            break

    for r in rows[prow:]:
        if r[ncol] != 0 and all(x == 0 for x in r[:ncol]):
            raise Inconsistent("linear system has no solution")

    pivset = set(pivots)
    free_cols = [c for c in range(ncol) if c not in pivset]
    # report free variables in priority order
    free_vars = tuple(v for v in priority if index[v] in set(free_cols))
    dep: dict[Var, tuple[Fraction, dict[Var, Fraction]]] = {}
    for k, c in enumerate(pivots):
        r = rows[k]
        lin = {cols[fc]: -r[fc] for fc in free_cols if r[fc] != 0}
        dep[cols[c]] = (r[ncol], dict(sorted(lin.items(), key=lambda kv: priority.index(kv[0]))))
    ordered = {v: dep[v] for v in default_free_priority(dep)}
    return AffineSolutionSpace(free_vars=free_vars, dependent_exprs=ordered)


# ---------------------------------------------------------------------------
# LDL^T
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LdlWitness:
    """``P^T F P = L diag(D) L^T`` with unit lower-triangular ``L``, ``D >= 0``.

    ``permutation[k]`` is the original index placed at position ``k``.
    """

    permutation: tuple[int, ...]
    L: RatMatrix
    D: tuple[Fraction, ...]

    def reconstruct(self) -> RatMatrix:
        n = len(self.D)
        inner = [[sum((self.L[i, w] * self.D[w] * self.L[j, w] for w in range(n)), Fraction(0))
                  for j in range(n)] for i in range(n)]
        out = [[Fraction(0)] * n for _ in range(n)]
        for a, pa in enumerate(self.permutation):
            for b, pb in enumerate(self.permutation):
                out[pa][pb] = inner[a][b]
        return RatMatrix.from_rows(out)

    def check(self, F: RatMatrix) -> bool:
        n = len(self.D)
        unit = all(self.L[i, i] == 1 and all(self.L[i, j] == 0 for j in range(i + 1, n))
                   for i in range(n))
        return (unit and all(x >= 0 for x in self.D)
                and sorted(self.permutation) == list(range(n))
                and self.reconstruct() == F)


@dataclass(frozen=True)
class NotPsd:
    """Exact refutation: ``vector^T F vector = value < 0``."""

    vector: tuple[Fraction, ...]
    value: Fraction


def _check_square_symmetric(F: RatMatrix) -> None:
    if F.rows != F.cols or not F.is_symmetric():
        raise NotSymmetric("matrix must be square and exactly symmetric")


def _lift_direction(L: list[list[Fraction]], k: int, n: int,
                    u: dict[int, Fraction]) -> list[Fraction]:
    """Vector (in permuted coordinates) whose F-value equals u^T S u.

    ``S`` is the Schur complement after ``k`` elimination steps and ``u`` is
    indexed by positions >= k.  Solves ``L11^T w = -L21^T u`` for the leading
    block.
    """
    v = [Fraction(0)] * n
    for pos, val in u.items():
        v[pos] = val
    for i in range(k - 1, -1, -1):
        acc = sum((L[j][i] * v[j] for j in range(i + 1, n) if v[j]), Fraction(0))
        v[i] = -acc
    return v


def ldlt_psd(F: RatMatrix) -> LdlWitness | NotPsd:
    """Exact PSD test by symmetric pivoting on the largest remaining diagonal."""
    _check_square_symmetric(F)
    n = F.rows
    A = F.tolist()
    perm = list(range(n))
    L = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    D = [Fraction(0)] * n

    def refute(k: int, u: dict[int, Fraction]) -> NotPsd:
        vp = _lift_direction(L, k, n, u)
        v = [Fraction(0)] * n
        for pos, orig in enumerate(perm):
            v[orig] = vp[pos]
        return NotPsd(tuple(v), F.quad(v))

    for k in range(n):
        neg = min(range(k, n), key=lambda i: (A[i][i], i))
        if A[neg][neg] < 0:
            return refute(k, {neg: Fraction(1)})
        best = max(range(k, n), key=lambda i: (A[i][i], -i))
        if A[best][best] == 0:
            for i in range(k, n):
                for j in range(i + 1, n):
                    if A[i][j] != 0:
                        sign = 1 if A[i][j] > 0 else -1
                        return refute(k, {i: Fraction(1), j: Fraction(-sign)})
            break  # remaining block is exactly zero
        if best != k:
            A[k], A[best] = A[best], A[k]
            for r in A:
                r[k], r[best] = r[best], r[k]
            perm[k], perm[best] = perm[best], perm[k]
            L[k][:k], L[best][:k] = L[best][:k], L[k][:k]
        p = A[k][k]
        D[k] = p
        for i in range(k + 1, n):
            L[i][k] = A[i][k] / p
        for i in range(k + 1, n):
            if A[i][k] == 0:
                continue
            li = L[i][k]
            for j in range(k + 1, n):
                A[i][j] -= li * A[k][j]
        for i in range(k + 1, n):
            A[i][k] = A[k][i] = Fraction(0)
        A[k][k] = Fraction(0)

    return LdlWitness(tuple(perm), RatMatrix.from_rows(L), tuple(D))


def ldlt_nopivot(F: RatMatrix) -> LdlWitness:
    """LDL^T in natural order, for PSD ``F``.

    A zero pivot is allowed only when its whole column below is zero;
    otherwise :class:`NeedsPivot` is raised.
    """
    _check_square_symmetric(F)
    n = F.rows
    A = F.tolist()
    L = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    D = [Fraction(0)] * n
    for k in range(n):
        p = A[k][k]
        if p < 0:
            raise ValueError("matrix is not positive semidefinite")
        if p == 0:
            if any(A[i][k] != 0 for i in range(k + 1, n)):
                raise NeedsPivot(f"zero pivot at {k} with nonzero column")
            continue
        D[k] = p
        for i in range(k + 1, n):
            L[i][k] = A[i][k] / p
        for i in range(k + 1, n):
            if L[i][k] == 0:
                continue
            for j in range(k + 1, n):
                A[i][j] -= L[i][k] * A[k][j]
    return LdlWitness(tuple(range(n)), RatMatrix.from_rows(L), tuple(D))


# ---------------------------------------------------------------------------
# rational rounding
# ---------------------------------------------------------------------------

def _as_margin(margin: Any) -> Fraction:
    if isinstance(margin, float):
        return Fraction(repr(margin))
    return rat(margin)


def shrink_interval(lo: Any, hi: Any, margin: Any = Fraction(1, 20)) -> tuple[Fraction, Fraction]:
    lo, hi, mg = rat(lo), rat(hi), _as_margin(margin)
    if hi < lo:
        raise EmptyInterval(f"hi < lo ({float(hi)} < {float(lo)})")
    if not 0 <= mg < Fraction(1, 2):
        raise ValueError("margin must lie in [0, 1/2)")
    w = hi - lo
    return lo + mg * w, hi - mg * w


def _simplest_positive(a: Fraction, b: Fraction) -> Fraction:
    # 0 < a <= b, closed interval; continued-fraction descent
    c = -(-a.numerator // a.denominator)
    if c <= b:
        return Fraction(c)
    n = a.numerator // a.denominator
    return n + 1 / _simplest_positive(1 / (b - n), 1 / (a - n))


def _simplest(a: Fraction, b: Fraction) -> Fraction:
    if a <= 0 <= b:
        return Fraction(0)
    if b < 0:
        return -_simplest_positive(-b, -a)
    return _simplest_positive(a, b)


def best_rational_in_interval(lo: Any, hi: Any, margin: Any = Fraction(1, 20)) -> Fraction:
    """Smallest-denominator rational in the margin-shrunken ``[lo, hi]``.

    Ties go to the smallest ``|numerator|``.  ``lo``/``hi`` are taken at
    their exact binary value.
    """
    a, b = shrink_interval(lo, hi, margin)
    return _simplest(a, b)


def rationals_in_interval(lo: Any, hi: Any, margin: Any = Fraction(1, 20),
                          max_denominator: int = 10**6) -> Iterator[Fraction]:
    """All rationals of the shrunken interval, best first.

    Order: denominator ascending, then ``|numerator|``, then value.  The
    first element equals :func:`best_rational_in_interval`.
    """
    a, b = shrink_interval(lo, hi, margin)
    for q in range(1, max_denominator + 1):
        plo = math.ceil(a * q)
        phi = math.floor(b * q)
        if plo > phi:
            continue
        if plo >= 0:
            ps: Iterable[int] = range(plo, phi + 1)
        elif phi <= 0:
            ps = range(phi, plo - 1, -1)
        else:
            ps = _by_magnitude(plo, phi)
        for p in ps:
            if math.gcd(p, q) == 1:
                yield Fraction(p, q)


def _by_magnitude(plo: int, phi: int) -> Iterator[int]:
    yield 0
    k = 1
    while -k >= plo or k <= phi:
        if -k >= plo:
            yield -k
        if k <= phi:
            yield k
        k += 1


# ---------------------------------------------------------------------------
# radical-form Cholesky rows
# ---------------------------------------------------------------------------

def squarefree_split(n: int, trial_bound: int = 100_000) -> tuple[int, int]:
    """Write ``n = a**2 * r``; ``r`` is squarefree unless ``n`` has a repeated
    prime factor above ``trial_bound`` that is not caught by the final
    perfect-square test.  The identity itself is always exact."""
    if n < 0:
        raise ValueError("negative")
    if n == 0:
        return 0, 0
    a, r = 1, 1
    p = 2
    while p * p <= n and p <= trial_bound:
        if n % (p * p) == 0 or n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            a *= p ** (e // 2)
            if e % 2:
                r *= p
        p += 1 if p == 2 else 2
    s = math.isqrt(n)
    if s * s == n:
        a *= s
    else:
        r *= n
    return a, r


def rat_cholesky_radical(F: RatMatrix, witness: LdlWitness | None = None
                         ) -> list[tuple[Fraction, tuple[Fraction, ...]]]:
    """Rows ``c_w = sqrt(radicand_w) * row_w`` with ``F = C^T C``.

    Uses the witness when it is unpermuted, else re-factors without pivoting
    (raising :class:`NeedsPivot` when that is impossible).  Each radicand is
    reduced to a squarefree integer with the square part folded into the row,
    so that ``sum(radicand * outer(row, row)) == F`` exactly.
    """
    if witness is None or witness.permutation != tuple(range(F.rows)):
        witness = ldlt_nopivot(F)
    n = F.rows
    out = []
    for w in range(n):
        dw = witness.D[w]
        col = [witness.L[i, w] for i in range(n)]
        if dw == 0:
            out.append((Fraction(0), tuple(Fraction(0) for _ in range(n))))
            continue
        a, r = squarefree_split(dw.numerator * dw.denominator)
        s = Fraction(a, dw.denominator)
        out.append((Fraction(r), tuple(s * x for x in col)))
    return out


def gram_from_radical_rows(rows: Sequence[tuple[Any, Sequence[Any]]], n: int | None = None) -> RatMatrix:
    """``sum_w radicand_w * row_w row_w^T``, exact."""
    if n is None:
        n = len(rows[0][1])
    out = [[Fraction(0)] * n for _ in range(n)]
    for rad, row in rows:
        rad = rat(rad)
        row = [rat(x) for x in row]
        for i in range(n):
            if not row[i]:
                continue
            for j in range(n):
                out[i][j] += rad * row[i] * row[j]
    return RatMatrix.from_rows(out)
