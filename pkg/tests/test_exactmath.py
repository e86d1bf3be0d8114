from fractions import Fraction as Q

import pytest
from hypothesis import given, strategies as st

from vizsos.exactmath import (EmptyInterval, Inconsistent, NeedsPivot, NotPsd, NotSymmetric,
                              RatMatrix, best_rational_in_interval, gram_from_radical_rows,
                              ldlt_nopivot, ldlt_psd, rat, rat_cholesky_radical, rat_str,
                              rationals_in_interval, rref, shrink_interval, squarefree_split)
from vizsos.rhocalc import build_f_system

small = st.fractions(min_value=-20, max_value=20, max_denominator=12)


def scan_best(a, b):
    """Reference: walk denominators upward, smallest |p| first."""
    q = 1
    while True:
        cands = [Q(p, q) for p in range(int(a * q) - 2, int(b * q) + 3) if a <= Q(p, q) <= b]
        if cands:
            return min(cands, key=lambda x: (abs(x.numerator), x))
        q += 1


@st.composite
def psd_matrices(draw, max_n=4):
    n = draw(st.integers(1, max_n))
    k = draw(st.integers(1, n))
    rows = [[draw(small) for _ in range(n)] for _ in range(k)]
    out = [[sum((r[i] * r[j] for r in rows), Q(0)) for j in range(n)] for i in range(n)]
    return RatMatrix.from_rows(out)


# --- rationals -------------------------------------------------------------

def test_rat_parsing():
    assert rat("59/40") == Q(59, 40)
    assert rat(3) == Q(3)
    assert rat_str(Q(-5, 4)) == "-5/4"
    assert rat_str(Q(6)) == "6"
    with pytest.raises((ValueError, TypeError)):
        rat(float("nan"))


def test_matrix_basics():
    A = RatMatrix.from_rows([[1, 2], [3, 4]])
    assert (A @ RatMatrix.identity(2)) == A
    assert A.T[0, 1] == 3
    assert not A.is_symmetric()
    assert RatMatrix.from_rows([[2, 1], [1, 2]]).quad([1, -1]) == 2


# --- rref ------------------------------------------------------------------

@given(st.lists(st.lists(small, min_size=4, max_size=4), min_size=1, max_size=4),
       st.lists(small, min_size=4, max_size=4))
def test_rref_parametrization_solves_system(A, x0):
    names = ["a", "b", "c", "d"]
    eqs = [({n: c for n, c in zip(names, row)}, sum(c * v for c, v in zip(row, x0)))
           for row in A]
    sp = rref(eqs, variables=names)
    for trial in ([0] * 4, [1, -2, 3, 5]):
        vals = sp.substitute({v: trial[k] for k, v in enumerate(sp.free_vars)})
        for co, rhs in eqs:
            assert sum(c * vals[v] for v, c in co.items()) - rhs == 0


def test_rref_inconsistent():
    with pytest.raises(Inconsistent):
        rref([({"x": 1, "y": 1}, 1), ({"x": 2, "y": 2}, 3)])


def test_rref_priority_keeps_requested_free():
    eqs = [({"x": 1, "y": 1, "z": 1}, 3)]
    assert rref(eqs, priority=["z", "y", "x"]).free_vars == ("z", "y")
    assert rref(eqs, priority=["x", "y", "z"]).free_vars == ("x", "y")


def test_rref_d5_parametrization():
    S = build_f_system(5)
    sp = rref(S.linear_system(), variables=S.variables)
    assert sp.free_vars == ("F_1_1", "F_2_2")
    h = Q(1, 2)
    expected = {
        "F_1_2": (h, {"F_1_1": -h, "F_2_2": -h}),
        "F_1_3": (Q(-133, 40), {"F_1_1": Q(47, 40), "F_2_2": Q(-3, 4)}),
        "F_2_3": (Q(7, 4), {"F_1_1": -h}),
        "F_3_3": (Q(-6, 5), {"F_1_1": Q(3, 10)}),
    }
    for var, (c, lin) in expected.items():
        got_c, got_lin = sp.dependent_exprs[var]
        assert got_c == c and dict(got_lin) == lin


def test_rref_d6_forces_corner():
    S = build_f_system(6)
    sp = rref(S.linear_system(), variables=S.variables)
    assert sp.is_fixed("F_1_1") and sp.value("F_1_1") == 5


# --- LDL -------------------------------------------------------------------

@given(psd_matrices())
def test_ldl_reconstructs_psd(F):
    w = ldlt_psd(F)
    assert not isinstance(w, NotPsd)
    assert all(x >= 0 for x in w.D)
    assert w.check(F)


@given(psd_matrices(), st.integers(0, 3), st.fractions(min_value=Q(1, 100), max_value=5))
def test_ldl_refutes_indefinite(F, k, eps):
    # pushing one diagonal entry below zero makes the matrix indefinite
    rows = F.tolist()
    k %= F.rows
    rows[k][k] = -eps
    G = RatMatrix.from_rows(rows)
    r = ldlt_psd(G)
    assert isinstance(r, NotPsd)
    assert r.value < 0 and G.quad(r.vector) == r.value


def test_ldl_negative_diagonal_behind_zero():
    r = ldlt_psd(RatMatrix.from_rows([[0, 0], [0, -1]]))
    assert isinstance(r, NotPsd) and r.value == -1


@given(psd_matrices(), st.lists(small, min_size=4, max_size=4))
def test_psd_quadratic_nonnegative(F, v):
    assert F.quad(v[:F.rows]) >= 0


def test_ldl_rejects_asymmetric():
    with pytest.raises(NotSymmetric):
        ldlt_psd(RatMatrix.from_rows([[1, 2], [0, 1]]))


def test_ldl_zero_pivot_with_nonzero_column():
    with pytest.raises(NeedsPivot):
        ldlt_nopivot(RatMatrix.from_rows([[0, 1], [1, 0]]))
    assert isinstance(ldlt_psd(RatMatrix.from_rows([[0, 1], [1, 0]])), NotPsd)


# --- rounding --------------------------------------------------------------

def test_best_rational_examples():
    # denominator scan: 1/3 is the first hit in [0.2, 0.4]
    assert best_rational_in_interval(0.2, 0.4, 0) == Q(1, 3)
    assert best_rational_in_interval(Q(1, 5), Q(2, 5), 0) == Q(1, 3)
    # the d=5 bounding interval shrinks to [6.37, 36.73]; the smallest |p| integer is 7
    assert best_rational_in_interval(4.68455, 38.41658, 0.05) == 7
    assert best_rational_in_interval(-3.5, -1.2, 0) == -2
    assert best_rational_in_interval(-1, 1, 0) == 0
    assert best_rational_in_interval(3.0, 3.0, 0) == 3


@given(small, small, st.sampled_from([Q(0), Q(1, 20), Q(1, 10), Q(1, 4)]))
def test_best_rational_matches_scan(a, b, mg):
    lo, hi = min(a, b), max(a, b)
    s_lo, s_hi = shrink_interval(lo, hi, mg)
    best = best_rational_in_interval(lo, hi, mg)
    assert s_lo <= best <= s_hi
    assert best == scan_best(s_lo, s_hi)
    assert next(rationals_in_interval(lo, hi, mg)) == best


def test_rationals_in_interval_order():
    got = list(rationals_in_interval(0, 1, 0, max_denominator=3))
    assert got == [Q(0), Q(1), Q(1, 2), Q(1, 3), Q(2, 3)]


def test_shrink_interval_errors():
    with pytest.raises(EmptyInterval):
        shrink_interval(2, 1)
    with pytest.raises(ValueError):
        shrink_interval(0, 1, Q(1, 2))


# --- radicals --------------------------------------------------------------

@given(st.integers(1, 10**6))
def test_squarefree_split(n):
    a, r = squarefree_split(n)
    assert a * a * r == n
    assert all(r % (p * p) for p in range(2, 200))


@given(psd_matrices())
def test_radical_rows_reconstruct(F):
    try:
        rows = rat_cholesky_radical(F)
    except NeedsPivot:
        return
    assert gram_from_radical_rows(rows, F.rows) == F
    for k, (r, row) in enumerate(rows):
        assert r >= 0 and r.denominator == 1
        assert all(x == 0 for x in row[:k])


def test_radical_rows_d5_example():
    F = RatMatrix.from_rows([[6, -4, Q(59, 40)], [-4, 3, Q(-5, 4)], [Q(59, 40), Q(-5, 4), Q(3, 5)]])
    rows = rat_cholesky_radical(F)
    assert rows == [(Q(6), (Q(1), Q(-2, 3), Q(59, 240))),
                    (Q(3), (Q(0), Q(1, 3), Q(-4, 15))),
                    (Q(154), (Q(0), Q(0), Q(1, 80)))]
