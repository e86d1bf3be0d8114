"""Dense primal-dual interior-point solver for small SDPs.

Problem form (one PSD block ``X`` plus an optional nonnegative vector ``x``)::

    min/max  <C, X> + c_lp . x
    s.t.     <A_i, X> + a_i . x = b_i,   X PSD,  x >= 0

The iteration is the infeasible-start HKM method with a Mehrotra
predictor-corrector step.  Everything is double precision; results are
numerical evidence and are re-checked exactly elsewhere.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Sequence

import numpy as np
import scipy.linalg as sla

log = logging.getLogger(__name__)

MAX_DIM = 64


class BadProblem(ValueError):
    pass


class Status(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    NUMERICAL_TROUBLE = "NumericalTrouble"


@dataclass(frozen=True)
class Constraint:
    A: np.ndarray
    b: float
    lp: np.ndarray | None = None


@dataclass
class SdpProblem:
    n: int
    objective: np.ndarray
    constraints: list[Constraint]
    trace_bound: float | None = None
    lp_dim: int = 0
    lp_objective: np.ndarray | None = None

    def __post_init__(self):
        if not 1 <= self.n <= MAX_DIM:
            raise BadProblem(f"matrix dimension must be in 1..{MAX_DIM}")
        self.objective = _sym_checked(self.objective, self.n, "objective")
        cons = []
        for k, c in enumerate(self.constraints):
            A = _sym_checked(c.A, self.n, f"constraint {k}")
            lp = np.zeros(self.lp_dim) if c.lp is None else np.asarray(c.lp, float)
            if lp.shape != (self.lp_dim,):
                raise BadProblem(f"constraint {k}: LP part has wrong length")
            cons.append(Constraint(A, float(c.b), lp))
        self.constraints = cons
        if self.lp_objective is None:
            self.lp_objective = np.zeros(self.lp_dim)
        self.lp_objective = np.asarray(self.lp_objective, float)
        if self.lp_objective.shape != (self.lp_dim,):
            raise BadProblem("LP objective has wrong length")
        if self.trace_bound is not None and self.trace_bound <= 0:
            raise BadProblem("trace_bound must be positive")

    @classmethod
    def from_equalities(cls, n: int, objective: np.ndarray,
                        equalities: Sequence[tuple[np.ndarray, float]],
                        trace_bound: float | None = None) -> "SdpProblem":
        return cls(n, objective, [Constraint(np.asarray(A, float), b) for A, b in equalities],
                   trace_bound)


def _sym_checked(M, n: int, what: str) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.shape != (n, n):
        raise BadProblem(f"{what}: expected shape {(n, n)}, got {M.shape}")
    if not np.array_equal(M, M.T):
        raise BadProblem(f"{what}: matrix is not exactly symmetric")
    return M


@dataclass
class SdpSolution:
    status: Status
    X: np.ndarray
    y: np.ndarray
    primal_obj: float
    dual_obj: float
    residuals: dict[str, float]
    iterations: int = 0
    x_lp: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def ok(self) -> bool:
        return self.status == Status.OPTIMAL

    def near_optimal(self, tol: float) -> bool:
        """Optimal, or stalled at an iterate whose residuals are all <= tol.

        Stalls happen on degenerate faces (no strict complementarity); the
        returned iterate is then the most accurate one seen.
        """
        if self.status == Status.OPTIMAL:
            return True
        if self.status != Status.NUMERICAL_TROUBLE or not self.residuals:
            return False
        return max(self.residuals["primal"], self.residuals["dual"], self.residuals["gap"]) <= tol


@dataclass(frozen=True)
class SolverOptions:
    feas_tol: float = 1e-8
    gap_tol: float = 1e-8
    max_iter: int = 200
    step_fraction: float = 0.98
    infeas_margin: float = 1e-4
    divergence: float = 1e10
    stall_iters: int = 15
    # a common primal/dual step keeps the infeasibilities shrinking together,
    # which the certificate SDPs need
    equal_steps: bool = True


# ---------------------------------------------------------------------------
# standard form: PSD block + LP block, with trace bound folded in
# ---------------------------------------------------------------------------

@dataclass
class _Std:
    n: int
    nl: int
    C: np.ndarray
    c: np.ndarray
    A: np.ndarray      # k x n x n
    a: np.ndarray      # k x nl
    b: np.ndarray
    scale: np.ndarray  # row scaling applied to A, a, b


def _standardize(p: SdpProblem, sign: float) -> _Std:
    n, nl = p.n, p.lp_dim
    As = [c.A for c in p.constraints]
    als = [c.lp for c in p.constraints]
    bs = [c.b for c in p.constraints]
    if p.trace_bound is not None:
        nl += 1
        als = [np.append(a, 0.0) for a in als]
        As.append(np.eye(n))
        als.append(np.append(np.zeros(p.lp_dim), 1.0))
        bs.append(float(p.trace_bound))
        c = np.append(sign * p.lp_objective, 0.0)
    else:
        c = sign * p.lp_objective
    k = len(As)
    A = np.array(As).reshape(k, n, n) if k else np.zeros((0, n, n))
    a = np.array(als).reshape(k, nl) if k else np.zeros((0, nl))
    b = np.array(bs, dtype=float)
    norms = np.sqrt((A.reshape(k, -1) ** 2).sum(1) + (a ** 2).sum(1)) if k else np.zeros(0)
    if np.any(norms == 0):
        zero = norms == 0
        if np.any(np.abs(b[zero]) > 0):
            return _Std(n, nl, sign * p.objective, c, A, a, b, np.full(k, np.nan))
        norms[zero] = 1.0
    A = A / norms[:, None, None]
    a = a / norms[:, None]
    b = b / norms
    return _Std(n, nl, sign * p.objective, c, A, a, b, norms)


def _independent_rows(S: _Std) -> tuple[np.ndarray, bool]:
    """Indices of a maximal independent set of constraints, and consistency."""
    k = len(S.b)
    if k == 0:
        return np.arange(0), True
    Mat = np.hstack([S.A.reshape(k, -1), S.a])
    Q, R, piv = sla.qr(Mat.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = max(Mat.shape) * np.finfo(float).eps * (diag[0] if diag.size else 1.0) * 1e3
    rank = int(np.sum(diag > tol))
    keep = np.sort(piv[:rank])
    if rank == k:
        return keep, True
    # dependent rows must be consistent with the kept ones
    sub = Mat[keep]
    coef, *_ = np.linalg.lstsq(sub.T, Mat.T, rcond=None)
    bpred = coef.T @ S.b[keep]
    consistent = bool(np.all(np.abs(bpred - S.b) <= 1e-9 * (1 + np.abs(S.b))))
    return keep, consistent


def _op_A(S: _Std, X: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.einsum("kij,ij->k", S.A, X) + S.a @ x


def _op_At(S: _Std, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return np.einsum("k,kij->ij", y, S.A), S.a.T @ y


def _max_step(X: np.ndarray, dX: np.ndarray) -> float:
    try:
        L = np.linalg.cholesky(X)
    except np.linalg.LinAlgError:
        return 0.0
    Li = sla.solve_triangular(L, np.eye(len(X)), lower=True)
    W = Li @ dX @ Li.T
    lam = np.linalg.eigvalsh((W + W.T) / 2)[0]
    return np.inf if lam >= 0 else -1.0 / lam


def _max_step_lp(x: np.ndarray, dx: np.ndarray) -> float:
    neg = dx < 0
    return np.inf if not np.any(neg) else float(np.min(-x[neg] / dx[neg]))


def solve(p: SdpProblem, sense: str = "min", opts: SolverOptions | None = None,
          trace: IO[str] | None = None) -> SdpSolution:
    """Optimize ``<C, X>`` over the spectrahedron; ``sense`` is "min" or "max".

    ``trace`` optionally receives one JSON line per iteration.
    """
    if sense not in ("min", "max"):
        raise BadProblem("sense must be 'min' or 'max'")
    opts = opts or SolverOptions()
    sign = 1.0 if sense == "min" else -1.0
    S = _standardize(p, sign)
    n, nl = S.n, S.nl
    k_all = len(S.b)
    if np.any(np.isnan(S.scale)):
        return _result(Status.INFEASIBLE, np.zeros((n, n)), np.zeros(k_all), np.nan, np.nan,
                       {"primal": np.inf, "dual": np.nan, "gap": np.nan}, 0, np.zeros(nl), sign)
    keep, consistent = _independent_rows(S)
    if not consistent:
        return _result(Status.INFEASIBLE, np.zeros((n, n)), np.zeros(k_all), np.nan, np.nan,
                       {"primal": np.inf, "dual": np.nan, "gap": np.nan}, 0, np.zeros(nl), sign)
    R = _Std(n, nl, S.C, S.c, S.A[keep], S.a[keep], S.b[keep], S.scale[keep])
    k = len(R.b)

    # constraints have unit norm here, so these are the usual scale-aware starts
    if p.trace_bound is not None:
        xi = 1.0 + p.trace_bound / n
    else:
        xi = max(10.0, np.sqrt(n), n * float(np.max(1.0 + np.abs(R.b), initial=1.0)))
    eta = max(10.0, np.sqrt(n), np.linalg.norm(R.C), np.linalg.norm(R.c))
    X = np.eye(n) * xi
    Z = np.eye(n) * eta
    x = np.ones(nl) * xi
    z = np.ones(nl) * eta
    y = np.zeros(k)
    normb = 1.0 + np.linalg.norm(R.b)
    normC = 1.0 + np.sqrt(np.linalg.norm(R.C) ** 2 + np.linalg.norm(R.c) ** 2)
    nu = n + nl
    status = Status.NUMERICAL_TROUBLE
    it = 0
    res = {}
    best = None          # (score, X, x, y, res) of the most accurate iterate
    stall = 0
    for it in range(1, opts.max_iter + 1):
        AtY, aty = _op_At(R, y)
        rp = R.b - _op_A(R, X, x)
        Rd = R.C - Z - AtY
        rd = R.c - z - aty
        mu = (np.sum(X * Z) + x @ z) / nu
        pobj = np.sum(R.C * X) + R.c @ x
        dobj = R.b @ y
        pres = np.linalg.norm(rp) / normb
        dres = np.sqrt(np.linalg.norm(Rd) ** 2 + np.linalg.norm(rd) ** 2) / normC
        gap = nu * mu / (1.0 + abs(pobj) + abs(dobj))
        ogap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        res = {"primal": float(pres), "dual": float(dres), "gap": float(gap),
               "objective_gap": float(ogap)}
        if trace is not None:
            trace.write(json.dumps({"iter": it, "pobj": pobj, "dobj": dobj, "mu": mu, **res}) + "\n")
        if pres <= opts.feas_tol and dres <= opts.feas_tol and gap <= opts.gap_tol:
            status = Status.OPTIMAL
            break
        score = max(pres, dres, gap)
        if best is None or score < best[0]:
            best = (score, X.copy(), x.copy(), y.copy(), dict(res))
            stall = 0
        else:
            stall += 1
            if stall >= opts.stall_iters:
                break
        if np.linalg.norm(y) > opts.divergence:
            # dual ray: b.y grows while the dual residual stays relatively small
            rel = np.linalg.norm(Rd) / (1.0 + np.linalg.norm(y))
            status = Status.INFEASIBLE if dobj > 0 and rel < 1e-6 else Status.NUMERICAL_TROUBLE
            break
        if np.abs(X).max() > opts.divergence:
            rel = np.linalg.norm(rp) / (1.0 + np.linalg.norm(X))
            status = Status.UNBOUNDED if pobj < 0 and rel < 1e-6 else Status.NUMERICAL_TROUBLE
            break

        try:
            Zc = sla.cho_factor(Z, lower=True)
            Zi = sla.cho_solve(Zc, np.eye(n))
            Zi = (Zi + Zi.T) / 2
            G = np.einsum("ij,kjl,lm->kim", X, R.A, Zi)    # X A_j Z^-1
            M = np.einsum("kij,lji->kl", R.A, G) + (R.a * (x / z)) @ R.a.T
            M = (M + M.T) / 2
            cho = sla.cho_factor(M)
        except (np.linalg.LinAlgError, sla.LinAlgError):
            break

        def direction(sig_mu: float, corrX: np.ndarray | None, corrx: np.ndarray | None):
            Rc = sig_mu * Zi - X
            rc = sig_mu / z - x
            if corrX is not None:
                Rc = Rc - corrX @ Zi
                rc = rc - corrx / z
            rhs = rp - _op_A(R, Rc, rc) + _op_A(R, X @ Rd @ Zi, x * rd / z)
            dy = sla.cho_solve(cho, rhs)
            for refine in range(4):
                dAt, dat = _op_At(R, dy)
                dZ = Rd - dAt
                dz = rd - dat
                dX = Rc - X @ dZ @ Zi
                dX = (dX + dX.T) / 2
                dx = rc - x * dz / z
                if refine == 3:
                    break
                # refine against the unreduced equation A(dX) = rp
                err = rp - _op_A(R, dX, dx)
                if np.linalg.norm(err) <= 1e-14 * normb:
                    break
                dy = dy + sla.cho_solve(cho, err)
            return dX, dx, dy, dZ, dz

        dX, dx, dy, dZ, dz = direction(0.0, None, None)
        ap = min(1.0, _max_step(X, dX), _max_step_lp(x, dx))
        ad = min(1.0, _max_step(Z, dZ), _max_step_lp(z, dz))
        mu_aff = (np.sum((X + ap * dX) * (Z + ad * dZ)) + (x + ap * dx) @ (z + ad * dz)) / nu
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3
        dX, dx, dy, dZ, dz = direction(sigma * mu, dX @ dZ, dx * dz)
        ap = min(1.0, opts.step_fraction * _max_step(X, dX), opts.step_fraction * _max_step_lp(x, dx))
        ad = min(1.0, opts.step_fraction * _max_step(Z, dZ), opts.step_fraction * _max_step_lp(z, dz))
        if opts.equal_steps:
            ap = ad = min(ap, ad)
        if ap < 1e-12 and ad < 1e-12:
            break
        X = X + ap * dX
        x = x + ap * dx
        y = y + ad * dy
        Z = Z + ad * dZ
        z = z + ad * dz
        X = (X + X.T) / 2
        Z = (Z + Z.T) / 2

    if status == Status.NUMERICAL_TROUBLE and best is not None:
        _, X, x, y, res = best
    yfull = np.zeros(k_all)
    yfull[keep] = y
    yfull = yfull / np.where(S.scale == 0, 1.0, S.scale)
    pobj = np.sum(S.C * X) + S.c @ x
    dobj = float(R.b @ y)
    return _result(status, X, yfull, pobj, dobj, res, it, x, sign,
                   lp_user=p.lp_dim)


def _result(status, X, y, pobj, dobj, res, it, x, sign, lp_user=None) -> SdpSolution:
    x_user = x if lp_user is None else x[:lp_user]
    return SdpSolution(status, X, sign * y, float(sign * pobj), float(sign * dobj),
                       res, it, x_user)


def check_solution(p: SdpProblem, sol: SdpSolution, tol: float = 1e-6) -> bool:
    """Independent re-check of an Optimal solution's primal feasibility."""
    X = sol.X
    if not np.allclose(X, X.T, atol=0, rtol=0):
        return False
    scale = max(1.0, np.abs(X).max())
    if np.linalg.eigvalsh(X)[0] < -tol * scale:
        return False
    for c in p.constraints:
        val = np.sum(c.A * X) + (c.lp @ sol.x_lp if p.lp_dim else 0.0)
        nrm = np.sqrt(np.sum(c.A ** 2) + np.sum(c.lp ** 2))
        if abs(val - c.b) > tol * max(1.0, nrm) * scale:
            return False
    return True


# ---------------------------------------------------------------------------
# feasibility
# ---------------------------------------------------------------------------

@dataclass
class Feasible:
    X: np.ndarray
    measure: float
    label: str = "numerical evidence"

    @property
    def feasible(self) -> bool:
        return True


@dataclass
class LikelyInfeasible:
    measure: float
    status: Status
    label: str = "numerical evidence"

    @property
    def feasible(self) -> bool:
        return False


def feasibility(p: SdpProblem, opts: SolverOptions | None = None) -> Feasible | LikelyInfeasible:
    """Phase I: minimize the total slack needed to satisfy the equalities.

    Constraints are normalized to unit norm first, so the measure is scale-free.
    """
    if p.trace_bound is None:
        raise BadProblem("feasibility needs a trace_bound")
    opts = opts or SolverOptions()
    k = len(p.constraints)
    nl = p.lp_dim + 2 * k
    cons = []
    for i, c in enumerate(p.constraints):
        nrm = np.sqrt(np.sum(c.A ** 2) + np.sum(c.lp ** 2))
        nrm = nrm if nrm > 0 else 1.0
        lp = np.zeros(nl)
        lp[:p.lp_dim] = c.lp / nrm
        lp[p.lp_dim + i] = 1.0
        lp[p.lp_dim + k + i] = -1.0
        cons.append(Constraint(c.A / nrm, c.b / nrm, lp))
    cost = np.zeros(nl)
    cost[p.lp_dim:] = 1.0
    aux = SdpProblem(p.n, np.zeros((p.n, p.n)), cons, p.trace_bound, nl, cost)
    sol = solve(aux, "min", opts)
    measure = float(sol.primal_obj)
    if sol.status != Status.OPTIMAL:
        log.info("phase I ended with status %s (measure %.3g)", sol.status.value, measure)
    if measure <= opts.infeas_margin:
        return Feasible(sol.X, measure)
    return LikelyInfeasible(measure, sol.status)
