"""Stationary-equation residual, its Jacobian, and point classification.

The residual for a working set T stacks

    [ grad f(x) + A_T^T lam_T ;  A_T x - b_T ;  lam_{T complement} ]

in the variable ordering (x; lam_T; lam_rest). A primal-dual pair is
tau-stationary exactly when some working set of z = Ax - b + tau*lam zeroes
this residual.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import DimensionMismatch, RankDeficientActiveSet
from .heaviside import (
    HeavisideBudget,
    default_zero_tol,
    fixed_point_check,
    normal_cone_contains,
    partition,
    sth_largest_positive,
)
from .linalg import as_vector, row_rank
from .model import Problem

# Beyond this active-set size the subset enumeration inside diagnostics is
# skipped (2^|J| singular value problems).
SUBSET_ENUMERATION_LIMIT = 12


@dataclass
class Iterate:
    """Primal-dual pair (x; lam) together with the parameter tau > 0."""

    x: np.ndarray
    lam: np.ndarray
    tau: float

    def __post_init__(self):
        self.x = as_vector(self.x, "x")
        self.lam = as_vector(self.lam, "lam")
        if self.tau <= 0:
            raise ValueError("tau must be positive")

    def shifted(self, problem: Problem) -> np.ndarray:
        """z = Ax - b + tau * lam."""
        return problem.constraint_values(self.x) + self.tau * self.lam


@dataclass
class StationarityReport:
    residual_norm: float
    gradient_residual: float
    is_tau_stationary: bool
    is_kkt: bool
    active_set: np.ndarray
    tau: float
    zero_tol: float
    active_zero_tol: float
    tau_star: float | None = None
    tau_star_grad: float | None = None
    sigma_min_hj: float | None = None
    sigma_min_hj_subsets: float | None = None
    jacobian_norm_bound: float | None = None
    jacobian_inverse_bound: float | None = None
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        def num(v):
            if v is None:
                return None
            v = float(v)
            return "inf" if math.isinf(v) else v

        return {
            "residual_norm": num(self.residual_norm),
            "gradient_residual": num(self.gradient_residual),
            "is_tau_stationary": self.is_tau_stationary,
            "is_kkt": self.is_kkt,
            "active_set": [int(i) for i in self.active_set],
            "tau": num(self.tau),
            "zero_tol": num(self.zero_tol),
            "active_zero_tol": num(self.active_zero_tol),
            "tau_star": num(self.tau_star),
            "tau_star_grad": num(self.tau_star_grad),
            "sigma_min_hj": num(self.sigma_min_hj),
            "sigma_min_hj_subsets": num(self.sigma_min_hj_subsets),
            "jacobian_norm_bound": num(self.jacobian_norm_bound),
            "jacobian_inverse_bound": num(self.jacobian_inverse_bound),
            "notes": list(self.notes),
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


def _check_working_set(T, m: int) -> np.ndarray:
    T = np.asarray(T, dtype=int)
    if T.ndim != 1:
        raise DimensionMismatch("working set must be a flat index array")
    if T.size and (T.min() < 0 or T.max() >= m):
        raise DimensionMismatch(f"working set indices must lie in [0, {m})")
    if np.unique(T).size != T.size:
        raise DimensionMismatch("working set contains duplicate indices")
    return T


def _complement(T: np.ndarray, m: int) -> np.ndarray:
    mask = np.ones(m, dtype=bool)
    mask[T] = False
    return np.flatnonzero(mask)


def residual(problem: Problem, w: Iterate, T) -> np.ndarray:
    """Stationary-equation residual of length n + m for the working set T."""
    m, n = problem.m, problem.n
    if w.x.size != n or w.lam.size != m:
        raise DimensionMismatch("iterate does not match problem dimensions")
    T = _check_working_set(T, m)
    rest = _complement(T, m)
    grad = problem.objective.gradient(w.x)
    A_T = problem.A[T]
    top = grad + A_T.T @ w.lam[T] if T.size else grad
    mid = A_T @ w.x - problem.b[T] if T.size else np.zeros(0)
    return np.concatenate([top, mid, w.lam[rest]])


def jacobian(problem: Problem, w: Iterate, T) -> np.ndarray:
    """Dense Jacobian of the residual at fixed T, ordered (x; lam_T; lam_rest).

    Block form [[hess f, A_T^T, 0], [A_T, 0, 0], [0, 0, I]].
    """
    m, n = problem.m, problem.n
    T = _check_working_set(T, m)
    rest = _complement(T, m)
    t = T.size
    J = np.zeros((n + m, n + m))
    J[:n, :n] = problem.objective.hessian(w.x)
    if t:
        A_T = problem.A[T]
        A_T = A_T.toarray() if sp.issparse(A_T) else np.asarray(A_T, dtype=float)
        J[:n, n : n + t] = A_T.T
        J[n : n + t, :n] = A_T
    J[n + t :, n + t :] = np.eye(rest.size)
    return J


def canonical_working_set(problem: Problem, w: Iterate) -> np.ndarray:
    """Canonical working set of the shifted vector z = Ax - b + tau*lam."""
    return partition(w.shifted(problem), problem.budget).working_set


def verify_stationary(problem: Problem, w: Iterate, zero_tol: float = 1e-8) -> StationarityReport:
    """Classify a point: tau-stationarity and the KKT conditions.

    ``zero_tol`` scales the gradient test; index classification uses the
    scale-relative threshold of the constraint values.
    """
    y = problem.constraint_values(w.x)
    grad = problem.objective.gradient(w.x)
    grad_res = float(np.linalg.norm(grad + problem.A.T @ w.lam))
    grad_ok = grad_res <= zero_tol * (1.0 + np.linalg.norm(grad))

    budget = problem.budget
    zeta = default_zero_tol(y)
    active = np.flatnonzero(np.abs(y) <= zeta)
    violations = int(np.count_nonzero(y > zeta))

    is_tau = grad_ok and fixed_point_check(y, w.lam, w.tau, budget)
    is_kkt = (
        grad_ok
        and violations <= budget.s
        and normal_cone_contains(y, w.lam, budget)
    )
    T = canonical_working_set(problem, w)
    res_norm = float(np.linalg.norm(residual(problem, w, T)))
    return StationarityReport(
        residual_norm=res_norm,
        gradient_residual=grad_res,
        is_tau_stationary=bool(is_tau),
        is_kkt=bool(is_kkt),
        active_set=active,
        tau=float(w.tau),
        zero_tol=float(zero_tol),
        active_zero_tol=float(zeta),
    )


def feasibility_rank_check(A, s: int, tol: float = 1e-10) -> bool:
    """Whether some full-row-rank row subset of size >= m - s exists.

    A rank-r matrix contains r independent rows, so this reduces to
    rank(A) >= m - s, which guarantees a nonempty feasible set.
    """
    m = A.shape[0]
    if s >= m:
        return True
    A_dense = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
    if A_dense.size == 0:
        return m - s <= 0
    return row_rank(A_dense, tol) >= m - s


def _hessian_block(problem: Problem, w: Iterate, J: np.ndarray) -> np.ndarray:
    """H(J) = [[hess f, A_J^T], [A_J, 0]]."""
    n = problem.n
    t = J.size
    H = np.zeros((n + t, n + t))
    H[:n, :n] = problem.objective.hessian(w.x)
    if t:
        A_J = problem.A[J]
        A_J = A_J.toarray() if sp.issparse(A_J) else np.asarray(A_J, dtype=float)
        H[:n, n:] = A_J.T
        H[n:, :n] = A_J
    return H


def diagnostics(problem: Problem, w: Iterate, zero_tol: float = 1e-8) -> StationarityReport:
    """verify_stationary plus the conditioning constants at the active set.

    Adds the largest tau compatible with stationarity (from the multipliers,
    and from the projected gradient), the smallest singular value of the
    bordered Hessian at the active set, and norm bounds for the Newton
    Jacobian. The subset minimum is enumerated only for |active set| <= 12.
    """
    report = verify_stationary(problem, w, zero_tol)
    J = report.active_set
    y = problem.constraint_values(w.x)

    if J.size:
        A_J = problem.A[J]
        A_J = A_J.toarray() if sp.issparse(A_J) else np.asarray(A_J, dtype=float)
        if row_rank(A_J) < J.size:
            raise RankDeficientActiveSet(
                f"active rows are rank deficient ({J.size} rows)"
            )
    else:
        A_J = np.zeros((0, problem.n))

    y_clean = np.where(np.abs(y) <= report.active_zero_tol, 0.0, y)
    y_s = sth_largest_positive(y_clean, problem.budget.s)
    lam_peak = float(w.lam.max(initial=0.0))
    lam_tol = default_zero_tol(w.lam)
    if np.max(np.abs(w.lam), initial=0.0) <= lam_tol:
        report.tau_star = math.inf
    else:
        report.tau_star = y_s / lam_peak if lam_peak > lam_tol else math.inf

    grad = problem.objective.gradient(w.x)
    if J.size:
        pi_grad = scipy.linalg.solve(A_J @ A_J.T, A_J @ grad, assume_a="pos")
        denom = float(np.max(np.abs(pi_grad)))
        report.tau_star_grad = y_s / denom if denom > zero_tol else math.inf
    else:
        report.tau_star_grad = math.inf

    H_J = _hessian_block(problem, w, J)
    svals = scipy.linalg.svdvals(H_J)
    report.sigma_min_hj = float(svals[-1])
    report.jacobian_norm_bound = 2.0 * max(float(svals[0]), 1.0)

    if J.size <= SUBSET_ENUMERATION_LIMIT:
        smallest = math.inf
        for mask in range(2 ** J.size):
            sub = J[[bool(mask >> i & 1) for i in range(J.size)]]
            smallest = min(smallest, float(scipy.linalg.svdvals(_hessian_block(problem, w, sub))[-1]))
        report.sigma_min_hj_subsets = smallest
        report.jacobian_inverse_bound = 2.0 / min(smallest, 1.0)
    else:
        report.notes.append(
            f"subset enumeration skipped: active set has {J.size} > "
            f"{SUBSET_ENUMERATION_LIMIT} rows"
        )
    return report
