"""Newton iterations on the stationary equations.

Two modes share one loop:

* fixed budget: the working set is refreshed from z = Ax - b + tau*lam at a
  constant budget s each iteration, full steps, no line search;
* tuned budget: s starts at a fraction of the initial positive count and
  shrinks geometrically until at most ceil(rho3 * m) violations remain.

Steps are always the plain Newton update w + d. The only recovery mechanism
is diagonal damping of the linear systems when a factorization reports
singularity.
"""

from __future__ import annotations

import io
import json
import math
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.sparse as sp

from .errors import DirectionFailure, Singular, SingularKKT
from .heaviside import HeavisideBudget, partition, positive_count
from .linalg import solve_kkt, solve_spd
from .model import Problem
from .stationarity import Iterate, residual

# Damped retries of a failed direction solve before giving up.
MAX_DIRECTION_RETRIES = 6


class Termination(str, Enum):
    RESIDUAL_MET = "residual_met"
    MAX_ITERATIONS = "max_iterations"
    DIRECTION_FAILURE = "direction_failure"


def iceil(v: float) -> int:
    """Ceiling that forgives float noise just below an integer."""
    return int(math.ceil(v - 1e-12 * max(1.0, abs(v))))


@dataclass
class SolverConfig:
    """Iteration limits, tolerances, and schedules.

    The stopping threshold is ``tol_scale * sqrt(n)``. ``tau`` follows
    ``tau0 / tau_decay ** (k // tau_decay_period)``; set ``tau_decay = 1``
    for a fixed tau. ``fixed_s`` switches to the fixed-budget mode.
    """

    max_iterations: int = 1000
    tol_scale: float = 1e-6
    tau0: float = 0.5
    tau_decay: float = 1.1
    tau_decay_period: int = 10
    rho0: float = 0.5
    rho1: float = 0.5
    rho2: float = 0.5
    rho3: float = 0.001
    damping0: float = 1e-8
    fixed_s: int | None = None

    def __post_init__(self):
        for name in ("rho0", "rho1", "rho2", "rho3"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if self.tau0 <= 0:
            raise ValueError("tau0 must be positive")
        if self.tau_decay < 1.0:
            raise ValueError("tau_decay must be at least 1")
        if self.tau_decay_period < 1:
            raise ValueError("tau_decay_period must be at least 1")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be nonnegative")
        if self.tol_scale <= 0:
            raise ValueError("tol_scale must be positive")
        if self.damping0 <= 0:
            raise ValueError("damping0 must be positive")

    def tau_at(self, k: int) -> float:
        return self.tau0 / self.tau_decay ** (k // self.tau_decay_period)


@dataclass
class IterationRecord:
    iteration: int
    residual: float
    s: int
    tau: float
    working_set_size: int
    positive_count: int
    zero_count: int


@dataclass
class SolveReport:
    """Final iterate, per-iteration trace, and the reason the loop stopped."""

    x: np.ndarray
    lam: np.ndarray
    iterations: int
    final_residual: float
    final_s: int
    termination: Termination
    trace: list[IterationRecord] = field(default_factory=list)
    wall_time: float = 0.0

    def to_dict(self, include_solution: bool = True, include_timing: bool = True) -> dict:
        out = {
            "iterations": int(self.iterations),
            "final_residual": float(self.final_residual),
            "final_s": int(self.final_s),
            "termination": self.termination.value,
            "trace": [
                {
                    "iter": r.iteration,
                    "residual": float(r.residual),
                    "s": int(r.s),
                    "tau": float(r.tau),
                    "T_size": int(r.working_set_size),
                }
                for r in self.trace
            ],
        }
        if include_solution:
            out["x"] = [float(v) for v in self.x]
            out["lambda"] = [float(v) for v in self.lam]
        if include_timing:
            out["wall_time"] = float(self.wall_time)
        return out

    def to_json(self, indent: int = 2, **kwargs) -> str:
        return json.dumps(self.to_dict(**kwargs), indent=indent, sort_keys=True)

    def trace_csv(self) -> str:
        buf = io.StringIO()
        buf.write("iter,residual,s_k,tau_k,T_size\n")
        for r in self.trace:
            buf.write(f"{r.iteration},{r.residual:.16e},{r.s},{r.tau:.16e},{r.working_set_size}\n")
        return buf.getvalue()


def _dense_rows(A, T: np.ndarray) -> np.ndarray:
    rows = A[T]
    return rows.toarray() if sp.issparse(rows) else np.asarray(rows, dtype=float)


def _direction_diagonal(theta, A_T, g_x, g_T, damping):
    """Block elimination of the saddle system when the Hessian is diagonal.

    Solves A_T diag(1/theta) A_T^T v_T = g_T - A_T diag(1/theta) g_x, then
    back-substitutes u. ``damping`` is added to the Schur diagonal only; the
    caller damps theta itself.
    """
    inv_theta = 1.0 / theta
    if A_T is None:
        return -inv_theta * g_x, np.zeros(0)
    if sp.issparse(A_T):
        scaled = A_T.multiply(inv_theta[None, :]).tocsr()
        S = (scaled @ A_T.T).toarray()
        rhs = g_T - scaled @ g_x
    else:
        scaled = A_T * inv_theta[None, :]
        S = scaled @ A_T.T
        rhs = g_T - scaled @ g_x
    S = 0.5 * (S + S.T)
    if damping:
        S[np.diag_indices_from(S)] += damping
    v_T = solve_spd(S, rhs)
    u = -inv_theta * (g_x + A_T.T @ v_T)
    return u, v_T


def newton_direction(
    problem: Problem,
    w: Iterate,
    T,
    damping0: float = 1e-8,
) -> tuple[np.ndarray, np.ndarray]:
    """Direction (u, v) with jacobian(w; T) @ (u; v) = -residual(w; T).

    The curvature block comes from the objective's ``newton_diagonal`` (equal
    to the exact Hessian for every objective that does not override it).
    Block elimination is used when that diagonal is invertible (all |entries|
    at or above the damping floor), otherwise a dense saddle solve on the
    (n + |T|) system. A singular system is retried with damping0,
    10*damping0, ... added to the curvature diagonal and the Schur
    complement, at most six times.
    """
    m, n = problem.m, problem.n
    T = np.asarray(T, dtype=int)
    mask = np.ones(m, dtype=bool)
    mask[T] = False
    rest = np.flatnonzero(mask)

    grad = problem.objective.gradient(w.x)
    obj = problem.objective
    if T.size:
        A_T = problem.A[T]
        g_x = grad + A_T.T @ w.lam[T]
        g_T = A_T @ w.x - problem.b[T]
    else:
        A_T = None
        g_x = grad
        g_T = np.zeros(0)

    theta = obj.newton_diagonal(w.x) if obj.hessian_is_diagonal else None
    diagonal_ok = theta is not None and float(np.min(np.abs(theta))) >= damping0

    damping = 0.0
    for attempt in range(MAX_DIRECTION_RETRIES + 1):
        try:
            if diagonal_ok:
                u, v_T = _direction_diagonal(
                    theta + damping if damping else theta, A_T, g_x, g_T, damping
                )
            else:
                H = np.diag(theta) if theta is not None else obj.hessian(w.x)
                if damping:
                    H = H + damping * np.eye(n)
                B = _dense_rows(problem.A, T) if T.size else np.zeros((0, n))
                u, v_T = solve_kkt(H, B, -g_x, -g_T)
            break
        except (Singular, SingularKKT):
            damping = damping0 if damping == 0.0 else 10.0 * damping
    else:
        raise DirectionFailure(
            f"direction solve still singular after {MAX_DIRECTION_RETRIES} damping retries"
        )

    v = np.empty(m)
    v[T] = v_T
    v[rest] = -w.lam[rest]
    return u, v


def _run(problem: Problem, w0: Iterate, config: SolverConfig, tune_s: bool) -> SolveReport:
    m, n = problem.m, problem.n
    if w0.x.size != n or w0.lam.size != m:
        raise ValueError("starting point does not match problem dimensions")
    tol = config.tol_scale * math.sqrt(n)
    s_floor = max(1, iceil(config.rho3 * m))

    x = w0.x.astype(float, copy=True)
    lam = w0.lam.astype(float, copy=True)
    tau = config.tau_at(0)
    start = time.perf_counter()

    z = problem.constraint_values(x) + tau * lam
    if tune_s:
        s = min(max(1, iceil(config.rho0 * positive_count(z))), m - 1)
    else:
        s = config.fixed_s
        if s is None or not 1 <= s < m:
            raise ValueError(f"fixed_s must lie in [1, {m}), got {s}")
    part = partition(z, HeavisideBudget(m, s))

    trace: list[IterationRecord] = []
    termination = Termination.MAX_ITERATIONS
    res = math.inf
    k = 0
    for k in range(config.max_iterations + 1):
        T = part.working_set
        w = Iterate(x, lam, tau)
        res = float(np.linalg.norm(residual(problem, w, T)))
        trace.append(
            IterationRecord(
                iteration=k,
                residual=res,
                s=s,
                tau=tau,
                working_set_size=T.size,
                positive_count=part.gamma_plus.size,
                zero_count=part.gamma_zero.size,
            )
        )
        if res <= tol and (not tune_s or s <= s_floor):
            termination = Termination.RESIDUAL_MET
            break
        if k == config.max_iterations:
            termination = Termination.MAX_ITERATIONS
            break

        try:
            u, v = newton_direction(problem, w, T, damping0=config.damping0)
        except DirectionFailure:
            termination = Termination.DIRECTION_FAILURE
            break

        x = x + u
        lam = lam + v
        if tune_s:
            s = min(iceil(config.rho1 * s), iceil(config.rho2 * part.gamma_plus.size))
            s = min(max(1, s), m - 1)
        tau = config.tau_at(k + 1)
        z = problem.constraint_values(x) + tau * lam
        part = partition(z, HeavisideBudget(m, s))

    return SolveReport(
        x=x,
        lam=lam,
        iterations=k,
        final_residual=res,
        final_s=s,
        termination=termination,
        trace=trace,
        wall_time=time.perf_counter() - start,
    )


def nhs_solve(problem: Problem, w0: Iterate, config: SolverConfig) -> SolveReport:
    """Newton iteration at the fixed budget ``config.fixed_s``.

    Stops when the stationary residual drops to tol_scale * sqrt(n) or the
    iteration limit is hit. The initial tau comes from the config schedule,
    not from w0.
    """
    return _run(problem, w0, config, tune_s=False)


def nhst_solve(problem: Problem, w0: Iterate, config: SolverConfig) -> SolveReport:
    """Newton iteration with the shrinking budget schedule.

    Starts at s0 = ceil(rho0 * |positives of z0|) and updates
    s_{k+1} = min(ceil(rho1 * s_k), ceil(rho2 * |positives of z_k|)),
    clamped into [1, m-1]. Stops once the residual is below tolerance and
    s has reached ceil(rho3 * m), or at the iteration limit.
    """
    return _run(problem, w0, config, tune_s=True)
