"""Problem container and the built-in smooth objectives.

A problem bundles a smooth objective f, a constraint matrix A (dense or CSR),
an offset b, and the positivity budget: minimize f(x) subject to at most s
positive entries in Ax - b.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import BadLabel, DimensionMismatch, MissingBiasColumn
from .heaviside import HeavisideBudget
from .linalg import as_vector, to_csr


class Objective(ABC):
    """Smooth function exposing value, gradient, and Hessian.

    Objectives with a diagonal Hessian set ``hessian_is_diagonal`` and
    implement ``hessian_diagonal``; the solver then uses the reduced
    block-elimination path for the Newton systems.
    """

    n: int
    hessian_is_diagonal: bool = False

    @abstractmethod
    def value(self, x: np.ndarray) -> float: ...

    @abstractmethod
    def gradient(self, x: np.ndarray) -> np.ndarray: ...

    def hessian(self, x: np.ndarray) -> np.ndarray:
        if self.hessian_is_diagonal:
            return np.diag(self.hessian_diagonal(x))
        raise NotImplementedError

    def hessian_diagonal(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def newton_diagonal(self, x: np.ndarray) -> np.ndarray:
        """Diagonal curvature model used inside the Newton systems.

        Defaults to the exact Hessian diagonal. Objectives whose exact
        curvature turns negative may override this with a positive surrogate
        to keep the iteration stable; reports and Jacobians always use the
        exact Hessian.
        """
        return self.hessian_diagonal(x)

    def _check(self, x) -> np.ndarray:
        x = as_vector(x, "x")
        if x.size != self.n:
            raise DimensionMismatch(f"x has length {x.size}, objective expects {self.n}")
        return x


class SvmObjective(Objective):
    """f(x) = ||Dx||^2 with D = diag(1, ..., 1, d_last).

    The shrunken last diagonal entry corresponds to the bias feature; any
    d_last > 0 keeps the (constant) Hessian positive definite.
    """

    hessian_is_diagonal = True

    def __init__(self, n: int, d_last: float = 1e-4):
        if n < 1:
            raise ValueError("n must be at least 1")
        if d_last <= 0:
            raise ValueError("d_last must be positive")
        self.n = int(n)
        self.d_last = float(d_last)
        self._dsq = np.ones(self.n)
        self._dsq[-1] = self.d_last**2

    def value(self, x):
        x = self._check(x)
        return float(np.dot(self._dsq * x, x))

    def gradient(self, x):
        x = self._check(x)
        return 2.0 * self._dsq * x

    def hessian_diagonal(self, x):
        self._check(x)
        return 2.0 * self._dsq


class SmoothedLqObjective(Objective):
    """Smoothed l_q sparsity surrogate with a ridge term.

    f(x) = sum_i (x_i^2 + eps_smooth)^(q/2) + eta * ||x||^2, for 0 < q < 1
    and eps_smooth > 0. The Hessian is diagonal with entries
    q * (x_i^2 + eps)^(q/2 - 2) * ((q - 1) x_i^2 + eps) + 2 * eta, which can
    be negative for mid-sized x_i; the Newton solver tolerates that.
    """

    hessian_is_diagonal = True

    def __init__(self, n: int, q: float = 0.9, eps_smooth: float | None = None, eta: float = 0.07):
        if n < 1:
            raise ValueError("n must be at least 1")
        if not 0 < q < 1:
            raise ValueError("q must lie in (0, 1)")
        if eps_smooth is None:
            eps_smooth = 1.0 / n
        if eps_smooth <= 0:
            raise ValueError("eps_smooth must be positive")
        if eta < 0:
            raise ValueError("eta must be nonnegative")
        self.n = int(n)
        self.q = float(q)
        self.eps_smooth = float(eps_smooth)
        self.eta = float(eta)

    def value(self, x):
        x = self._check(x)
        base = np.power(x * x + self.eps_smooth, self.q / 2.0).sum()
        return float(base + self.eta * np.dot(x, x))

    def gradient(self, x):
        x = self._check(x)
        core = self.q * x * np.power(x * x + self.eps_smooth, self.q / 2.0 - 1.0)
        return core + 2.0 * self.eta * x

    def hessian_diagonal(self, x):
        x = self._check(x)
        xx = x * x
        core = self.q * np.power(xx + self.eps_smooth, self.q / 2.0 - 2.0)
        return core * ((self.q - 1.0) * xx + self.eps_smooth) + 2.0 * self.eta

    def newton_diagonal(self, x):
        """Positive gradient-factor weights: gradient(x) = newton_diagonal(x) * x.

        The exact curvature is negative wherever x_i^2 > eps_smooth / (1 - q),
        which makes raw Newton steps diverge from generic starting points; the
        gradient factor q (x_i^2 + eps)^(q/2 - 1) + 2 eta is the standard
        positive model for this penalty family and agrees with the exact
        Hessian at x = 0.
        """
        x = self._check(x)
        return self.q * np.power(x * x + self.eps_smooth, self.q / 2.0 - 1.0) + 2.0 * self.eta


class QuadraticObjective(Objective):
    """f(x) = 0.5 x^T Q x + c^T x for a symmetric Q. Used for hand instances."""

    def __init__(self, Q: np.ndarray, c: np.ndarray):
        Q = np.asarray(Q, dtype=float)
        c = as_vector(c, "c")
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or Q.shape[0] != c.size:
            raise DimensionMismatch("Q must be square and match c")
        self.Q = 0.5 * (Q + Q.T)
        self.c = c
        self.n = c.size

    def value(self, x):
        x = self._check(x)
        return float(0.5 * x @ self.Q @ x + self.c @ x)

    def gradient(self, x):
        x = self._check(x)
        return self.Q @ x + self.c

    def hessian(self, x):
        self._check(x)
        return self.Q.copy()


@dataclass
class Problem:
    """Full instance: objective, constraint matrix A, offset b, budget."""

    objective: Objective
    A: "np.ndarray | sp.csr_matrix"
    b: np.ndarray
    budget: HeavisideBudget
    note: str = field(default="", compare=False)

    def __post_init__(self):
        self.b = as_vector(self.b, "b")
        if self.A.ndim != 2:
            raise DimensionMismatch("A must be two-dimensional")
        m, n = self.A.shape
        if self.b.size != m:
            raise DimensionMismatch(f"b has length {self.b.size}, A has {m} rows")
        if self.objective.n != n:
            raise DimensionMismatch(f"objective dimension {self.objective.n} != {n} columns of A")
        if self.budget.m != m:
            raise DimensionMismatch(f"budget dimension {self.budget.m} != {m} rows of A")

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def constraint_values(self, x: np.ndarray) -> np.ndarray:
        """Ax - b."""
        return self.A @ x - self.b


def signed_design(samples, labels) -> "np.ndarray | sp.csr_matrix":
    """Row-wise sign flip: row i of the result is -labels[i] * samples[i]."""
    labels = as_vector(labels, "labels")
    if np.any(np.abs(labels) != 1.0):
        raise BadLabel("labels must all be +1 or -1")
    if sp.issparse(samples):
        A0 = to_csr(samples)
        if A0.shape[0] != labels.size:
            raise DimensionMismatch("label count differs from sample count")
        return to_csr(sp.diags(-labels) @ A0)
    A0 = np.asarray(samples, dtype=float)
    if A0.ndim != 2 or A0.shape[0] != labels.size:
        raise DimensionMismatch("label count differs from sample count")
    return -labels[:, None] * A0


def _bias_column(samples) -> np.ndarray:
    if sp.issparse(samples):
        return np.asarray(samples[:, -1].todense()).ravel()
    return np.asarray(samples[:, -1], dtype=float)


def build_svm_problem(samples, labels, s: int, d_last: float = 1e-4) -> Problem:
    """Classification instance: minimize ||Dx||^2 with at most s samples
    violating the unit margin.

    ``samples`` must already carry the constant-one bias feature in the last
    column (the data loader appends it). Constraint rows are
    -labels[i] * samples[i] with offset -1, so a violation means
    labels[i] * <samples[i], x> < 1.
    """
    A = signed_design(samples, labels)
    m, n = A.shape
    bias = _bias_column(samples)
    if not np.allclose(bias, 1.0, rtol=0.0, atol=1e-12):
        raise MissingBiasColumn("last feature column must be identically 1")
    return Problem(
        objective=SvmObjective(n, d_last),
        A=A,
        b=-np.ones(m),
        budget=HeavisideBudget(m, s),
        note="svm",
    )


def build_cs_problem(
    measurements,
    signs,
    s: int,
    epsilon: float = 1e-3,
    q: float = 0.9,
    eps_smooth: float | None = None,
    eta: float = 0.07,
) -> Problem:
    """One-bit recovery instance: smoothed l_q + ridge objective, with at
    most s sign constraints <signs[i] * measurements[i], x> >= -epsilon
    violated. ``epsilon > 0`` rules out the zero solution.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    A = signed_design(measurements, signs)
    m, n = A.shape
    return Problem(
        objective=SmoothedLqObjective(n, q=q, eps_smooth=eps_smooth, eta=eta),
        A=A,
        b=-epsilon * np.ones(m),
        budget=HeavisideBudget(m, s),
        note="cs1bit",
    )


def evaluate(objective: Objective, x) -> tuple[float, np.ndarray, np.ndarray]:
    """Value, gradient, and Hessian at x.

    The Hessian comes back as a 1-d diagonal when the objective declares one,
    otherwise as a dense matrix.
    """
    val = objective.value(x)
    grad = objective.gradient(x)
    hess = objective.hessian_diagonal(x) if objective.hessian_is_diagonal else objective.hessian(x)
    return val, grad, hess
