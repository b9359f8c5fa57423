"""Shared instance builders for the solver and stationarity tests."""

import numpy as np
import pytest

from hsco import HeavisideBudget, Problem, QuadraticObjective
from hsco.model import Objective
from hsco.stationarity import Iterate


class SmoothConvexObjective(Objective):
    """Strongly convex non-quadratic test function.

    f(x) = 0.5 x^T Q x + c^T x + alpha * sum(log(1 + exp(x_i))), Q positive
    definite. The softplus term keeps the Hessian genuinely x-dependent so
    local rate checks exercise the full Newton behavior.
    """

    def __init__(self, Q, c, alpha=1.0):
        self.Q = np.asarray(Q, dtype=float)
        self.c = np.asarray(c, dtype=float)
        self.alpha = float(alpha)
        self.n = self.c.size

    def _sigma(self, x):
        return 1.0 / (1.0 + np.exp(-x))

    def value(self, x):
        softplus = np.logaddexp(0.0, x).sum()
        return float(0.5 * x @ self.Q @ x + self.c @ x + self.alpha * softplus)

    def gradient(self, x):
        return self.Q @ x + self.c + self.alpha * self._sigma(x)

    def hessian(self, x):
        s = self._sigma(x)
        return self.Q + self.alpha * np.diag(s * (1.0 - s))


def random_spd(rng, n, cond_boost=1.0):
    G = rng.standard_normal((n, n))
    return G @ G.T + cond_boost * n * np.eye(n)


def make_stationary_instance(seed, n=12, m=8, s=2, active=3, tau=0.5, smooth=False):
    """Construct (problem, w_star) with w_star an exact stationary pair.

    The active rows sit at equality, exactly s rows are strictly violated
    with values >= 0.5, the rest have slack <= -0.5, and the active
    multipliers live in the interior of their admissible interval, so the
    canonical working set of the shifted vector equals the active set and
    small perturbations do not change it.
    """
    rng = np.random.default_rng(seed)
    assert active + s <= m and m <= n
    A = rng.standard_normal((m, n))
    x_star = rng.standard_normal(n)

    y = np.zeros(m)
    rest = np.arange(active, m)
    signs = np.concatenate([np.ones(s), -np.ones(rest.size - s)])
    rng.shuffle(signs)
    y[rest] = signs * rng.uniform(0.5, 1.5, size=rest.size)
    b = A @ x_star - y

    y_s = np.sort(y[y > 0])[::-1][s - 1]
    lam = np.zeros(m)
    lam[:active] = rng.uniform(0.3, 0.7, size=active) * y_s / tau

    Q = random_spd(rng, n)
    grad_target = -(A[:active].T @ lam[:active])
    if smooth:
        alpha = 1.0
        sig = 1.0 / (1.0 + np.exp(-x_star))
        c = grad_target - Q @ x_star - alpha * sig
        objective = SmoothConvexObjective(Q, c, alpha)
    else:
        c = grad_target - Q @ x_star
        objective = QuadraticObjective(Q, c)

    problem = Problem(objective, A, b, HeavisideBudget(m, s))
    w_star = Iterate(x=x_star, lam=lam, tau=tau)
    return problem, w_star


@pytest.fixture
def hand_problem():
    """f(x) = 0.5 ||x - (1,1)||^2 with identity constraints and budget 1."""
    objective = QuadraticObjective(np.eye(2), -np.ones(2))
    return Problem(objective, np.eye(2), np.zeros(2), HeavisideBudget(2, 1))
