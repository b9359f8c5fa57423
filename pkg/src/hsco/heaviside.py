"""Set machinery for S = {z : at most s entries of z are positive}.

Conventions used throughout the package:

* ``sgn(0) = -1``, so the step function ``(sgn(t)+1)/2`` counts strictly
  positive entries only.
* Zero classification is tolerance-based: an entry counts as zero when its
  magnitude is at most ``zero_tol``, which defaults to the scale-relative
  value ``1e-10 * (1 + max|z_i|)``.
* The family of working sets for (z, s) is set-valued under ties; the
  canonical member sorts positive entries by value descending and breaks
  ties by smaller index, so solver runs are reproducible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InfeasiblePoint, NonPositiveTau
from .linalg import as_vector

# Enumeration of all working sets is combinatorial; cap it at test scale.
ENUMERATION_LIMIT = 20


def sign_pm1(v) -> np.ndarray:
    """Entrywise sign in {-1, +1} with sign(0) = -1."""
    return np.where(np.asarray(v, dtype=float) > 0, 1.0, -1.0)


def default_zero_tol(v: np.ndarray) -> float:
    """Scale-relative zero threshold 1e-10 * (1 + max|v_i|)."""
    peak = float(np.max(np.abs(v))) if np.asarray(v).size else 0.0
    return 1e-10 * (1.0 + peak)


@dataclass(frozen=True)
class HeavisideBudget:
    """Ambient dimension m and the cap s on positive entries, 1 <= s < m."""

    m: int
    s: int

    def __post_init__(self):
        if not (isinstance(self.m, (int, np.integer)) and isinstance(self.s, (int, np.integer))):
            raise TypeError("m and s must be integers")
        if not 1 <= self.s < self.m:
            raise ValueError(f"need 1 <= s < m, got s={self.s}, m={self.m}")


@dataclass(frozen=True)
class IndexPartition:
    """Sign classes of a vector plus the canonical working set.

    ``gamma_plus`` / ``gamma_zero`` / ``gamma_minus`` partition {0..m-1} by the
    sign of z_i under ``zero_tol``. ``gamma_s`` holds the indices of the
    min(s, |gamma_plus|) largest positive entries; ``working_set`` is
    (gamma_plus \\ gamma_s) union gamma_zero. All index arrays are sorted.
    """

    gamma_plus: np.ndarray
    gamma_zero: np.ndarray
    gamma_minus: np.ndarray
    gamma_s: np.ndarray
    working_set: np.ndarray
    zero_tol: float

    @property
    def complement(self) -> np.ndarray:
        """Indices outside the working set: gamma_s union gamma_minus."""
        return np.sort(np.concatenate([self.gamma_s, self.gamma_minus]))


def partition(z, budget: HeavisideBudget, zero_tol: float | None = None) -> IndexPartition:
    """Classify z and pick the canonical working set for the given budget.

    Positive entries are ranked by value descending with ties broken by
    smaller index entering gamma_s first.
    """
    z = as_vector(z, "z")
    if z.size != budget.m:
        raise DimensionMismatch(f"z has length {z.size}, budget expects {budget.m}")
    if zero_tol is None:
        zero_tol = default_zero_tol(z)
    if zero_tol < 0:
        raise ValueError("zero_tol must be nonnegative")

    zero_mask = np.abs(z) <= zero_tol
    plus = np.flatnonzero(~zero_mask & (z > 0))
    minus = np.flatnonzero(~zero_mask & (z < 0))
    zero = np.flatnonzero(zero_mask)

    k = min(budget.s, plus.size)
    # Stable sort on descending value; equal values keep ascending index order.
    order = np.argsort(-z[plus], kind="stable")
    gamma_s = np.sort(plus[order[:k]])
    leftover = plus[order[k:]]
    working = np.sort(np.concatenate([leftover, zero]))
    return IndexPartition(
        gamma_plus=plus,
        gamma_zero=zero,
        gamma_minus=minus,
        gamma_s=gamma_s,
        working_set=working,
        zero_tol=float(zero_tol),
    )


def positive_count(z, zero_tol: float | None = None) -> int:
    """Number of entries strictly above the zero threshold."""
    z = as_vector(z, "z")
    if zero_tol is None:
        zero_tol = default_zero_tol(z)
    return int(np.count_nonzero(z > zero_tol))


def sth_largest_positive(z, s: int) -> float:
    """The s-th largest entry of the clipped vector max(z, 0).

    Zero when fewer than s entries are positive, strictly positive otherwise.
    """
    z = as_vector(z, "z")
    if not 1 <= s <= z.size:
        raise ValueError(f"need 1 <= s <= {z.size}, got s={s}")
    clipped = np.maximum(z, 0.0)
    return float(np.partition(clipped, z.size - s)[z.size - s])


def project(z, budget: HeavisideBudget, zero_tol: float | None = None) -> np.ndarray:
    """Canonical nearest point of S: zero on the working set, z elsewhere."""
    part = partition(z, budget, zero_tol)
    out = np.asarray(z, dtype=float).copy()
    out[part.working_set] = 0.0
    return out


def enumerate_working_sets(z, budget: HeavisideBudget, zero_tol: float | None = None) -> list[np.ndarray]:
    """All working sets for (z, s), enumerating tie permutations exactly.

    Exponential in the number of tied entries; restricted to m <= 20.
    """
    z = as_vector(z, "z")
    if z.size > ENUMERATION_LIMIT:
        raise ValueError(f"enumeration is limited to m <= {ENUMERATION_LIMIT}")
    part = partition(z, budget, zero_tol)
    plus, zero = part.gamma_plus, part.gamma_zero
    if plus.size <= budget.s:
        return [zero.copy()]
    values = z[plus]
    cutoff = np.sort(values)[::-1][budget.s - 1]
    definite = plus[values > cutoff]
    tied = plus[values == cutoff]
    need = budget.s - definite.size
    sets = []
    for combo in itertools.combinations(tied.tolist(), need):
        gamma_s = np.sort(np.concatenate([definite, np.asarray(combo, dtype=int)]))
        rest = np.setdiff1d(plus, gamma_s, assume_unique=True)
        sets.append(np.sort(np.concatenate([rest, zero])))
    return sets


def project_all(z, budget: HeavisideBudget, zero_tol: float | None = None) -> list[np.ndarray]:
    """Every nearest point of S, one per working set. Test-scale only (m <= 20)."""
    z = as_vector(z, "z")
    out = []
    for T in enumerate_working_sets(z, budget, zero_tol):
        p = z.copy()
        p[T] = 0.0
        out.append(p)
    return out


def fixed_point_check(y, lam, tau: float, budget: HeavisideBudget) -> bool:
    """Whether y is a fixed point of projecting y + tau*lam onto S.

    Equivalent conditions, checked with scale-relative tolerances: y has at
    most s positive entries; lam vanishes on the support of y; off the
    support, lam lies in [0, y_[s] / tau].
    """
    if tau <= 0:
        raise NonPositiveTau(f"tau must be positive, got {tau}")
    y = as_vector(y, "y")
    lam = as_vector(lam, "lam")
    if y.size != budget.m or lam.size != budget.m:
        raise DimensionMismatch("y and lam must both have the budget dimension")

    tol_y = default_zero_tol(y)
    tol_lam = default_zero_tol(lam)
    support = np.abs(y) > tol_y
    if np.count_nonzero(y > tol_y) > budget.s:
        return False
    if np.any(np.abs(lam[support]) > tol_lam):
        return False
    y_clean = np.where(support, y, 0.0)
    bound = sth_largest_positive(y_clean, budget.s)
    off = lam[~support]
    if np.any(off < -tol_lam):
        return False
    # Compare on the scale of y, where tau*lam lives.
    return not np.any(tau * off > bound + tol_y)


def _feasible_partition(z, budget, zero_tol):
    z = as_vector(z, "z")
    part = partition(z, budget, zero_tol)
    if part.gamma_plus.size > budget.s:
        raise InfeasiblePoint(
            f"point has {part.gamma_plus.size} positive entries, budget allows {budget.s}"
        )
    return z, part


def tangent_cone_contains(z, d, budget: HeavisideBudget, zero_tol: float | None = None) -> bool:
    """Membership of d in the Bouligand tangent cone of S at feasible z.

    Holds when at most s - |gamma_plus| of the zero entries of z see a
    positive direction component.
    """
    z, part = _feasible_partition(z, budget, zero_tol)
    d = as_vector(d, "d")
    if d.size != z.size:
        raise DimensionMismatch("direction length differs from point length")
    tol_d = default_zero_tol(d)
    ascending = np.count_nonzero(d[part.gamma_zero] > tol_d)
    return ascending <= budget.s - part.gamma_plus.size


def normal_cone_contains(z, d, budget: HeavisideBudget, zero_tol: float | None = None) -> bool:
    """Membership of d in the Frechet normal cone of S at feasible z.

    With exactly s positive entries: d vanishes where z is nonzero and is
    nonnegative where z is zero. With fewer than s: only d = 0 qualifies.
    """
    z, part = _feasible_partition(z, budget, zero_tol)
    d = as_vector(d, "d")
    if d.size != z.size:
        raise DimensionMismatch("direction length differs from point length")
    tol_d = default_zero_tol(d)
    if part.gamma_plus.size < budget.s:
        return bool(np.all(np.abs(d) <= tol_d))
    nonzero = np.concatenate([part.gamma_plus, part.gamma_minus])
    if np.any(np.abs(d[nonzero]) > tol_d):
        return False
    return not np.any(d[part.gamma_zero] < -tol_d)
