"""Dense and sparse kernels plus the direct solvers behind the Newton steps.

Dense matrices and vectors are plain float64 numpy arrays; sparse matrices are
scipy CSR (row offsets, column indices, values). Factorizations always act on
dense blocks because the working sets they serve are small.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import DimensionMismatch, EmptyMatrix, NotSymmetric, Singular, SingularKKT

# Relative threshold under which a singular value does not count toward rank.
DEFAULT_RANK_TOL = 1e-10

# Relative residual bound every direct solve must meet.
SOLVE_TOL = 1e-8


def as_vector(v, name: str = "vector") -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise DimensionMismatch(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def as_dense(M, name: str = "matrix") -> np.ndarray:
    if sp.issparse(M):
        M = M.toarray()
    arr = np.asarray(M, dtype=float)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be two-dimensional, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def to_csr(M) -> sp.csr_matrix:
    """Canonical CSR form: sorted column indices, explicit zeros dropped."""
    out = sp.csr_matrix(M, dtype=float)
    out.sum_duplicates()
    out.sort_indices()
    out.eliminate_zeros()
    if out.nnz and not np.all(np.isfinite(out.data)):
        raise ValueError("sparse matrix contains non-finite entries")
    return out


def is_sparse(M) -> bool:
    return sp.issparse(M)


def take_rows(M, idx):
    """Row subset M[idx] for dense or CSR input."""
    return M[idx]


def solve_spd(M, rhs) -> np.ndarray:
    """Solve M v = rhs for symmetric positive-definite M.

    Cholesky first; if any pivot falls below 1e-12 times the largest diagonal
    entry (or the factorization breaks down), fall back to column-pivoted
    least squares. Raises Singular only when the fallback residual exceeds
    1e-8 * (1 + ||rhs||).
    """
    M = as_dense(M, "M")
    rhs = as_vector(rhs, "rhs")
    n = M.shape[0]
    if M.shape[1] != n:
        raise DimensionMismatch(f"M must be square, got {M.shape}")
    if rhs.size != n:
        raise DimensionMismatch(f"rhs has length {rhs.size}, expected {n}")
    if n == 0:
        return np.zeros(0)
    scale = np.abs(M).max()
    if np.abs(M - M.T).max() > 1e-10 * (1.0 + scale):
        raise NotSymmetric("matrix is not symmetric within 1e-10 relative tolerance")

    pivot_floor = 1e-12 * max(float(np.diag(M).max(initial=0.0)), 0.0)
    try:
        L = scipy.linalg.cholesky(M, lower=True, check_finite=False)
        if np.min(np.diag(L)) ** 2 >= pivot_floor:
            return scipy.linalg.cho_solve((L, True), rhs, check_finite=False)
    except scipy.linalg.LinAlgError:
        pass

    v = scipy.linalg.lstsq(M, rhs, lapack_driver="gelsy", check_finite=False)[0]
    if np.linalg.norm(M @ v - rhs) > SOLVE_TOL * (1.0 + np.linalg.norm(rhs)):
        raise Singular("right-hand side is outside the range of M within tolerance")
    return v


def row_rank(M, tol: float = DEFAULT_RANK_TOL) -> int:
    """Numerical rank: singular values above tol times the largest one."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    M = as_dense(M, "M")
    if M.shape[0] == 0 or M.shape[1] == 0:
        raise EmptyMatrix(f"rank of an empty matrix with shape {M.shape}")
    s = scipy.linalg.svdvals(M)
    if s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def solve_kkt(H, B, g1, g2) -> tuple[np.ndarray, np.ndarray]:
    """Solve the saddle block system [[H, B^T], [B, 0]] (u; v) = (g1; g2).

    Assembles the dense (n + t) system and factors it by LU with partial
    pivoting. Raises SingularKKT when the factorization or the residual
    indicates singularity, so the caller can apply its damping policy.
    """
    H = as_dense(H, "H")
    B = as_dense(B, "B") if not (isinstance(B, np.ndarray) and B.size == 0) else np.zeros((0, H.shape[0]))
    g1 = as_vector(g1, "g1")
    g2 = as_vector(g2, "g2")
    n = H.shape[0]
    t = B.shape[0]
    if H.shape[1] != n:
        raise DimensionMismatch(f"H must be square, got {H.shape}")
    if B.size and B.shape[1] != n:
        raise DimensionMismatch(f"B has {B.shape[1]} columns, expected {n}")
    if g1.size != n or g2.size != t:
        raise DimensionMismatch("right-hand side blocks do not match H and B")
    if t > n:
        raise DimensionMismatch(f"B has more rows ({t}) than columns ({n})")

    K = np.zeros((n + t, n + t))
    K[:n, :n] = H
    if t:
        K[:n, n:] = B.T
        K[n:, :n] = B
    rhs = np.concatenate([g1, g2])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lu, piv = scipy.linalg.lu_factor(K, check_finite=False)
    u_diag = np.abs(np.diag(lu))
    if u_diag.min(initial=np.inf) <= 1e-14 * max(u_diag.max(initial=0.0), 1.0):
        raise SingularKKT("pivot collapse while factoring the saddle system")
    sol = scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)
    if np.linalg.norm(K @ sol - rhs) > SOLVE_TOL * (1.0 + np.linalg.norm(rhs)):
        raise SingularKKT("saddle system residual exceeds tolerance")
    return sol[:n], sol[n:]
