import numpy as np
import pytest

from hsco.errors import DimensionMismatch, EmptyMatrix, NotSymmetric, Singular, SingularKKT
from hsco.linalg import row_rank, solve_kkt, solve_spd, to_csr


def test_solve_spd_identity():
    assert np.allclose(solve_spd(np.eye(3), [1.0, 2.0, 3.0]), [1.0, 2.0, 3.0])


def test_solve_spd_diagonal():
    assert np.allclose(solve_spd(np.diag([2.0, 4.0]), [2.0, 8.0]), [1.0, 2.0])


def test_solve_spd_2x2_closed_form():
    # inverse of [[4,1],[1,3]] applied to (1,2), det = 11
    M = np.array([[4.0, 1.0], [1.0, 3.0]])
    rhs = np.array([1.0, 2.0])
    expected = np.array([(3 * 1 - 1 * 2) / 11, (4 * 2 - 1 * 1) / 11])
    assert np.allclose(solve_spd(M, rhs), expected, atol=1e-12)


def test_solve_spd_rejects_asymmetric():
    M = np.array([[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(NotSymmetric):
        solve_spd(M, np.ones(2))


def test_solve_spd_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        solve_spd(np.eye(3), np.ones(2))


def test_solve_spd_singular_inconsistent():
    M = np.zeros((2, 2))
    with pytest.raises(Singular):
        solve_spd(M, np.array([1.0, 0.0]))


def test_solve_spd_singular_consistent_falls_back():
    # rank-1 PSD with rhs in range: least-squares fallback must succeed
    M = np.array([[1.0, 1.0], [1.0, 1.0]])
    rhs = np.array([2.0, 2.0])
    v = solve_spd(M, rhs)
    assert np.linalg.norm(M @ v - rhs) <= 1e-8 * (1 + np.linalg.norm(rhs))


def test_solve_spd_residual_contract_random():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = rng.integers(1, 51)
        G = rng.standard_normal((n, n))
        M = G @ G.T + n * np.eye(n)
        rhs = rng.standard_normal(n)
        v = solve_spd(M, rhs)
        assert np.linalg.norm(M @ v - rhs) <= 1e-8 * (1 + np.linalg.norm(rhs))


def test_row_rank_basic():
    assert row_rank(np.eye(3)) == 3
    assert row_rank(np.array([[1.0, 1.0], [1.0, 1.0]])) == 1


def test_row_rank_random_full_rank():
    rng = np.random.default_rng(1)
    M = rng.standard_normal((5, 8))
    s = np.linalg.svd(M, compute_uv=False)
    reference = int(np.count_nonzero(s > 1e-10 * s[0]))
    assert row_rank(M) == reference == 5


def test_row_rank_permutation_and_scaling_invariant():
    rng = np.random.default_rng(2)
    for _ in range(20):
        M = rng.standard_normal((4, 6))
        M[3] = 2.0 * M[0] - M[1]  # force rank 3
        base = row_rank(M)
        perm = rng.permutation(4)
        scales = rng.uniform(0.5, 3.0, size=4) * rng.choice([-1.0, 1.0], size=4)
        assert row_rank(M[perm]) == base
        assert row_rank(scales[:, None] * M) == base


def test_row_rank_empty_and_bad_tol():
    with pytest.raises(EmptyMatrix):
        row_rank(np.zeros((0, 3)))
    with pytest.raises(ValueError):
        row_rank(np.eye(2), tol=0.0)


def test_row_rank_zero_matrix():
    assert row_rank(np.zeros((3, 3))) == 0


def test_solve_kkt_hand_case():
    # [[I2, e1], [e1^T, 0]] (u; v) = (1, 1, 0) -> u = (0, 1), v = (1)
    u, v = solve_kkt(np.eye(2), np.array([[1.0, 0.0]]), np.array([1.0, 1.0]), np.array([0.0]))
    assert np.allclose(u, [0.0, 1.0], atol=1e-12)
    assert np.allclose(v, [1.0], atol=1e-12)


def test_solve_kkt_empty_constraints():
    rng = np.random.default_rng(3)
    g = rng.standard_normal(4)
    u, v = solve_kkt(np.eye(4), np.zeros((0, 4)), g, np.zeros(0))
    assert np.allclose(u, g)
    assert v.size == 0


def test_solve_kkt_matches_dense_solve():
    rng = np.random.default_rng(4)
    for _ in range(25):
        n = int(rng.integers(2, 9))
        t = int(rng.integers(0, n + 1))
        G = rng.standard_normal((n, n))
        H = G @ G.T + n * np.eye(n)
        B = rng.standard_normal((t, n))
        g1 = rng.standard_normal(n)
        g2 = rng.standard_normal(t)
        u, v = solve_kkt(H, B, g1, g2)
        K = np.zeros((n + t, n + t))
        K[:n, :n] = H
        K[:n, n:] = B.T
        K[n:, :n] = B
        ref = np.linalg.solve(K, np.concatenate([g1, g2]))
        assert np.abs(np.concatenate([u, v]) - ref).max() <= 1e-9


def test_solve_kkt_residual_contract():
    rng = np.random.default_rng(5)
    H = np.eye(6) * 3.0
    B = rng.standard_normal((2, 6))
    g1, g2 = rng.standard_normal(6), rng.standard_normal(2)
    u, v = solve_kkt(H, B, g1, g2)
    res = np.linalg.norm(H @ u + B.T @ v - g1) + np.linalg.norm(B @ u - g2)
    assert res <= 1e-8 * (1 + np.linalg.norm(np.concatenate([g1, g2])))


def test_solve_kkt_singular_raises():
    H = np.zeros((2, 2))
    B = np.zeros((1, 2))
    with pytest.raises(SingularKKT):
        solve_kkt(H, B, np.ones(2), np.ones(1))


def test_to_csr_canonicalizes():
    M = to_csr(np.array([[0.0, 2.0], [0.0, 0.0]]))
    assert M.nnz == 1
    assert M.shape == (2, 2)
