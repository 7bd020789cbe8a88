import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from fracsturm.linalg import (
    NotPositiveDefinite,
    SymTridiag,
    cholesky,
    gen_sym_eig,
    sym_eig,
    tridiag_eig,
    tridiagonalize,
)


def random_sym(rng, n):
    A = rng.standard_normal((n, n))
    return 0.5 * (A + A.T)


def random_spd(rng, n, cond=1e3):
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    d = np.geomspace(1.0, cond, n)
    return (Q * d) @ Q.T


def test_tridiag_example():
    # [[2,1],[1,2]] has eigenvalues 1 and 3
    pairs = tridiag_eig(SymTridiag(np.array([2.0, 2.0]), np.array([1.0])), want_vectors=True)
    np.testing.assert_allclose(pairs.values, [1.0, 3.0], atol=1e-15)
    v = pairs.vectors[:, 0]
    assert abs(abs(v[0]) - 2 ** -0.5) < 1e-15 and abs(v[0] + v[1]) < 1e-15


def test_tridiag_discrete_laplacian():
    n = 50
    T = SymTridiag(np.full(n, 2.0), np.full(n - 1, -1.0))
    k = np.arange(1, n + 1)
    exact = 2.0 - 2.0 * np.cos(k * np.pi / (n + 1))
    np.testing.assert_allclose(tridiag_eig(T).values, exact, atol=1e-13)


def test_empty_and_single():
    assert tridiag_eig(SymTridiag(np.array([]), np.array([]))).values.size == 0
    assert tridiag_eig(SymTridiag(np.array([4.0]), np.array([]))).values[0] == 4.0


def test_tridiag_shape_check():
    with pytest.raises(ValueError):
        SymTridiag(np.ones(3), np.ones(3))


@pytest.mark.parametrize("n", [1, 2, 3, 7, 40, 129])
def test_tridiagonalize_is_similarity(n):
    rng = np.random.default_rng(n)
    S = random_sym(rng, n)
    T, R = tridiagonalize(S)
    Q = R.matrix()
    np.testing.assert_allclose(Q.T @ Q, np.eye(n), atol=1e-13)
    np.testing.assert_allclose(Q @ T.to_dense() @ Q.T, S, atol=1e-12)


@pytest.mark.parametrize("n", [3, 10, 64, 200])
def test_sym_eig_matches_lapack(n):
    rng = np.random.default_rng(100 + n)
    S = random_sym(rng, n)
    pairs = sym_eig(S)
    expected = scipy.linalg.eigh(S, eigvals_only=True)
    np.testing.assert_allclose(pairs.values, expected, atol=1e-12 * np.abs(expected).max())
    X = pairs.vectors
    np.testing.assert_allclose(X.T @ X, np.eye(n), atol=1e-12)
    np.testing.assert_allclose(S @ X, X * pairs.values, atol=1e-11)


def test_sym_eig_reads_lower_triangle_only():
    rng = np.random.default_rng(5)
    S = random_sym(rng, 12)
    junk = S + np.triu(rng.standard_normal((12, 12)), 1)
    np.testing.assert_allclose(sym_eig(junk, 0).values, sym_eig(S, 0).values, atol=1e-13)


def test_sym_eig_partial_vectors():
    rng = np.random.default_rng(6)
    S = random_sym(rng, 30)
    full = sym_eig(S)
    part = sym_eig(S, n_vectors=4)
    assert part.vectors.shape == (30, 4)
    np.testing.assert_allclose(np.abs(part.vectors), np.abs(full.vectors[:, :4]), atol=1e-10)
    assert sym_eig(S, n_vectors=0).vectors is None


@pytest.mark.parametrize("n", [1, 5, 33, 100])
def test_cholesky(n):
    B = random_spd(np.random.default_rng(n), n)
    L = cholesky(B)
    assert np.all(np.triu(L, 1) == 0.0)
    np.testing.assert_allclose(L @ L.T, B, atol=1e-12 * np.abs(B).max())


def test_cholesky_rejects_indefinite():
    B = np.diag([1.0, 2.0, -1.0, 4.0])
    with pytest.raises(NotPositiveDefinite) as err:
        cholesky(B)
    assert err.value.index == 2
    assert isinstance(err.value, np.linalg.LinAlgError)


@pytest.mark.parametrize("n", [2, 9, 50])
def test_gen_sym_eig_matches_lapack(n):
    rng = np.random.default_rng(200 + n)
    M = random_sym(rng, n)
    B = random_spd(rng, n, cond=1e4)
    pairs = gen_sym_eig(M, B)
    expected = scipy.linalg.eigh(M, B, eigvals_only=True)
    np.testing.assert_allclose(pairs.values, expected, atol=1e-10 * np.abs(expected).max())
    X = pairs.vectors
    np.testing.assert_allclose(X.T @ B @ X, np.eye(n), atol=1e-10)
    np.testing.assert_allclose(M @ X, B @ X * pairs.values, atol=1e-9)


def test_gen_sym_eig_shape_mismatch():
    with pytest.raises(ValueError):
        gen_sym_eig(np.eye(3), np.eye(4))


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=1, max_value=8), st.integers(min_value=0, max_value=2**31 - 1))
def test_congruence_invariance(n, seed):
    rng = np.random.default_rng(seed)
    M = random_sym(rng, n)
    B = random_spd(rng, n, cond=10.0)
    # well-conditioned C: orthogonal times a mild diagonal
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    C = Q * rng.uniform(0.5, 2.0, n)
    base = gen_sym_eig(M, B).values
    moved = gen_sym_eig(C.T @ M @ C, C.T @ B @ C).values
    scale = max(1.0, np.abs(base).max())
    np.testing.assert_allclose(moved, base, rtol=1e-10, atol=1e-10 * scale)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=1, max_value=25), st.integers(min_value=0, max_value=2**31 - 1))
def test_eigenvalue_sum_is_trace(n, seed):
    S = random_sym(np.random.default_rng(seed), n)
    assert sym_eig(S, 0).values.sum() == pytest.approx(np.trace(S), abs=1e-11 * n)
