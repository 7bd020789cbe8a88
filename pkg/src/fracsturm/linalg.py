"""Dense symmetric eigensolvers.

Cholesky factorization, Householder tridiagonalization, the implicit-shift
QL iteration on symmetric tridiagonal matrices and the Cholesky reduction of
the symmetric-definite pencil ``M x = lam B x``.

Symmetric matrices are plain square ``ndarray`` objects; only the lower
triangle of an input is read.  Inputs are never modified.
"""

from dataclasses import dataclass

import numba
import numpy as np
from scipy.linalg import solve_triangular

MAX_SWEEPS = 50


class NotPositiveDefinite(np.linalg.LinAlgError):
    """Cholesky met a non-positive pivot."""

    def __init__(self, index, pivot):
        super().__init__(f"matrix is not positive definite: pivot {index} = {pivot:.3e}")
        self.index = index
        self.pivot = pivot


class NoConvergence(np.linalg.LinAlgError):
    """The QL iteration did not deflate an eigenvalue within MAX_SWEEPS sweeps."""

    def __init__(self, index):
        super().__init__(f"QL iteration failed to converge for eigenvalue {index}")
        self.index = index


@dataclass(frozen=True)
class SymTridiag:
    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        if len(self.offdiag) != max(len(self.diag) - 1, 0):
            raise ValueError("offdiag must have len(diag) - 1 entries")

    @property
    def order(self):
        return len(self.diag)

    def to_dense(self):
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


@dataclass(frozen=True)
class EigenPairs:
    """Ascending eigenvalues; ``vectors[:, k]`` belongs to ``values[k]``.

    ``vectors`` may hold fewer columns than there are values (the lowest
    ones) or be None when no vectors were requested.
    """

    values: np.ndarray
    vectors: np.ndarray | None = None


def _lower_symmetric(S):
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {S.shape}")
    return np.tril(S) + np.tril(S, -1).T


# ---------------------------------------------------------------------------
# Cholesky


def cholesky(B):
    """Lower-triangular L with L L^T = B (left-looking, column by column)."""
    A = _lower_symmetric(B)
    n = A.shape[0]
    L = np.zeros_like(A)
    for j in range(n):
        row = L[j, :j]
        pivot = A[j, j] - row @ row
        if not pivot > 0.0:
            raise NotPositiveDefinite(j, pivot)
        d = np.sqrt(pivot)
        L[j, j] = d
        if j + 1 < n:
            L[j + 1:, j] = (A[j + 1:, j] - L[j + 1:, :j] @ row) / d
    return L


# ---------------------------------------------------------------------------
# Householder tridiagonalization


@numba.njit(cache=True, nogil=True)
def _householder_upper(a, d, e, vs, betas):
    # Works on the upper triangle of `a` (row j, columns >= j), which is the
    # transpose of the lower triangle and gives contiguous inner loops.
    n = a.shape[0]
    for k in range(n - 2):
        m = n - k - 1
        x0 = a[k, k + 1]
        nrm2 = 0.0
        for i in range(k + 1, n):
            nrm2 += a[k, i] * a[k, i]
        nrm = np.sqrt(nrm2)
        d[k] = a[k, k]
        if nrm == 0.0:
            e[k] = 0.0
            betas[k] = 0.0
            continue
        alpha = -nrm if x0 >= 0.0 else nrm
        v = vs[k, :m]
        for i in range(m):
            v[i] = a[k, k + 1 + i]
        v[0] -= alpha
        vnorm2 = nrm2 - x0 * x0 + v[0] * v[0]
        beta = 2.0 / vnorm2
        betas[k] = beta
        e[k] = alpha
        # p = beta * A22 v using the upper triangle of A22
        p = np.zeros(m)
        for j in range(m):
            rj = k + 1 + j
            vj = v[j]
            acc = a[rj, rj] * vj
            for i in range(j + 1, m):
                aji = a[rj, k + 1 + i]
                acc += aji * v[i]
                p[i] += aji * vj
            p[j] += acc
        pv = 0.0
        for i in range(m):
            p[i] *= beta
            pv += p[i] * v[i]
        K = 0.5 * beta * pv
        for i in range(m):
            p[i] -= K * v[i]
        # A22 -= v w^T + w v^T, with w stored in p
        for j in range(m):
            rj = k + 1 + j
            vj = v[j]
            wj = p[j]
            for i in range(j, m):
                a[rj, k + 1 + i] -= vj * p[i] + wj * v[i]
    if n >= 2:
        d[n - 2] = a[n - 2, n - 2]
        e[n - 2] = a[n - 2, n - 1]
    d[n - 1] = a[n - 1, n - 1]


class Reflectors:
    """Product Q = H_0 H_1 ... H_{n-3} of Householder reflectors.

    ``H_k = I - beta_k v_k v_k^T`` acts on coordinates ``k+1, ..., n-1``.
    """

    def __init__(self, order, vs, betas):
        self._vs = vs
        self._betas = betas
        self.order = order

    def apply(self, X):
        """Return Q @ X without forming Q."""
        X = np.array(X, dtype=float, copy=True)
        vec = X.ndim == 1
        if vec:
            X = X[:, None]
        n = self.order
        for k in range(n - 3, -1, -1):
            beta = self._betas[k]
            if beta == 0.0:
                continue
            v = self._vs[k, : n - k - 1]
            block = X[k + 1:]
            block -= np.outer(beta * v, v @ block)
        return X[:, 0] if vec else X

    def matrix(self):
        return self.apply(np.eye(self.order))


def tridiagonalize(S):
    """Orthogonal Q and tridiagonal T with Q^T S Q = T.

    Returns ``(T, Q)`` where ``Q`` is a :class:`Reflectors` object; call
    ``Q.matrix()`` for the dense factor or ``Q.apply(X)`` to transform vectors.
    """
    a = np.ascontiguousarray(_lower_symmetric(S).T)
    n = a.shape[0]
    d = np.zeros(n)
    e = np.zeros(max(n - 1, 0))
    vs = np.zeros((max(n - 2, 0), max(n - 1, 0)))
    betas = np.zeros(max(n - 2, 0))
    if n == 1:
        d[0] = a[0, 0]
    elif n > 1:
        _householder_upper(a, d, e, vs, betas)
    return SymTridiag(d, e), Reflectors(n, vs, betas)


# ---------------------------------------------------------------------------
# Implicit QL on a symmetric tridiagonal matrix


@numba.njit(cache=True, nogil=True)
def _tql2(d, e, zt, want_vectors, max_sweeps):
    # EISPACK tql2 ordering: e[i] couples d[i] and d[i+1]; e[n-1] is scratch.
    # Rows of `zt` are the eigenvectors (transposed storage).
    n = d.shape[0]
    eps = 2.0 ** -52
    f = 0.0
    tst1 = 0.0
    for l in range(n):
        tst1 = max(tst1, abs(d[l]) + abs(e[l]))
        m = l
        while m < n - 1:
            if abs(e[m]) <= eps * tst1:
                break
            m += 1
        if m > l:
            it = 0
            while True:
                it += 1
                if it > max_sweeps:
                    return l
                g = d[l]
                p = (d[l + 1] - g) / (2.0 * e[l])
                r = np.hypot(p, 1.0)
                if p < 0:
                    r = -r
                d[l] = e[l] / (p + r)
                d[l + 1] = e[l] * (p + r)
                dl1 = d[l + 1]
                h = g - d[l]
                for i in range(l + 2, n):
                    d[i] -= h
                f += h
                p = d[m]
                c = 1.0
                c2 = c
                c3 = c
                el1 = e[l + 1]
                s = 0.0
                s2 = 0.0
                for i in range(m - 1, l - 1, -1):
                    c3 = c2
                    c2 = c
                    s2 = s
                    g = c * e[i]
                    h = c * p
                    r = np.hypot(p, e[i])
                    e[i + 1] = s * r
                    s = e[i] / r
                    c = p / r
                    p = c * d[i] - s * g
                    d[i + 1] = h + s * (c * g + s * d[i])
                    if want_vectors:
                        zi = zt[i]
                        zi1 = zt[i + 1]
                        for k in range(n):
                            hk = zi1[k]
                            zi1[k] = s * zi[k] + c * hk
                            zi[k] = c * zi[k] - s * hk
                p = -s * s2 * c3 * el1 * e[l] / dl1
                e[l] = s * p
                d[l] = c * p
                if not abs(e[l]) > eps * tst1:
                    break
        d[l] = d[l] + f
        e[l] = 0.0
    return -1


def tridiag_eig(T, want_vectors=False):
    """Eigen-decomposition of a symmetric tridiagonal matrix by implicit QL."""
    n = T.order
    d = np.array(T.diag, dtype=float)
    e = np.zeros(n)
    e[: n - 1] = T.offdiag
    zt = np.eye(n) if want_vectors else np.zeros((1, 1))
    if n > 0:
        failed = _tql2(d, e, zt, want_vectors, MAX_SWEEPS)
        if failed >= 0:
            raise NoConvergence(failed)
    order = np.argsort(d, kind="stable")
    vectors = zt[order].T.copy() if want_vectors else None
    return EigenPairs(d[order], vectors)


def sym_eig(S, n_vectors=None):
    """Standard symmetric eigenproblem via tridiagonalization and QL.

    ``n_vectors`` limits the returned eigenvectors to the lowest ones
    (None: all, 0: none).
    """
    T, Q = tridiagonalize(S)
    n = T.order
    if n_vectors is None:
        n_vectors = n
    pairs = tridiag_eig(T, want_vectors=n_vectors > 0)
    if n_vectors == 0:
        return EigenPairs(pairs.values)
    return EigenPairs(pairs.values, Q.apply(pairs.vectors[:, :n_vectors]))


def gen_sym_eig(M, B, n_vectors=None):
    """Solve M x = lam B x for symmetric M and symmetric positive definite B.

    B = L L^T reduces the pencil to the standard problem for
    C = L^{-1} M L^{-T}; eigenvectors are mapped back by x = L^{-T} z and are
    B-orthonormal.
    """
    M = _lower_symmetric(M)
    if np.shape(B) != M.shape:
        raise ValueError("M and B must have the same order")
    L = cholesky(B)
    W = solve_triangular(L, M, lower=True, check_finite=False)
    C = solve_triangular(L, W.T, lower=True, check_finite=False)
    C = 0.5 * (C + C.T)
    pairs = sym_eig(C, n_vectors=n_vectors)
    if pairs.vectors is None:
        return pairs
    X = solve_triangular(L, pairs.vectors, lower=True, trans="T", check_finite=False)
    return EigenPairs(pairs.values, X)
