"""Eigenpairs of the fractional Sturm-Liouville problem.

    (-Delta)^(alpha/2) y + q y = lam y  on (-1, 1),   y = 0 outside,

approximated by y(x) = (1-x^2)^(alpha/2) sum_n xi_n P_n^(alpha/2)(x), which
turns the problem into the symmetric-definite pencil (A + Q) xi = lam B xi.
"""

import math
from dataclasses import dataclass

import numpy as np

from .assembly import assemble, mass_entries
from .jacobi import check_alpha, spectral_basis, stiffness_a
from .linalg import EigenPairs, gen_sym_eig
from .potential import PotentialModel, chebyshev_points

DEFAULT_TRUST_FRACTION = 1.0 / 3.0
RESIDUAL_TOL = 1e-8


class ZeroSum(ArithmeticError):
    """An eigenvector's coefficients sum to zero, so y^(1) = 1 scaling is impossible."""


@dataclass(frozen=True)
class SolveRequest:
    alpha: float
    N: int
    k_max: int
    potential: PotentialModel | None = None
    trust_fraction: float = DEFAULT_TRUST_FRACTION

    def __post_init__(self):
        object.__setattr__(self, "alpha", check_alpha(self.alpha))
        if self.N < 1:
            raise ValueError("N must be positive")
        if not 0 <= self.k_max < self.N:
            raise ValueError(f"k_max must satisfy 0 <= k_max < N, got k_max={self.k_max}, N={self.N}")
        if not 0.0 < self.trust_fraction <= 1.0:
            raise ValueError("trust_fraction must lie in (0,1]")


@dataclass(frozen=True, eq=False)
class EigenSolution:
    request: SolveRequest
    lambdas: np.ndarray
    coeffs: np.ndarray  # column k: B-normalized coefficients of eigenfunction k
    trusted: np.ndarray
    residuals: np.ndarray

    @property
    def alpha(self):
        return self.request.alpha

    @property
    def N(self):
        return self.request.N


@dataclass(frozen=True, eq=False)
class Eigenfunction:
    """y^(N)(x) = (1-x^2)_+^(alpha/2) sum_n coeffs[n] P_n^(alpha/2)(x)."""

    alpha: float
    coeffs: np.ndarray

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        basis = spectral_basis(self.alpha, len(self.coeffs))
        inside = np.abs(x) < 1.0
        xc = np.where(inside, x, 0.0)
        series = np.tensordot(self.coeffs, basis.eval_all(xc), axes=1)
        out = np.where(inside, (1.0 - xc * xc) ** (0.5 * self.alpha) * series, 0.0)
        return float(out) if out.ndim == 0 else out


def _gamma(req):
    if req.potential is None:
        return None
    gamma = req.potential.jacobi_coeffs(req.alpha)
    return gamma if np.any(gamma) else None


def _split_by_parity(M, B):
    # True when the pencil decouples into even- and odd-indexed blocks exactly.
    i = np.arange(M.shape[0])
    odd = (i[:, None] + i[None, :]) % 2 == 1
    return not np.any(M[odd]) and not np.any(B[odd])


def _inverted(M, B, n_vectors, shift):
    # (M, B) through the pencil (-B, M + shift B): its ascending eigenvalues
    # nu = -1/(lam + shift) list lam ascending, and the reduction's rounding
    # error scales with 1/(lam_0 + shift) instead of lam_max, which keeps
    # the low eigenvalues accurate to a few ulps of lam itself.
    pairs = gen_sym_eig(-B, M + shift * B, n_vectors=n_vectors)
    nu = pairs.values
    lambdas = -1.0 / nu - shift
    if pairs.vectors is None:
        return EigenPairs(lambdas)
    k = pairs.vectors.shape[1]
    return EigenPairs(lambdas, pairs.vectors / np.sqrt(-nu[:k]))


def _solve_pencil(M, B, n_vectors, shift):
    """All eigenvalues and the lowest ``n_vectors`` eigenvectors of (M, B).

    ``M + shift * B`` must be positive definite.  A checkerboard pencil is
    solved as two half-size blocks; equal eigenvalues then list the even
    sector first.
    """
    n = M.shape[0]
    if n < 2 or not _split_by_parity(M, B):
        return _inverted(M, B, n_vectors, shift)
    blocks = [np.arange(0, n, 2), np.arange(1, n, 2)]
    values, vecs, owner = [], [], []
    for s, idx in enumerate(blocks):
        sub = _inverted(M[np.ix_(idx, idx)], B[np.ix_(idx, idx)], min(n_vectors, len(idx)), shift)
        values.append(sub.values)
        owner.append(np.full(len(sub.values), s))
        if n_vectors:
            full = np.zeros((n, sub.vectors.shape[1]))
            full[idx] = sub.vectors
            vecs.append(full)
    values = np.concatenate(values)
    owner = np.concatenate(owner)
    order = np.lexsort((owner, values))
    if not n_vectors:
        return EigenPairs(values[order])
    # position of each eigenvalue inside its own block
    local = np.concatenate([np.arange(len(v)) for v in (blocks[0], blocks[1])])
    cols = []
    for j in order[:n_vectors]:
        s, r = owner[j], local[j]
        if r >= vecs[s].shape[1]:
            raise AssertionError("block solve returned too few vectors")
        cols.append(vecs[s][:, r])
    return EigenPairs(values[order], np.column_stack(cols))


def eigenvalues(alpha, N, potential=None):
    """All N eigenvalues of the order-N pencil, ascending (no vectors)."""
    req = SolveRequest(alpha, N, 0, potential)
    system = _assemble(req)
    return _solve_pencil(system.stiffness, system.B, 0, _shift(req)).values


def _assemble(req):
    gamma = _gamma(req)
    n_max = 2 * req.N if gamma is not None else req.N
    return assemble(spectral_basis(req.alpha, n_max), req.N, gamma)


def _shift(req):
    # A is positive definite, so A + Q + s B is too once s >= -min q_L.
    if req.potential is None:
        return 1.0
    low = float(req.potential(chebyshev_points(257)).min())
    return 1.0 + max(0.0, -low) * 1.25


def _fix_signs(X):
    for k in range(X.shape[1]):
        col = X[:, k]
        nz = np.nonzero(np.abs(col) > 1e-12)[0]
        if len(nz) and col[nz[0]] < 0:
            X[:, k] = -col
    return X


def _quadratic_forms(M, B, X):
    """x^T M x and x^T B x per column of X, accumulated in long double."""
    Xl = X.astype(np.longdouble)
    num = np.einsum("ik,ik->k", Xl, M.astype(np.longdouble) @ Xl)
    den = np.einsum("ik,ik->k", Xl, B.astype(np.longdouble) @ Xl)
    return num, den


def solve(req):
    """Lowest k_max+1 eigenpairs of the order-N Galerkin pencil.

    Eigenvalues are the Rayleigh quotients of the computed eigenvectors;
    vectors are B-normalized and signed so their first non-negligible
    coefficient is positive.
    """
    system = _assemble(req)
    M = system.stiffness
    pairs = _solve_pencil(M, system.B, req.k_max + 1, _shift(req))
    X = _fix_signs(pairs.vectors[:, : req.k_max + 1].copy())
    # Rayleigh quotients: second-order accurate in the vector error, they
    # remove the reduction's rounding error from the eigenvalues.  Extended
    # precision keeps their own rounding below one ulp of lam.
    num, den = _quadratic_forms(M, system.B, X)
    lambdas = (num / den).astype(float)
    X /= np.sqrt(den.astype(float))
    R = M @ X - (system.B @ X) * lambdas
    residuals = np.abs(R).max(axis=0)
    trusted = np.arange(req.k_max + 1) < req.trust_fraction * req.N
    return EigenSolution(req, lambdas, X, trusted, residuals)


def eigenfunction(sol, k):
    if not 0 <= k < len(sol.lambdas):
        raise IndexError(f"eigenfunction index {k} outside 0..{len(sol.lambdas) - 1}")
    return Eigenfunction(sol.alpha, sol.coeffs[:, k].copy())


@dataclass(frozen=True)
class CoefficientAsymptote:
    nu0: float
    nu1: float
    nu2: float
    coeffs: np.ndarray  # c_n, scaled so that sum_n c_n = 1
    predicted: np.ndarray  # c^_n from the boundary-behaviour model


def coefficient_asymptote(sol, k, potential=None):
    """Compare coefficients of eigenfunction k with their large-n model.

    The coefficients are rescaled so that y(x)/(1-x^2)^(alpha/2) equals 1 at
    x = 1, then

        c^_{2n}   = (nu0 b_{2n,0} - nu2 b_{2n,2}) / a_{2n}
        c^_{2n+1} = nu1 b_{2n+1,1} / a_{2n+1}

    with nu0, nu1, nu2 built from lam, the even and odd parts of the
    potential at x = 1, and the even and odd coefficient sums.
    """
    xi = sol.coeffs[:, k]
    total = xi.sum()
    if abs(total) <= 1e-12 * np.abs(xi).sum():
        raise ZeroSum(f"coefficients of eigenfunction {k} sum to zero")
    c = xi / total
    alpha = sol.alpha
    lam = float(sol.lambdas[k])
    ye = c[0::2].sum()
    yo = c[1::2].sum()
    if potential is None:
        qe = qo = 0.0
    else:
        qp, qm = potential(1.0), potential(-1.0)
        qe, qo = 0.5 * (qp + qm), 0.5 * (qp - qm)
    nu0 = (lam - qe) * ye - qo * yo / (3.0 + alpha)
    nu1 = (lam - qe) * yo - qo * ye
    nu2 = qo * yo * (2.0 + alpha) / (3.0 + alpha)
    n = np.arange(len(c))
    even = n % 2 == 0
    a = stiffness_a(alpha, n)
    pred = np.where(
        even,
        nu0 * mass_entries(alpha, n, 0) - nu2 * mass_entries(alpha, n, 2),
        nu1 * mass_entries(alpha, n, 1),
    ) / a
    return CoefficientAsymptote(float(nu0), float(nu1), float(nu2), c, pred)


def well_asymptote(alpha, k):
    """((k+1) pi/2 - (2-alpha) pi/8)^alpha, the large-k law for q = 0."""
    k = np.asarray(k, dtype=float)
    return ((k + 1.0) * math.pi / 2.0 - (2.0 - alpha) * math.pi / 8.0) ** alpha
