"""Galerkin matrices of the pencil (A + Q, B).

``A`` is the stiffness diagonal, ``B`` the Gram matrix of the basis under
``(1-x^2)^alpha`` and ``Q`` the same Gram matrix with the potential inserted.

For ``m + n`` even the mass entries factor as
``b_mn = theta * h[m+n] * t[|m-n|]`` with

    theta  = -sin(pi alpha/2) Gamma(alpha+1) Gamma(alpha/2+1)^2 / pi
    h[s]   = Gamma((s+1)/2) / Gamma((s+3)/2 + alpha)
    t[d]   = Gamma(d/2 - alpha/2) / Gamma(d/2 + alpha/2 + 1)

(a Hankel factor times a Toeplitz factor); both factors obey two-term ratio
recurrences.  At ``alpha = 2`` theta vanishes while ``t`` has poles, so the
un-factored form with reciprocal gammas is used there.

``Q`` is built without quadrature: its first column is ``sum_l gamma_l b_l``
for the Jacobi coefficients ``gamma`` of the (polynomial) potential, and
column ``n+1`` follows from columns ``n`` and ``n-1`` through the tridiagonal
operator that represents multiplication by ``x``.
"""

import hashlib
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from .jacobi import SpectralBasis, check_alpha, stiffness_a
from .quadrature import gauss_jacobi

ASYMMETRY_TOL = 1e-8


class BasisTooSmall(ValueError):
    """The spectral basis does not reach the degrees an assembly needs."""


class AsymmetryWarning(RuntimeWarning):
    """The column recurrence for Q produced a visibly non-symmetric matrix."""


def theta(alpha):
    return -math.sin(0.5 * math.pi * alpha) * math.gamma(alpha + 1.0) * math.gamma(0.5 * alpha + 1.0) ** 2 / math.pi


def hankel_factor(alpha, count):
    """h[2j] for j = 0..count-1, by h[s] = (s-1)/(s+1+2 alpha) h[s-2]."""
    s = 2.0 * np.arange(1, count)
    ratios = (s - 1.0) / (s + 1.0 + 2.0 * alpha)
    h0 = math.exp(math.lgamma(0.5) - math.lgamma(1.5 + alpha))
    return h0 * np.concatenate(([1.0], np.cumprod(ratios)))


def toeplitz_factor(alpha, count):
    """t[2j] for j = 0..count-1, by t[d] = (d-alpha-2)/(d+alpha) t[d-2]; alpha < 2."""
    if alpha >= 2.0:
        raise ValueError("the Toeplitz factor has poles at alpha = 2")
    d = 2.0 * np.arange(1, count)
    ratios = (d - alpha - 2.0) / (d + alpha)
    t0 = math.gamma(-0.5 * alpha) / math.gamma(0.5 * alpha + 1.0)
    return t0 * np.concatenate(([1.0], np.cumprod(ratios)))


def mass_entries_direct(alpha, m, n):
    """b_mn from the un-factored closed form, evaluated in log space.

    The two reciprocal gammas in the denominator vanish at their poles,
    which makes this form valid for every alpha in (0, 2], including the
    banded case alpha = 2.
    """
    alpha = check_alpha(alpha)
    m = np.asarray(m)
    n = np.asarray(n)
    m, n = np.broadcast_arrays(m, n)
    s = (m + n).astype(float)
    d = (n - m).astype(float)
    u = 0.5 * (alpha + d) + 1.0
    v = 0.5 * (alpha - d) + 1.0
    pole = ((u <= 0) & (u == np.round(u))) | ((v <= 0) & (v == np.round(v)))
    us = np.where(pole, 1.0, u)
    vs = np.where(pole, 1.0, v)
    log_mag = (
        math.lgamma(alpha + 1.0)
        + 2.0 * math.lgamma(0.5 * alpha + 1.0)
        + _sp.gammaln(0.5 * (s + 1.0))
        - _sp.gammaln(0.5 * (s + 3.0) + alpha)
        - _sp.gammaln(us)
        - _sp.gammaln(vs)
    )
    sign = np.where(((n - m) // 2) % 2 == 0, 1.0, -1.0) * _sp.gammasgn(us) * _sp.gammasgn(vs)
    out = np.where(pole | ((m + n) % 2 == 1), 0.0, sign * np.exp(log_mag))
    return out


def mass_entries(alpha, m, n):
    """b_mn for index arrays m, n (broadcast), by the production method."""
    alpha = check_alpha(alpha)
    m, n = np.broadcast_arrays(np.asarray(m), np.asarray(n))
    if alpha == 2.0:
        return mass_entries_direct(alpha, m, n)
    s = m + n
    d = np.abs(n - m)
    top = int(s.max(initial=0)) // 2 + 1
    h = hankel_factor(alpha, top)
    t = toeplitz_factor(alpha, top)
    even = s % 2 == 0
    out = np.zeros(s.shape)
    out[even] = theta(alpha) * h[s[even] // 2] * t[d[even] // 2]
    return out


def assemble_A(basis, N):
    _check_size(basis, N)
    return stiffness_a(basis.alpha, np.arange(N))


def assemble_B(basis, N):
    _check_size(basis, N)
    idx = np.arange(N)
    return mass_entries(basis.alpha, idx[:, None], idx[None, :])


def _check_size(basis, N):
    if N < 1:
        raise ValueError("matrix order must be positive")
    if N > basis.n_max:
        raise BasisTooSmall(f"order {N} exceeds basis size {basis.n_max}")


def assemble_Q(gamma, basis, N):
    """Potential matrix for the potential sum_l gamma[l] P_l^(alpha/2)."""
    gamma = np.atleast_1d(np.asarray(gamma, dtype=float))
    if N < 1:
        raise ValueError("matrix order must be positive")
    S = 2 * N
    if basis.n_max < S:
        raise BasisTooSmall(f"Q of order {N} needs the basis up to degree {S}, have {basis.n_max}")
    L = len(gamma) - 1
    if L >= S:
        raise ValueError(f"potential degree {L} must be below 2N = {S}")
    if not np.any(gamma):
        return np.zeros((N, N))

    rows = np.arange(S + 1)
    ells = np.arange(L + 1)
    col = mass_entries(basis.alpha, rows[:, None], ells[None, :]) @ gamma
    prev = np.zeros_like(col)

    # (H z)_m = (zeta0[m] z_{m-1} + z_{m+1}) / zeta1[m]
    z1 = basis.zeta1[:S]
    lower = basis.zeta0[:S] / z1
    upper = 1.0 / z1

    Q = np.empty((N, N))
    for n in range(N):
        Q[:, n] = col[:N]
        if n == N - 1:
            break
        k = len(col) - 1
        hz = upper[:k] * col[1:]
        hz[1:] += lower[1:k] * col[: k - 1]
        nxt = basis.zeta1[n] * hz - basis.zeta0[n] * prev[:k]
        prev, col = col[:k], nxt

    scale = np.abs(Q).max()
    asym = np.abs(Q - Q.T).max()
    if asym > ASYMMETRY_TOL * scale:
        warnings.warn(
            f"potential matrix asymmetry {asym:.2e} exceeds {ASYMMETRY_TOL:g} x max entry {scale:.2e}",
            AsymmetryWarning,
            stacklevel=2,
        )
    return 0.5 * (Q + Q.T)


def assemble_Q_quadrature_oracle(q, basis, N, n_quad):
    """q_mn by Gauss-Jacobi quadrature with weight (1-x^2)^alpha.

    ``q`` is any vectorized callable (an expression AST works).  Independent
    of :func:`assemble_Q`; kept for cross-checking.
    """
    _check_size(basis, N)
    rule = gauss_jacobi(basis.alpha, basis.alpha, n_quad)
    values = np.broadcast_to(np.asarray(q(rule.nodes), dtype=float), rule.nodes.shape)
    P = basis.eval_all(rule.nodes)[:N]
    Q = (P * (rule.weights * values)) @ P.T
    return 0.5 * (Q + Q.T)


def fingerprint(gamma):
    """Stable digest of a coefficient vector (trailing zeros ignored)."""
    gamma = np.trim_zeros(np.asarray(gamma, dtype=float), "b")
    return hashlib.sha256(np.ascontiguousarray(gamma, dtype="<f8").tobytes()).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class AssembledSystem:
    alpha: float
    N: int
    A: np.ndarray
    B: np.ndarray
    Q: np.ndarray
    potential_fingerprint: str

    @property
    def stiffness(self):
        """A + Q as a dense matrix."""
        return np.diag(self.A) + self.Q


def assemble(basis: SpectralBasis, N: int, gamma=None) -> AssembledSystem:
    """A, B and Q for order N; ``gamma=None`` means the zero potential."""
    A = assemble_A(basis, N)
    B = assemble_B(basis, N)
    if gamma is None:
        Q = np.zeros((N, N))
        fp = fingerprint([])
    else:
        Q = assemble_Q(gamma, basis, N)
        fp = fingerprint(gamma)
    return AssembledSystem(basis.alpha, N, A, B, Q, fp)
