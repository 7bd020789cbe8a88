"""Symmetric Jacobi polynomials P_n^(a/2, a/2), normalized so that P_n(1) = 1.

A :class:`SpectralBasis` holds every per-degree scalar the Galerkin
matrices need for one fractional order ``alpha``:

* ``zeta1[n] = (2n+1+alpha)/(n+1+alpha)``, ``zeta0[n] = n/(n+1+alpha)``,
  the coefficients of ``P_{n+1} = zeta1[n] x P_n - zeta0[n] P_{n-1}``;
* ``sigma[n]``, the squared norm of ``P_n`` under ``(1-x^2)^(alpha/2)``;
* ``mu[n] = Gamma(n+alpha+1)/Gamma(n+1)``, the multiplier by which the
  fractional Laplacian acts on ``(1-x^2)^(alpha/2) P_n``;
* ``a[n] = mu[n] sigma[n]``, the stiffness diagonal.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .special import ln_gamma


def check_alpha(alpha):
    alpha = float(alpha)
    if not 0.0 < alpha <= 2.0:
        raise ValueError("alpha must lie in (0,2]")
    return alpha


def _mu_table(alpha, count):
    # mu_{n+1} = mu_n (n+1+alpha)/(n+1): relative error grows like sqrt(n) eps,
    # against roughly n eps for a gamma-ratio evaluation
    j = np.arange(1, count, dtype=float)
    return math.gamma(alpha + 1.0) * np.concatenate(([1.0], np.cumprod((j + alpha) / j)))


def mu(alpha, n):
    """Gamma(n+alpha+1)/Gamma(n+1) for integers n >= 0."""
    alpha = check_alpha(alpha)
    n = np.asarray(n)
    if np.any(n < 0) or np.any(n != np.round(n)):
        raise ValueError("mu needs non-negative integer degrees")
    out = _mu_table(alpha, int(n.max(initial=0)) + 1)[n.astype(int)]
    return float(out) if out.ndim == 0 else out


def stiffness_scale(alpha):
    """2^(alpha+1) Gamma(alpha/2+1)^2, the numerator shared by every a_m."""
    return math.exp((alpha + 1.0) * math.log(2.0) + 2.0 * ln_gamma(0.5 * alpha + 1.0))


def stiffness_a(alpha, m):
    """a_m = 2^(alpha+1) Gamma(alpha/2+1)^2 / (2m+alpha+1)."""
    alpha = check_alpha(alpha)
    return stiffness_scale(alpha) / (2.0 * np.asarray(m, dtype=float) + alpha + 1.0)


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    alpha: float
    n_max: int
    zeta1: np.ndarray
    zeta0: np.ndarray
    sigma: np.ndarray
    mu: np.ndarray
    a: np.ndarray

    def eval(self, n, x):
        return eval_jacobi(self, n, x)

    def eval_all(self, x):
        return eval_jacobi_all(self, x)


def _frozen(arr):
    arr = np.ascontiguousarray(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=32)
def _build(alpha, n_max):
    n = np.arange(n_max, dtype=float)
    zeta1 = (2.0 * n + 1.0 + alpha) / (n + 1.0 + alpha)
    zeta0 = n / (n + 1.0 + alpha)
    # sigma_{n+1}/sigma_n = (n+1)(2n+alpha+1) / ((2n+alpha+3)(n+alpha+1))
    sigma0 = stiffness_scale(alpha) / ((alpha + 1.0) * math.gamma(alpha + 1.0))
    ratios = (n[:-1] + 1.0) * (2.0 * n[:-1] + alpha + 1.0) / (
        (2.0 * n[:-1] + alpha + 3.0) * (n[:-1] + alpha + 1.0)
    )
    sigma = sigma0 * np.concatenate(([1.0], np.cumprod(ratios)))
    return SpectralBasis(
        alpha=alpha,
        n_max=n_max,
        zeta1=_frozen(zeta1),
        zeta0=_frozen(zeta0),
        sigma=_frozen(sigma),
        mu=_frozen(_mu_table(alpha, n_max)),
        a=_frozen(stiffness_scale(alpha) / (2.0 * n + alpha + 1.0)),
    )


def spectral_basis(alpha, n_max):
    """Per-degree tables for degrees 0..n_max-1 (cached, read-only)."""
    alpha = check_alpha(alpha)
    n_max = int(n_max)
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    return _build(alpha, n_max)


def eval_jacobi_all(basis, x):
    """[P_0(x), ..., P_{n_max-1}(x)] by forward recurrence.

    ``x`` may be an array; the degree index is the leading axis of the result.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((basis.n_max,) + x.shape)
    out[0] = 1.0
    if basis.n_max > 1:
        out[1] = x
    z1, z0 = basis.zeta1, basis.zeta0
    for n in range(1, basis.n_max - 1):
        out[n + 1] = z1[n] * x * out[n] - z0[n] * out[n - 1]
    return out


def eval_jacobi(basis, n, x):
    """P_n^(alpha/2)(x) for 0 <= n < n_max."""
    if not 0 <= n < basis.n_max:
        raise IndexError(f"degree {n} outside 0..{basis.n_max - 1}")
    x = np.asarray(x, dtype=float)
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    for j in range(n):
        prev, cur = cur, basis.zeta1[j] * x * cur - basis.zeta0[j] * prev
    return float(cur) if cur.ndim == 0 else cur
