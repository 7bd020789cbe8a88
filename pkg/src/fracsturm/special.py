"""Scalar special functions: log-gamma, reciprocal gamma, log-beta.

Thin wrappers over :mod:`scipy.special` with the domain checks the rest of
the package relies on.  Everything accepts scalars or numpy arrays.
"""

import numpy as np
from scipy import special as _sp


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


def _check_positive(name, x):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError(f"{name} requires positive arguments, got {x!r}")
    return arr


def ln_gamma(x):
    """ln Gamma(x) for x > 0."""
    arr = _check_positive("ln_gamma", x)
    out = _sp.gammaln(arr)
    return float(out) if out.ndim == 0 else out


def rgamma(x):
    """1/Gamma(x), the entire extension (exactly zero at 0, -1, -2, ...)."""
    arr = np.asarray(x, dtype=float)
    out = _sp.rgamma(arr)
    return float(out) if out.ndim == 0 else out


def ln_beta(a, b):
    """ln B(a, b) for a, b > 0."""
    a = _check_positive("ln_beta", a)
    b = _check_positive("ln_beta", b)
    out = _sp.gammaln(a) + _sp.gammaln(b) - _sp.gammaln(a + b)
    return float(out) if np.ndim(out) == 0 else out


def gamma_ratio(x, y):
    """Gamma(x)/Gamma(y) through one exponentiation of a log-gamma difference.

    Either argument may be a negative non-integer; a pole in the numerator
    is not allowed, a pole in the denominator gives zero.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    pole_y = (y <= 0) & (y == np.round(y))
    sign = _sp.gammasgn(x) * np.where(pole_y, 1.0, _sp.gammasgn(y))
    with np.errstate(invalid="ignore", over="ignore"):
        out = sign * np.exp(_sp.gammaln(x) - np.where(pole_y, 0.0, _sp.gammaln(y)))
    out = np.where(pole_y, 0.0, out)
    return float(out) if out.ndim == 0 else out
