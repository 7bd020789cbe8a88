"""Potentials: Legendre truncation q_L and re-expansion in the Jacobi basis.

The solver never uses ``q`` itself.  It uses the degree-``L`` Legendre
partial sum ``q_L``, which has the same mean as ``q`` and, being a
polynomial, lets the potential matrix be assembled exactly.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre as npleg

from .expr import Node, parse
from .jacobi import spectral_basis
from .quadrature import gauss_jacobi, gauss_legendre

MAX_DEGREE = 128
DEFAULT_TOL = 1e-15


class NoDecay(ValueError):
    """Legendre coefficients do not decay below the tolerance by MAX_DEGREE."""


def _as_callable(q):
    return parse(q) if isinstance(q, str) else q


def chebyshev_points(n):
    """n Chebyshev extreme points on [-1, 1], ascending."""
    return -np.cos(np.pi * np.arange(n) / (n - 1))


def _folded_moments(rule, values, V):
    """sum_i w_i f(x_i) V[i, j] for a mirror-symmetric rule, split by parity.

    Even columns see the even part of f and odd columns the odd part, both
    summed over the non-negative nodes only, so an exactly even (odd) f gives
    exactly zero odd (even) moments.
    """
    n = len(rule.nodes)
    half = n // 2
    pos = slice(n - half, n)
    mirrored = values[:half][::-1]
    w = 2.0 * rule.weights[pos]
    even = (w * (0.5 * (values[pos] + mirrored))) @ V[pos]
    odd = (w * (0.5 * (values[pos] - mirrored))) @ V[pos]
    if n % 2:
        even = even + rule.weights[half] * values[half] * V[half]
    j = np.arange(V.shape[1])
    return np.where(j % 2 == 0, even, odd)


def legendre_project(q, L, n_quad=None):
    """Coefficients q~_0..q~_L of the Legendre partial sum of q.

    Gauss-Legendre with ``max(L+6, 12)`` nodes, i.e. degree of precision at
    least ``max(2L+1, 11)``.
    """
    q = _as_callable(q)
    L = int(L)
    if L < 0:
        raise ValueError("degree must be non-negative")
    rule = gauss_legendre(n_quad or max(L + 6, 12))
    values = np.broadcast_to(np.asarray(q(rule.nodes), dtype=float), rule.nodes.shape)
    V = npleg.legvander(rule.nodes, L)
    j = np.arange(L + 1)
    return (j + 0.5) * _folded_moments(rule, values, V)


def choose_L(q, tol=DEFAULT_TOL):
    """Smallest L whose next two Legendre coefficients are at rounding level.

    Coefficient ``j`` counts as negligible when
    ``|q~_j| <= tol * (2j+1) * max|q|``; ``(2j+1) max|q|`` is the size of the
    rounding error any quadrature of ``q~_j`` carries, so ``tol`` near machine
    epsilon asks for ``||q - q_L||_inf`` at machine-precision level.
    """
    q = _as_callable(q)
    if not tol > 0:
        raise ValueError("tol must be positive")
    rule = gauss_legendre(MAX_DEGREE + 40)
    sup = float(np.abs(np.broadcast_to(q(rule.nodes), rule.nodes.shape)).max())
    if sup == 0.0:
        return 0
    coeffs = legendre_project(q, MAX_DEGREE + 2, n_quad=MAX_DEGREE + 40)
    j = np.arange(len(coeffs))
    small = np.abs(coeffs) <= tol * (2 * j + 1) * sup
    ok = np.nonzero(small[1:-1] & small[2:])[0]
    if len(ok) == 0:
        raise NoDecay(
            f"Legendre coefficients still above rounding level at degree {MAX_DEGREE}; "
            "the potential is probably not analytic near [-1, 1]"
        )
    return int(ok[0])


def jacobi_reexpand(legendre_coeffs, basis):
    """Coefficients of q_L in the P^(alpha/2) basis (exact for degree L)."""
    c = np.atleast_1d(np.asarray(legendre_coeffs, dtype=float))
    L = len(c) - 1
    if basis.n_max < L + 1:
        basis = spectral_basis(basis.alpha, L + 1)
    half = 0.5 * basis.alpha
    rule = gauss_jacobi(half, half, L + 1)
    values = npleg.legval(rule.nodes, c)
    P = basis.eval_all(rule.nodes)[: L + 1]
    return _folded_moments(rule, values, P.T) / basis.sigma[: L + 1]


@dataclass(frozen=True, eq=False)
class PotentialModel:
    """A potential together with its Legendre truncation.

    ``jacobi_coeffs(alpha)`` gives the Jacobi re-expansion for one order.
    """

    ast: Node
    L: int
    legendre_coeffs: np.ndarray
    sup_error_estimate: float
    text: str = ""
    _jacobi: dict = field(default_factory=dict, repr=False)

    @property
    def mean(self):
        return float(self.legendre_coeffs[0])

    def __call__(self, x):
        return npleg.legval(np.asarray(x, dtype=float), self.legendre_coeffs)

    def exact(self, x):
        return self.ast(x)

    def jacobi_coeffs(self, alpha):
        key = float(alpha)
        if key not in self._jacobi:
            gamma = jacobi_reexpand(self.legendre_coeffs, spectral_basis(key, self.L + 1))
            gamma.setflags(write=False)
            self._jacobi[key] = gamma
        return self._jacobi[key]

    @property
    def oscillation_l2(self):
        """||q_L - mean||_2 on (-1, 1)."""
        j = np.arange(1, self.L + 1)
        return math.sqrt(float(np.sum(self.legendre_coeffs[1:] ** 2 * 2.0 / (2 * j + 1))))

    def parity(self):
        """'even', 'odd' or None, judged from the Legendre coefficients."""
        c = self.legendre_coeffs
        scale = np.abs(c).max()
        if scale == 0.0 or np.all(np.abs(c[1::2]) <= 1e-13 * scale):
            return "even"
        if np.all(np.abs(c[0::2]) <= 1e-13 * scale):
            return "odd"
        return None


def sup_error(q, coeffs, n_points=257):
    x = chebyshev_points(n_points)
    return float(np.abs(q(x) - npleg.legval(x, coeffs)).max())


def potential_model(q, L=None, tol=DEFAULT_TOL):
    """Build a :class:`PotentialModel` from an expression string or AST."""
    text = q if isinstance(q, str) else str(q)
    ast = _as_callable(q)
    if L is None:
        L = choose_L(ast, tol)
    coeffs = legendre_project(ast, L)
    coeffs.setflags(write=False)
    return PotentialModel(ast, int(L), coeffs, sup_error(ast, coeffs), text)
