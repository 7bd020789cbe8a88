"""Gauss-Jacobi rules from the Golub-Welsch eigenproblem."""

import math
from dataclasses import dataclass

import numpy as np

from .linalg import SymTridiag, tridiag_eig
from .special import ln_beta


class NonFiniteSample(ArithmeticError):
    """An integrand returned a non-finite value at a quadrature node."""


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    weight_exponents: tuple

    def __len__(self):
        return len(self.nodes)

    def integrate(self, f):
        return integrate(self, f)


def jacobi_recurrence(a, b, n):
    """Diagonal and off-diagonal of the Jacobi matrix for weight (1-x)^a (1+x)^b."""
    k = np.arange(n, dtype=float)
    s = 2.0 * k + a + b
    diag = np.empty(n)
    diag[0] = (b - a) / (a + b + 2.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        diag[1:] = (b * b - a * a) / (s[1:] * (s[1:] + 2.0))
    if a == b:
        diag[:] = 0.0
    j = np.arange(1, n, dtype=float)
    t = 2.0 * j + a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        beta = 4.0 * j * (j + a) * (j + b) * (j + a + b) / (t * t * (t + 1.0) * (t - 1.0))
    if n > 1:
        # j = 1 written without the (j+a+b)/(t-1) factor, which is 0/0 when a+b = -1
        beta[0] = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b) ** 2 * (3.0 + a + b))
    return diag, np.sqrt(beta)


def zeroth_moment(a, b):
    return math.exp((a + b + 1.0) * math.log(2.0) + ln_beta(a + 1.0, b + 1.0))


def gauss_jacobi(a, b, n):
    """n-point Gauss rule for the weight (1-x)^a (1+x)^b on (-1, 1)."""
    a, b, n = float(a), float(b), int(n)
    if a <= -1.0 or b <= -1.0:
        raise ValueError(f"weight exponents must exceed -1, got ({a}, {b})")
    if n < 1:
        raise ValueError("a quadrature rule needs at least one node")
    diag, off = jacobi_recurrence(a, b, n)
    pairs = tridiag_eig(SymTridiag(diag, off), want_vectors=True)
    nodes = pairs.values
    weights = zeroth_moment(a, b) * pairs.vectors[0] ** 2
    if n > 1:
        nodes, weights = _polish(diag, off, nodes, zeroth_moment(a, b))
    if a == b:
        # exact mirror symmetry
        half = n // 2
        nodes[n - half:] = 0.5 * (nodes[n - half:] - nodes[:half][::-1])
        nodes[:half] = -nodes[n - half:][::-1]
        if n % 2:
            nodes[half] = 0.0
        w = 0.5 * (weights[:half] + weights[n - half:][::-1])
        weights[:half] = w
        weights[n - half:] = w[::-1]
    return QuadratureRule(nodes, weights, (a, b))


def _orthonormal(diag, off, x):
    """p_0..p_{n-1}(x) orthonormal up to a constant, p_n up to a positive factor, and p_n'."""
    n = len(diag)
    p_prev, p = np.zeros_like(x), np.ones_like(x)
    d_prev, d = np.zeros_like(x), np.zeros_like(x)
    squares = np.ones_like(x)
    for k in range(n):
        beta_next = off[k] if k < n - 1 else 1.0
        beta_k = off[k - 1] if k > 0 else 0.0
        p_next = ((x - diag[k]) * p - beta_k * p_prev) / beta_next
        d_next = (p + (x - diag[k]) * d - beta_k * d_prev) / beta_next
        p_prev, p, d_prev, d = p, p_next, d, d_next
        if k < n - 1:
            squares += p * p
    return p, d, squares


def _polish(diag, off, nodes, mu0):
    # Two Newton steps on p_n, then Christoffel weights mu0 / sum_k p_k^2;
    # eigenvector-based weights lose a few digits as n grows.
    x = nodes.copy()
    for _ in range(2):
        p, d, _ = _orthonormal(diag, off, x)
        x = x - p / d
    _, _, squares = _orthonormal(diag, off, x)
    return x, mu0 / squares


def gauss_legendre(n):
    return gauss_jacobi(0.0, 0.0, n)


def integrate(rule, f):
    """sum_i w_i f(x_i); ``f`` is called once on the array of nodes."""
    values = np.asarray(f(rule.nodes), dtype=float)
    if values.shape != rule.nodes.shape:
        values = np.broadcast_to(values, rule.nodes.shape)
    if not np.all(np.isfinite(values)):
        raise NonFiniteSample("integrand is not finite at every quadrature node")
    return float(rule.weights @ values)
