import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracsturm.potential import chebyshev_points, potential_model
from fracsturm.quadrature import gauss_legendre
from fracsturm.solver import (
    EigenSolution,
    SolveRequest,
    ZeroSum,
    coefficient_asymptote,
    eigenfunction,
    eigenvalues,
    solve,
    well_asymptote,
)

PROPERTY_ALPHAS = [0.25, 0.75, 1.25, 1.75, 2.0]

# lowest eigenvalues of the alpha = 1 problem on (-1, 1), from the published
# high-accuracy table for the Cauchy process on an interval
CAUCHY_INTERVAL = [1.1577738836977, 2.7547547422, 4.3168010665, 5.8921474709, 7.4601757394]


def test_classical_limit():
    lam = solve(SolveRequest(2.0, 64, 9)).lambdas
    k = np.arange(10)
    np.testing.assert_allclose(lam, ((k + 1) * np.pi / 2) ** 2, rtol=1e-12)


def test_cauchy_interval_values():
    lam = eigenvalues(1.0, 256)[:5]
    np.testing.assert_allclose(lam, CAUCHY_INTERVAL, rtol=1e-9)


def test_well_law_alpha_one():
    lam = solve(SolveRequest(1.0, 256, 60)).lambdas
    k = np.arange(20, 61)
    gap = np.abs(lam[k] - well_asymptote(1.0, k))
    assert np.all(gap * (k + 1) <= 1.0)


def test_well_law_index_forty():
    lam = solve(SolveRequest(1.0, 512, 40)).lambdas
    assert abs(lam[40] - (41 * math.pi / 2 - math.pi / 8)) <= 0.05


def test_well_law_exact_at_two():
    k = np.arange(10)
    np.testing.assert_allclose(well_asymptote(2.0, k), ((k + 1) * math.pi / 2) ** 2, rtol=1e-15)


def test_convergence_order_alpha_one_and_a_half():
    q = potential_model("2*x*(x+1)", L=2)
    ref = solve(SolveRequest(1.5, 1280, 5, q)).lambdas[5]
    errs = [abs(solve(SolveRequest(1.5, N, 5, q)).lambdas[5] - ref) for N in (40, 80)]
    order = math.log2(errs[0] / errs[1])
    assert abs(order - 8.0) <= 1.0


def test_eigenfunction_vanishes_at_boundary():
    sol = solve(SolveRequest(0.6, 48, 4, potential_model("exp(x)")))
    for k in range(5):
        y = eigenfunction(sol, k)
        assert y(1.0) == 0.0 and y(-1.0) == 0.0 and y(1.5) == 0.0
        assert np.all(y(np.array([-2.0, 1.0, 3.0])) == 0.0)


def test_classical_ground_state_shape():
    y = eigenfunction(solve(SolveRequest(2.0, 64, 0)), 0)
    x = chebyshev_points(33)
    np.testing.assert_allclose(y(x), np.cos(np.pi * x / 2), atol=1e-7)


@pytest.mark.parametrize("alpha", [1.0, 1.5, 2.0])
def test_eigenfunction_unit_l2_norm(alpha):
    sol = solve(SolveRequest(alpha, 40, 3, potential_model("2*x*(x+1)", L=2)))
    rule = gauss_legendre(3000)
    for k in range(4):
        y = eigenfunction(sol, k)
        assert rule.integrate(lambda x: y(x) ** 2) == pytest.approx(1.0, abs=1e-8)


def test_eigenfunction_index_error():
    sol = solve(SolveRequest(1.0, 16, 2))
    with pytest.raises(IndexError):
        eigenfunction(sol, 3)


def test_sign_convention():
    sol = solve(SolveRequest(1.3, 32, 8, potential_model("sin(2*x)")))
    for k in range(9):
        col = sol.coeffs[:, k]
        assert col[np.nonzero(np.abs(col) > 1e-12)[0][0]] > 0


def test_trust_flags():
    sol = solve(SolveRequest(1.0, 30, 29))
    assert np.array_equal(sol.trusted, np.arange(30) < 10)
    sol = solve(SolveRequest(1.0, 30, 29, trust_fraction=0.5))
    assert sol.trusted.sum() == 15


@pytest.mark.parametrize(
    "kwargs",
    [dict(alpha=0.0, N=8, k_max=1), dict(alpha=1.0, N=0, k_max=0), dict(alpha=1.0, N=8, k_max=8),
     dict(alpha=1.0, N=8, k_max=-1), dict(alpha=1.0, N=8, k_max=1, trust_fraction=0.0)],
)
def test_request_validation(kwargs):
    with pytest.raises(ValueError):
        SolveRequest(**kwargs)


def test_eigenvalues_match_solve():
    q = potential_model("exp(pi*(x+1)/2)", L=15)
    full = eigenvalues(0.8, 60, q)
    part = solve(SolveRequest(0.8, 60, 19, q)).lambdas
    np.testing.assert_allclose(part, full[:20], rtol=1e-12)
    assert np.all(np.diff(full) >= 0)


# -- properties ------------------------------------------------------------------


@pytest.fixture(scope="module", params=PROPERTY_ALPHAS)
def alpha(request):
    return request.param


def test_residuals(alpha):
    sol = solve(SolveRequest(alpha, 64, 63, potential_model("exp(pi*(x+1)/2)", L=15)))
    bound = 1e-8 * np.maximum(1.0, np.abs(sol.lambdas))
    assert np.all(sol.residuals[sol.trusted] <= bound[sol.trusted])


def test_b_orthonormal(alpha):
    from fracsturm.assembly import assemble_B
    from fracsturm.jacobi import spectral_basis

    sol = solve(SolveRequest(alpha, 64, 63, potential_model("-cos(3*x)+sin(2*x)", L=18)))
    B = assemble_B(spectral_basis(alpha, 64), 64)
    X = sol.coeffs
    assert np.abs(X.T @ B @ X - np.eye(64)).max() <= 1e-10


def test_parity_decoupling(alpha):
    sol = solve(SolveRequest(alpha, 64, 20, potential_model("cos(3*x)+x^2")))
    for k in np.nonzero(sol.trusted)[0]:
        col = sol.coeffs[:, k]
        assert min(np.abs(col[0::2]).max(), np.abs(col[1::2]).max()) < 1e-9


def test_constant_shift(alpha):
    base = solve(SolveRequest(alpha, 64, 21, potential_model("exp(x)", L=13))).lambdas
    moved = solve(SolveRequest(alpha, 64, 21, potential_model("exp(x) + 3", L=13))).lambdas
    np.testing.assert_allclose(moved - base, 3.0, atol=1e-10)


def test_conditioning_bound(alpha):
    q = potential_model("exp(x)", L=13)
    qh = potential_model("exp(x) + 0.05*sin(5*x) - 0.02*x^2", L=24)
    x = np.concatenate([chebyshev_points(4001), np.linspace(-1, 1, 4001)])
    gap = np.abs(q(x) - qh(x)).max()
    a = solve(SolveRequest(alpha, 64, 21, q)).lambdas
    b = solve(SolveRequest(alpha, 64, 21, qh)).lambdas
    assert np.all(np.abs(a - b) <= gap * (1 + 1e-6))


def test_monotone_in_size(alpha):
    coarse = solve(SolveRequest(alpha, 48, 15)).lambdas
    fine = solve(SolveRequest(alpha, 96, 15)).lambdas
    assert np.all(fine <= coarse + 1e-10)


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=0.1, max_value=2.0), st.floats(min_value=-5.0, max_value=5.0))
def test_constant_potential_shifts_spectrum(alpha, c):
    base = eigenvalues(alpha, 24)
    moved = eigenvalues(alpha, 24, potential_model(repr(c), L=0))
    np.testing.assert_allclose(moved, base + c, atol=1e-10 * max(1.0, np.abs(base).max()))


@settings(max_examples=15, deadline=None)
@given(st.floats(min_value=1.0, max_value=2.0))
def test_simple_increasing_spectrum(alpha):
    lam = eigenvalues(alpha, 40)[:13]
    assert np.all(np.diff(lam) > 0)


# -- coefficient asymptotics -------------------------------------------------------


def test_even_potential_has_no_nu2():
    q = potential_model("cos(2*x)")
    ca = coefficient_asymptote(solve(SolveRequest(1.2, 64, 6, q)), 6, q)
    assert ca.nu2 == 0.0
    assert ca.coeffs.sum() == pytest.approx(1.0, rel=1e-12)


def test_model_tracks_coefficients():
    q = potential_model("exp(x)")
    sol = solve(SolveRequest(1.5, 640, 10, q))
    ca = coefficient_asymptote(sol, 10, q)
    n = np.arange(30, 321)
    ratio = np.abs(ca.predicted[n] / ca.coeffs[n])
    assert ratio.min() >= 0.5 and ratio.max() <= 2.0


def test_zero_sum():
    from fracsturm.solver import SolveRequest as R

    fake = EigenSolution(R(1.0, 2, 0), np.array([1.0]), np.array([[1.0], [-1.0]]), np.array([True]), np.zeros(1))
    with pytest.raises(ZeroSum):
        coefficient_asymptote(fake, 0)
