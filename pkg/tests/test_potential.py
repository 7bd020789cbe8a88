import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import legendre as npleg

from fracsturm.expr import EvalDomain, parse
from fracsturm.jacobi import spectral_basis
from fracsturm.potential import (
    NoDecay,
    chebyshev_points,
    choose_L,
    jacobi_reexpand,
    legendre_project,
    potential_model,
)

EXAMPLES = ["2*x*(x+1)", "exp(pi*(x+1)/2)", "(x+1)/(2*(x^2+1))", "-cos(3*x)+sin(2*x)", "exp(x)"]


def test_project_constant():
    np.testing.assert_allclose(legendre_project("1", 3), [1, 0, 0, 0], atol=1e-14)


def test_project_x():
    np.testing.assert_allclose(legendre_project("x", 3), [0, 1, 0, 0], atol=1e-14)


def test_project_quadratic():
    np.testing.assert_allclose(legendre_project("2*x*(x+1)", 2), [2 / 3, 2, 4 / 3], atol=1e-15)


def test_project_oracle_numpy_fit():
    # interpolation at many Chebyshev points converges to the same coefficients
    q = parse("exp(pi*(x+1)/2)")
    x = chebyshev_points(400)
    fit = npleg.legfit(x, q(x), 40)
    np.testing.assert_allclose(legendre_project(q, 15), fit[:16], atol=1e-11)


@pytest.mark.parametrize(
    "text, published_L",
    [("2*x*(x+1)", 2), ("exp(pi*(x+1)/2)", 15), ("-cos(3*x)+sin(2*x)", 18), ("(x+1)/(2*(x^2+1))", 37)],
)
def test_choose_L_near_reference_degrees(text, published_L):
    assert abs(choose_L(text) - published_L) <= 3


@pytest.mark.parametrize("text", EXAMPLES)
def test_choose_L_reaches_rounding_level(text):
    model = potential_model(text)
    q = parse(text)
    scale = np.abs(q(chebyshev_points(257))).max()
    assert model.sup_error_estimate <= 1e-13 * max(1.0, scale)


def test_choose_L_constant_and_zero():
    assert choose_L("3.5") == 0
    assert choose_L("0*x") == 0


def test_choose_L_no_decay():
    with pytest.raises(NoDecay):
        choose_L("abs(x)")


def test_choose_L_rejects_bad_tol():
    with pytest.raises(ValueError):
        choose_L("x", tol=0.0)


def test_projection_propagates_domain_errors():
    with pytest.raises(EvalDomain):
        legendre_project("log(x)", 4)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5, 2.0])
def test_reexpand_unit_vectors(alpha):
    basis = spectral_basis(alpha, 8)
    np.testing.assert_allclose(jacobi_reexpand([1.0, 0, 0], basis), [1, 0, 0], atol=1e-14)
    np.testing.assert_allclose(jacobi_reexpand([0, 1.0, 0], basis), [0, 1, 0], atol=1e-14)


def test_reexpand_quadratic_pointwise():
    basis = spectral_basis(1.0, 3)
    gamma = jacobi_reexpand(legendre_project("2*x*(x+1)", 2), basis)
    x = chebyshev_points(33)
    np.testing.assert_allclose(gamma @ basis.eval_all(x), 2 * x * (x + 1), atol=1e-12)


@pytest.mark.parametrize("text", EXAMPLES)
@pytest.mark.parametrize("alpha", [0.25, 0.9, 1.6, 2.0])
def test_basis_change_consistency(text, alpha):
    model = potential_model(text)
    gamma = model.jacobi_coeffs(alpha)
    x = chebyshev_points(33)
    jac = gamma @ spectral_basis(alpha, len(gamma)).eval_all(x)
    np.testing.assert_allclose(jac, model(x), atol=1e-10)


@pytest.mark.parametrize("text", EXAMPLES)
def test_mean_is_first_coefficient(text):
    model = potential_model(text)
    rule_mean = legendre_project(text, 0, n_quad=200)[0]
    assert model.mean == model.legendre_coeffs[0]
    assert model.mean == pytest.approx(rule_mean, rel=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=40))
def test_mean_independent_of_L(L):
    q = "exp(pi*(x+1)/2)"
    assert legendre_project(q, L)[0] == pytest.approx(legendre_project(q, 60)[0], rel=1e-14)


@pytest.mark.parametrize("text", ["cos(3*x)", "x^4-x^2", "exp(-x^2)"])
def test_even_potential_has_no_odd_coefficients(text):
    c = legendre_project(text, 20)
    assert np.abs(c[1::2]).max() <= 1e-12 * np.abs(c).max()
    assert potential_model(text, L=20).parity() == "even"


@pytest.mark.parametrize("text", ["sin(2*x)", "x^3", "tanh(x)"])
def test_odd_potential_has_no_even_coefficients(text):
    c = legendre_project(text, 21)
    assert np.abs(c[0::2]).max() <= 1e-12 * np.abs(c).max()


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(min_value=-5, max_value=5), min_size=1, max_size=8))
def test_polynomial_round_trip(coeffs):
    text = "+".join(f"({c!r})*x^{i}" for i, c in enumerate(coeffs))
    L = len(coeffs) - 1 + 2
    model = potential_model(text, L=L)
    x = chebyshev_points(33)
    exact = parse(text)(x)
    scale = max(1.0, np.abs(exact).max())
    np.testing.assert_allclose(model(x), exact, atol=1e-12 * scale)


def test_model_is_frozen():
    model = potential_model("x", L=1)
    with pytest.raises(ValueError):
        model.legendre_coeffs[0] = 1.0
    with pytest.raises(ValueError):
        model.jacobi_coeffs(0.5)[0] = 1.0


def test_oscillation_norm():
    # ||x||_2 on (-1, 1) is sqrt(2/3)
    assert potential_model("x + 4", L=1).oscillation_l2 == pytest.approx(np.sqrt(2 / 3), rel=1e-14)
