import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from lqgnest import specfun
from lqgnest.specfun import DomainError

TOL = max(1e-7, 10 * specfun.DEFAULT_Q.tol)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.02, 0.98), st.floats(-0.95, 8.0))
def test_cosh_ratio_closed_form(alpha, rho):
    q = specfun.cosh_ratio_integral(alpha, rho, "quadrature")
    assert q == pytest.approx(specfun.cosh_ratio_integral(alpha, rho), abs=TOL)


@pytest.mark.parametrize("rho", [1 - 3e-5, 1.0, 1 + 3e-5])
def test_cosh_ratio_branch_point_is_smooth(rho):
    a = 0.37
    assert specfun.cosh_ratio_integral(a, rho) == pytest.approx(specfun.cosh_ratio_integral(a, rho, "quadrature"), abs=1e-10)
    assert specfun.cosh_ratio_sq_integral(1.4, rho) == pytest.approx(
        specfun.cosh_ratio_sq_integral(1.4, rho, "quadrature"), abs=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 1.95).filter(lambda b: abs(b - 1) > 0.02), st.floats(-0.9, 6.0))
def test_cosh_ratio_sq(beta, rho):
    q = specfun.cosh_ratio_sq_integral(beta, rho, "quadrature")
    assert q == pytest.approx(specfun.cosh_ratio_sq_integral(beta, rho), abs=TOL)


@settings(max_examples=25, deadline=None)
@given(st.floats(1.05, 1.95), st.floats(-0.9, 3.0))
def test_levy_symbol_compensated(nu, rho):
    q = specfun.levy_symbol_integral(nu, rho, True, "quadrature")
    assert q == pytest.approx(specfun.levy_symbol_integral(nu, rho, True), abs=TOL)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(-0.9, 3.0))
def test_levy_symbol_plain_and_bessel_laplace(nu, rho):
    q = specfun.levy_symbol_integral(nu, rho, False, "quadrature")
    assert q == pytest.approx(specfun.levy_symbol_integral(nu, rho, False), abs=TOL)
    q = specfun.bessel_laplace_integral(nu, rho, "quadrature")
    assert q == pytest.approx(specfun.bessel_laplace_integral(nu, rho), abs=TOL)


def test_bessel_laplace_against_scipy_quad():
    nu, rho = 0.4, 0.3
    ref = integrate.quad(lambda h: math.exp(-rho * h) * special.kv(nu, h), 0, np.inf, limit=400)[0]
    assert specfun.bessel_laplace_integral(nu, rho) == pytest.approx(ref, rel=1e-8)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([2.9, 3.3, 3.8, 4.4, 5.5, 7.2]), st.floats(0.0, 1.0), st.floats(0.05, 0.95))
def test_a_theta_combined_identity(kappa, frac, u):
    nu = 4 / kappa
    theta = -0.95 + frac * (nu - 0.05 + 0.95)
    lhs = specfun.a_theta_u(kappa, theta, u, combined=True)
    assert lhs == pytest.approx(specfun.a_theta_identity_rhs(kappa, theta), abs=TOL)


@pytest.mark.parametrize("kappa", [3.0, 3.7, 4.5, 6.5])
@pytest.mark.parametrize("u", [0.1, 0.5, 0.83])
def test_a_theta_vanishes_at_minus_one_minus_nu(kappa, u):
    assert abs(specfun.a_theta_u(kappa, -1 - 4 / kappa, u)) < 1e-7


@pytest.mark.parametrize("kappa,theta,u", [(3.2, 0.5, 0.3), (5.0, 0.2, 0.6), (6.0, -0.4, 0.45)])
def test_a_theta_quadrature_matches_integration_by_parts(kappa, theta, u):
    q = specfun.a_theta_u(kappa, theta, u, mode="quadrature")
    c = specfun.a_theta_u(kappa, theta, u, mode="closed_form")
    assert q == pytest.approx(c, abs=1e-8)


def test_a_theta_compensation_regime_is_enforced():
    with pytest.raises(DomainError):
        specfun.a_theta_u(3.0, 0.5, 0.5, compensated=False)
    with pytest.raises(DomainError):
        specfun.a_theta_u(5.0, 0.5, 0.5, compensated=True)
    with pytest.raises(DomainError):
        specfun.a_theta_u(5.0, 0.9, 0.5)


@pytest.mark.parametrize("nu,c,lam", [(1.5, 1.0, 0.3), (1.5, 1.0, 3.0), (1.2, 0.4, 0.1), (1.8, 2.0, 7.0)])
def test_rho_lambda_inverts_the_quadrature_map(nu, c, lam):
    rho = specfun.rho_lambda(nu, c, lam)
    assert specfun.lambda_of_rho(nu, c, rho, "quadrature") == pytest.approx(lam, rel=1e-8)
    assert specfun.lambda_of_rho(nu, c, rho) == pytest.approx(lam, rel=1e-12)


@pytest.mark.parametrize("nu", [0.3, 0.8, 1.25, 1.6])
def test_kbar_limits(nu):
    assert specfun.kbar(nu, 1e-12) == pytest.approx(1.0, abs=1e-6)
    x = np.array([0.1, 1.0, 5.0])
    ref = 2 * (x / 2) ** nu * special.kv(nu, x) / special.gamma(nu)
    np.testing.assert_allclose(specfun.kbar(nu, x), ref, rtol=1e-12)
    assert np.all(np.diff(specfun.kbar(nu, np.geomspace(1e-3, 50, 40))) < 0)


def test_kbar_minus_one_small_x():
    nu, x = 0.8, 1e-3
    assert specfun.kbar_minus_one(nu, x) == pytest.approx(specfun.kbar(nu, x) - 1.0, rel=1e-6)


def test_scaled_bessel_large_argument():
    x = np.array([1e7, 5e8, 1e13])
    v = specfun._kve(0.7, x)
    assert np.all(np.isfinite(v))
    np.testing.assert_allclose(v[:1], special.kve(0.7, x[:1]), rtol=1e-12)
    assert v[2] == pytest.approx(math.sqrt(math.pi / (2 * x[2])), rel=1e-12)


@pytest.mark.parametrize("method", ["cosh", "inverse_gamma"])
@pytest.mark.parametrize("nu,x", [(0.3, 1.7), (1.25, 0.05), (0.8, 20.0)])
def test_bessel_k_integral_representations(method, nu, x):
    assert specfun.bessel_k(nu, x, method=method) == pytest.approx(special.kv(nu, x), rel=1e-9)


@pytest.mark.parametrize("x,a,b", [(0.3, 0.7, -0.4), (0.6, 1.5, -1.3), (0.2, 0.4, 2.0)])
def test_beta_inc_negative_second_argument(x, a, b):
    ref = integrate.quad(lambda t: t ** (a - 1) * (1 - t) ** (b - 1), 0, x, limit=200)[0]
    assert specfun.beta_inc(x, a, b) == pytest.approx(ref, rel=1e-9)


def test_gamma_on_negative_non_integers():
    assert specfun.gamma(-1.5) == pytest.approx(4 * math.sqrt(math.pi) / 3, rel=1e-14)
    with pytest.raises(DomainError):
        specfun.gamma(-2.0)


def test_domain_errors():
    with pytest.raises(DomainError):
        specfun.cosh_ratio_integral(1.2, 0.0)
    with pytest.raises(DomainError):
        specfun.cosh_ratio_integral(0.5, -1.0)
    with pytest.raises(DomainError):
        specfun.cosh_ratio_sq_integral(1.0, 0.5)
    with pytest.raises(DomainError):
        specfun.rho_lambda(0.5, 1.0, 1.0)


def test_quadrature_spec_validation():
    with pytest.raises(DomainError):
        specfun.QuadratureSpec(epsabs=-1.0)
