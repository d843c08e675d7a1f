import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from lqgnest import radius
from lqgnest.params import sigma_threshold
from lqgnest.radius import MCEstimate, RadiusLaw, RenewalSpec
from lqgnest.specfun import DomainError


@pytest.mark.parametrize("k", [3.0, 4.0, 6.0])
def test_moment_basics(k):
    assert radius.cr_moment(k, 0.0) == pytest.approx(1.0, abs=1e-14)
    assert radius.cr_moment(k, radius.rho_min(k) - 0.1) == math.inf
    vals = [radius.cr_moment(k, r) for r in (-0.1, 0.0, 0.5, 2.0)]
    assert vals == sorted(vals, reverse=True)


@settings(max_examples=30, deadline=None)
@given(st.floats(2.8, 7.9), st.floats(0.05, 3.0))
def test_moment_derivative(k, frac):
    r = radius.rho_min(k) + frac
    h = 1e-5
    fd = (radius.cr_moment(k, r + h) - radius.cr_moment(k, r - h)) / (2 * h)
    assert radius.cr_moment_deriv(k, r) == pytest.approx(fd, rel=1e-6, abs=1e-8)


def test_derivative_at_the_branch_point():
    # radicand zero at rho = (kappa (1 - 4/kappa)^2) / 8
    k = 6.0
    r0 = k * (1 - 4 / k) ** 2 / 8
    a = radius.cr_moment_deriv(k, r0)
    b = radius.cr_moment_deriv(k, r0 + 1e-7)
    assert math.isfinite(a) and a == pytest.approx(b, rel=1e-5)


@pytest.mark.parametrize("k", [3.0, 5.0, 7.5])
def test_series_agree(k):
    x = np.array([0.4, 1.0, 2.0, 5.0])
    np.testing.assert_allclose(radius.cr_log_density_series(k, x, 1), radius.cr_log_density_series(k, x, 2), atol=1e-10)


def test_density_mean_is_minus_moment_derivative():
    k = 3.5
    f = lambda x: x * radius.cr_log_density(k, x)
    m = sum(integrate.quad(f, a, b, limit=300)[0] for a, b in ((0, 1), (1, 10), (10, 200)))
    m += integrate.quad(f, 200, np.inf, limit=300)[0]
    assert m == pytest.approx(-radius.cr_moment_deriv(k, 0.0), rel=1e-8)


def test_cdf_monotone_and_limits():
    law = RadiusLaw(6.0)
    x = np.geomspace(0.01, 300, 400)
    F = law.cdf(x)
    assert np.all(np.diff(F) >= -1e-15)
    assert F[0] < 1e-10 and F[-1] == pytest.approx(1.0, abs=1e-12)
    xm = 2.0
    ref = integrate.quad(lambda t: radius.cr_log_density(6.0, t), 0, xm, limit=300)[0]
    assert law.cdf(xm) == pytest.approx(ref, abs=1e-12)


def test_sampler_moment(rng):
    k = 3.0
    x = radius.cr_sample(k, rng, 200_000)
    r = 0.5
    est = MCEstimate.from_samples(np.exp(-r * x))
    assert est.within(radius.cr_moment(k, r))
    assert isinstance(radius.cr_sample(k, rng), float)


def test_nesting_constant_continuous_at_zero_sigma():
    k = 6.0
    v0 = radius.nesting_constant(k, 0.0)
    assert v0 == pytest.approx(radius.nesting_constant(k, 2e-4), rel=1e-3)
    # e^{0 N} = 1 and rho(0) = 0
    assert v0 == pytest.approx(1.0, abs=1e-6)


def test_renewal_estimate_is_reproducible():
    spec = RenewalSpec(6.0, 0.3, 8.0, 20000, seed=5)
    a = radius.nesting_renewal_estimate(spec)
    b = radius.nesting_renewal_estimate(spec)
    assert a == b
    assert a.within(radius.nesting_constant(6.0, 0.3), k=4)


def test_one_point_phi():
    k, s = 3.5, -0.5
    rho = radius.rho_from_sigma(k, s)
    assert radius.one_point_phi(k, s, 0.3 + 0.4j) == pytest.approx((1 - 0.25) ** rho)
    with pytest.raises(DomainError):
        radius.one_point_phi(k, s, 1.0)
    with pytest.raises(DomainError):
        radius.one_point_phi(k, sigma_threshold(k) + 0.1, 0.0)


def test_domain_errors():
    with pytest.raises(DomainError):
        RadiusLaw(8.5)
    with pytest.raises(DomainError):
        radius.cr_log_density(3.0, -1.0)
    with pytest.raises(DomainError):
        RenewalSpec(3.0, 0.0, -1.0)
