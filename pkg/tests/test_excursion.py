import math

import numpy as np
import pytest
from scipy import integrate

from lqgnest import excursion as ex
from lqgnest.specfun import DomainError, gamma, kbar


def test_cumulants_match_quadrature():
    nu, ell, d = 1.4, 2.0, 1e-2
    cm = ex._Cumulants(nu, ell, d)
    g = gamma(-nu)
    assert cm.mean_count == pytest.approx(ell * integrate.quad(lambda h: h ** (-1 - nu), d, np.inf)[0] / g)
    assert cm.m_big == pytest.approx(ell * integrate.quad(lambda h: h ** (-nu), d, np.inf)[0] / g)
    assert cm.var == pytest.approx(ell * integrate.quad(lambda h: h ** (1 - nu), 0, d)[0] / g)
    y = np.linspace(-8, 8, 4001) * math.sqrt(cm.var)
    assert integrate.trapezoid(cm.density(y), y) == pytest.approx(1.0, abs=1e-3)
    assert cm.density(y).max() <= cm.density_bound()


def test_excursion_sample_and_csv(rng):
    s = ex.excursion_sample(1.5, 2.0, rng=rng)
    assert np.all(np.diff(s.heights) <= 0)
    assert np.all(s.scaled >= s.delta)
    np.testing.assert_allclose(s.scaled, 2.0 ** (1 / 1.5) * s.heights)
    assert 0 < s.acceptance <= 1
    back = ex.ExcursionJumps.from_csv(s.to_csv())
    np.testing.assert_allclose(back.scaled, s.scaled, rtol=1e-15)
    assert back.count_above(0.1) == s.count_above(0.1)
    with pytest.raises(ValueError):
        ex.ExcursionJumps.from_csv("height\n1.0\n")


def test_samples_give_the_product_functional(rng):
    # plain average over accept-reject samples (independent of the bridge weighting)
    nu, c, ell = 1.5, 1.0, 1.0
    cm = ex._Cumulants(nu, ell, ex.default_delta(nu, ell))
    mG = cm.small_moments(ex._kbar_G(nu, c))[0]
    v = np.array([np.prod(kbar(nu, c * ex.excursion_sample(nu, ell, rng=rng).scaled)) for _ in range(1500)])
    v *= math.exp(-mG)
    se = v.std() / math.sqrt(v.size)
    assert abs(v.mean() - ex.product_closed_form(nu, c, ell)) < 3 * se


@pytest.mark.parametrize("nu,c,ell", [(1.5, 1.0, 1.0), (1.25, 0.5, 2.0)])
def test_product_functional(nu, c, ell):
    r = ex.excursion_product_functional(nu, c, ell, n=20000, seed=11, details=True)
    assert r.estimate.within(ex.product_closed_form(nu, c, ell))
    assert 0 < r.ess <= 20000


def test_marked_functional():
    nu, c, theta, ell = 1.5, 1.0, 1.3, 1.0
    e = ex.excursion_marked_functional(nu, c, theta, ell, n=20000, seed=3)
    assert e.within(ex.marked_closed_form(nu, c, theta, ell))


def test_marked_constant_is_positive_and_matches_formula():
    nu, th = 1.5, 1.3
    raw = (math.sqrt(1 / nu) * gamma(-1 / nu) * math.sin(math.pi * (1 + 1 / nu - th))
           / (math.sqrt(nu) * gamma(-nu) * math.sin(math.pi * (1 + nu - th * nu))))
    assert raw < 0
    assert ex.marked_constant(nu, th) == pytest.approx(-raw)


def test_reproducible_with_seed():
    a = ex.excursion_product_functional(1.5, 1.0, 1.0, n=3000, seed=9)
    b = ex.excursion_product_functional(1.5, 1.0, 1.0, n=3000, seed=9)
    assert a == b


def test_laplace_identity_pure_stable():
    res = ex.laplace_identity_check(1.5, 0.7, n=4000, seed=2)
    assert res.rho == pytest.approx(0.7 ** (1 / 1.5))
    assert abs(res.product_residual.estimate) <= 3 * res.product_residual.stderr


def test_domain_errors():
    with pytest.raises(DomainError):
        ex.excursion_sample(0.8, 1.0)
    with pytest.raises(DomainError):
        ex.excursion_marked_functional(1.5, 1.0, 2.0, 1.0, n=10)
    with pytest.raises(DomainError):
        ex.excursion_product_functional(1.5, -1.0, 1.0, n=10)
    with pytest.raises(DomainError):
        ex.laplace_identity_check(1.5, 0.0, n=10)
