import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lqgnest.params import (
    ModelParams,
    SigmaFamily,
    alpha_from_sigma,
    bisect_monotone,
    q_of,
    rho_from_sigma,
    rho_min,
    sigma_from_alpha,
    sigma_from_rho,
    sigma_threshold,
    validate_sigma_family,
)
from lqgnest.radius import cr_moment
from lqgnest.specfun import DomainError

kappas = st.one_of(st.floats(2.72, 3.98), st.floats(4.02, 7.95))


def test_model_params_derived():
    p = ModelParams(3.0, 0.2)
    assert p.gamma == pytest.approx(math.sqrt(3.0))
    assert p.nu == pytest.approx(4 / 3)
    assert p.simple
    assert p.neg_cos == pytest.approx(-math.cos(4 * math.pi / 3))
    q = ModelParams(6.0)
    assert q.gamma == pytest.approx(4 / math.sqrt(6.0))
    assert not q.simple
    assert q.q_gamma == pytest.approx(q_of(q.gamma))


@pytest.mark.parametrize("kw", [{"kappa": 2.5}, {"kappa": 8.0}, {"kappa": 4.0}, {"kappa": 3.0, "beta": 1.5}])
def test_model_params_domain(kw):
    with pytest.raises(DomainError):
        ModelParams(**kw)


def test_kappa_four_allowed_on_request():
    assert ModelParams(4.0, allow_four=True).nu == 1.0


@settings(max_examples=60, deadline=None)
@given(kappas, st.floats(0.001, 0.999))
def test_sigma_alpha_round_trip(k, frac):
    s = -6.0 + frac * (sigma_threshold(k) - 1e-6 + 6.0)
    a = alpha_from_sigma(k, s)
    assert sigma_from_alpha(k, a) == pytest.approx(s, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(kappas, st.floats(0.001, 0.999))
def test_sigma_rho_round_trip_and_moment(k, frac):
    s = -5.0 + frac * (sigma_threshold(k) - 1e-4 + 5.0)
    rho = rho_from_sigma(k, s)
    assert rho > rho_min(k)
    assert sigma_from_rho(k, rho) == pytest.approx(s, abs=1e-9)
    assert math.exp(s) * cr_moment(k, rho) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("k", [3.0, 3.6, 5.0, 7.0])
def test_closed_forms_agree_with_bisection(k):
    for s in (-2.0, -0.3, sigma_threshold(k) - 0.05):
        a = alpha_from_sigma(k, s)
        lo, hi = q_of(min(math.sqrt(k), 4 / math.sqrt(k))) - math.sqrt(k) / 4, q_of(min(math.sqrt(k), 4 / math.sqrt(k)))
        ab = bisect_monotone(lambda x: sigma_from_alpha(k, x), s, lo + 1e-12, hi - 1e-12)
        assert ab == pytest.approx(a, abs=1e-9)
        r = rho_from_sigma(k, s)
        rb = bisect_monotone(lambda x: sigma_from_rho(k, x), s, rho_min(k) + 1e-12, 50.0)
        assert rb == pytest.approx(r, abs=1e-9)


def test_sigma_threshold_and_monotone():
    k = 3.5
    with pytest.raises(DomainError):
        alpha_from_sigma(k, sigma_threshold(k))
    ss = [-3.0, -1.0, 0.0, sigma_threshold(k) - 0.01]
    al = [alpha_from_sigma(k, s) for s in ss]
    rh = [rho_from_sigma(k, s) for s in ss]
    assert al == sorted(al) and rh == sorted(rh)


def test_sigma_family_defaults_and_restrict():
    s = SigmaFamily.from_points({1: -0.5, 2: -0.3}, default_gap=0.2)
    assert s(frozenset()) == 0.0
    assert s([1, 2]) == pytest.approx(-0.7)
    assert sorted(map(sorted, s.subsets(nonempty=True))) == [[1], [1, 2], [2]]
    r = s.restrict([2])
    assert r.A == (2,) and r([2]) == -0.3
    with pytest.raises(KeyError):
        SigmaFamily((1, 2), {frozenset([1]): 0.1})([2])
    with pytest.raises(DomainError):
        SigmaFamily((1,), {frozenset([3]): 0.1})


@settings(max_examples=30, deadline=None)
@given(st.dictionaries(st.integers(1, 4), st.floats(-3, 0.5), min_size=1, max_size=4), st.floats(-2, 0))
def test_sigma_family_json_round_trip(points, extra):
    A = sorted(points)
    fam = SigmaFamily.from_points(points, {tuple(A): extra} if len(A) > 1 else None)
    back = SigmaFamily.from_json(fam.to_json())
    assert back.A == fam.A
    for B in fam.subsets():
        assert back(B) == fam(B)
    json.loads(fam.to_json())


def test_validate_sigma_family():
    k = 3.5
    good = SigmaFamily.single(-0.5)
    assert validate_sigma_family(k, good) == []
    bad = SigmaFamily((1, 2), {frozenset([1]): sigma_threshold(k) + 0.1, frozenset(): 0.3})
    msgs = validate_sigma_family(k, bad)
    assert len(msgs) == 3  # empty set, point 1 too large, point 2 missing
