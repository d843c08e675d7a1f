import json
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from lqgnest import partition as pt
from lqgnest.levy import MarkedState
from lqgnest.params import ModelParams, SigmaFamily
from lqgnest.specfun import DomainError, kbar


P35 = ModelParams(3.5, 0.3)
FAM = SigmaFamily((1, 2), {frozenset([1]): -0.5, frozenset([2]): -0.3, frozenset([1, 2]): -0.6})


@pytest.mark.parametrize("Lam,ell", [(0.05, 0.5), (1.0, 2.0), (20.0, 1.0)])
def test_w_zero_matches_inverse_gamma(Lam, ell):
    p = ModelParams(3.0, 0.0)
    q = pt.WeightQuery(p, None, Lam, ell)
    assert pt.w_zero(q) == pytest.approx(pt.inverse_gamma_laplace(p, Lam, ell), abs=1e-8)


def test_lambda_zero_values():
    p = ModelParams(5.0, 0.0)
    s = SigmaFamily.single(0.1)
    assert pt.w_zero(pt.WeightQuery(p, None, 0.0, 3.0)) == 1.0
    e = pt.exponent(p, s, [1])
    assert pt.w_one(pt.WeightQuery(p, s, 0.0, 3.0)) == pytest.approx(3.0**e, rel=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.floats(2.7, 7.9), st.floats(0.01, 10), st.floats(0.1, 10), st.floats(-1.0, 0.2))
def test_scaling_relation(kappa, Lam, ell, sig):
    assume(kappa != 4.0)
    p = ModelParams(kappa, 0.0)
    s = SigmaFamily.single(sig)
    if pt.validate_sigma_family(p, s):
        return
    a = pt.area_exponent(p)
    e = pt.exponent(p, s, [1])
    lhs = pt.weight(p, s, [1], Lam, ell)
    rhs = ell**e * pt.weight(p, s, [1], Lam * ell**a, 1.0)
    assert lhs == pytest.approx(rhs, rel=1e-10)
    assert pt.weight(p, s, [], Lam, ell) == pytest.approx(pt.weight(p, s, [], Lam * ell**a, 1.0), rel=1e-10)


def test_closed_form_needs_small_sets():
    with pytest.raises(DomainError):
        pt.weight(P35, FAM, [1, 2], 1.0, 1.0)
    with pytest.raises(DomainError):
        pt.inverse_gamma_laplace(ModelParams(5.0, 0.0), 1.0, 1.0)
    with pytest.raises(DomainError):
        pt.WeightQuery(P35, None, -1.0, 1.0)


def test_table_interpolates_closed_form():
    s = SigmaFamily.single(-0.5)
    t = pt.WeightTable.closed_form(P35, s)
    u = np.geomspace(2e-4, 50, 37)
    ref = np.array([pt.weight(P35, s, [1], x, 1.0) for x in u])
    np.testing.assert_allclose(t.unit([1], u), ref, rtol=2e-4)
    ell = np.array([0.3, 1.7])
    ref = [pt.weight(P35, s, [1], 0.8, l) for l in ell]
    np.testing.assert_allclose(t.W([1], 0.8, ell), ref, rtol=2e-4)


def test_table_json_round_trip():
    s = SigmaFamily.single(-0.5)
    t = pt.WeightTable.closed_form(P35, s)
    back = pt.WeightTable.from_json(t.to_json())
    assert back.subsets() == t.subsets()
    np.testing.assert_array_equal(back.unit([1], [0.01, 0.5]), t.unit([1], [0.01, 0.5]))
    obj = json.loads(t.to_json())
    obj["subsets"][0]["knots"][5]["w"] = 2.0
    with pytest.raises(ValueError):
        pt.WeightTable.from_json(json.dumps(obj))


def test_jump_rates():
    s = SigmaFamily.single(-0.5)
    t = pt.WeightTable.closed_form(P35, s)
    st1 = MarkedState(0.4, 0.7, frozenset([1]))
    up = pt.JumpMove("L", 1, 0.1, frozenset())
    a = pt.jump_rate(P35, s, 1.0, st1, up, t)
    b = pt.jump_rate(P35, s, 1.0, st1, up, t, literal=True)
    assert a / b == pytest.approx(math.exp(-0.5), rel=1e-14)
    keep = pt.JumpMove("L", 1, 0.1, frozenset([1]))
    assert pt.jump_rate(P35, s, 1.0, st1, keep, t) == pt.jump_rate(P35, s, 1.0, st1, keep, t, literal=True)
    assert pt.jump_rate(P35, s, 1.0, st1, pt.JumpMove("L", -1, 0.5), t) == 0.0
    # zero-point rate at Lambda = 0: nc (1 - beta) (x + h)^{-1-nu} h^{-1-nu} / x^{-1-nu}
    st0 = MarkedState(0.4, 0.7)
    nu = P35.nu
    ref = P35.neg_cos * (1 - P35.beta) * (1.2 / 1.1) ** (-1 - nu) * 0.1 ** (-1 - nu)
    assert pt.jump_rate(P35, None, 0.0, st0, up, t) == pytest.approx(ref, rel=1e-12)
    with pytest.raises(KeyError):
        pt.jump_rate(P35, FAM, 1.0, MarkedState(0.4, 0.7, frozenset([1, 2])), up, t)
    with pytest.raises(DomainError):
        pt.JumpMove("M", 1, 0.1)


def test_admissibility_rules():
    assert pt.admissible(P35, None, 1.0).decision == "yes"
    assert pt.admissible(P35, SigmaFamily.single(-0.5), 1.0).rule == "(i)"
    assert pt.admissible(P35, FAM, 0.0).rule == "(ii)"
    v = pt.admissible(P35, FAM, 1.0)
    assert v.decision == "yes" and v.rule == "(iv)"
    bad = SigmaFamily((1, 2), {frozenset([1]): 5.0, frozenset([2]): -0.3})
    assert pt.admissible(P35, bad, 1.0).decision == "no"
    with pytest.raises(DomainError):
        pt.admissible(P35, FAM, -1.0)


def test_multi_point_lambda_zero_signals_divergence():
    with pytest.raises(pt.DivergenceError) as err:
        pt.w_multi_estimate(P35, FAM, 0.0, depth=8, n=2000, seed=1)
    assert err.value.result.diverged
    res = pt.w_multi_estimate(P35, FAM, 0.0, depth=8, n=2000, seed=1, raise_on_divergence=False)
    assert res.diverged and res.reason


def test_multi_point_needs_two_points():
    with pytest.raises(DomainError):
        pt.w_multi_estimate(P35, SigmaFamily.single(-0.5), 1.0)


def test_gen_disk_lambda_zero_exact():
    p = ModelParams(5.0, 0.0)
    s = SigmaFamily.single(0.1)
    assert pt.gen_disk_weight_mc(p, None, 0.0, 2.0).estimate == 1.0
    e = pt.gen_disk_weight_mc(p, s, 0.0, 2.0)
    assert e.estimate == pytest.approx(2.0 ** pt.exponent(p, s, [1])) and e.stderr == 0


@pytest.mark.slow
def test_gen_disk_matches_closed_form():
    p = ModelParams(5.0, 0.0)
    e = pt.gen_disk_weight_mc(p, None, 1.0, 1.0, n=20000, seed=5)
    ref = pt.w_zero(pt.WeightQuery(p, None, 1.0, 1.0))
    assert abs(e.estimate - ref) < 3 * e.stderr
