import math

import numpy as np
import pytest

from lqgnest import levy
from lqgnest.levy import JumpSkeleton, MarkedState, WeightFunctionSet
from lqgnest.params import ModelParams, SigmaFamily
from lqgnest.radius import MCEstimate
from lqgnest.specfun import DomainError


def test_jump_rates():
    p = ModelParams(3.5, 0.4)
    apl, apr, am = levy.jump_rates(p)
    assert apl + apr == pytest.approx(p.neg_cos)
    assert apr / apl == pytest.approx(1.4 / 0.6)
    assert am == 0.5


def test_skeleton_counts_and_csv(rng):
    p = ModelParams(6.0, 0.2)
    T, delta = 5.0, 0.05
    counts = [levy.stable_pair_simulate(p, 1.0, 1.0, T, delta, rng).events.shape[0] for _ in range(400)]
    apl, apr, am = levy.jump_rates(p)
    mean = T * (apl + apr + 2 * am) * delta ** (-p.nu) / p.nu
    assert abs(np.mean(counts) - mean) < 4 * math.sqrt(mean / len(counts))
    sk = levy.stable_pair_simulate(p, 1.0, 1.0, T, delta, rng)
    back = JumpSkeleton.events_from_csv(sk.to_csv())
    np.testing.assert_array_equal(back, sk.events)
    assert sk.value(0, 0.0)[0] == 1.0


def test_skeleton_rejects_small_jump():
    with pytest.raises(ValueError):
        JumpSkeleton(1.0, 0.1, (1.0, 1.0), np.array([[0.5, 0, 0.01]]), (0.0, 0.0))


def test_skeleton_drift_matches_dropped_mean():
    # kappa > 4: drift is the mean of the jumps below delta
    p = ModelParams(6.0, 0.0)
    apl, apr, am = levy.jump_rates(p)
    d = levy._drift(apl, am, p.nu, 0.1, False)
    from scipy import integrate

    ref = integrate.quad(lambda h: (apl - am) * h ** (-p.nu), 0, 0.1)[0]
    assert d == pytest.approx(ref, rel=1e-10)


def test_marked_state_validation():
    assert MarkedState(0.0, 0.0).absorbed
    with pytest.raises(DomainError):
        MarkedState(0.0, 1.0)
    with pytest.raises(DomainError):
        MarkedState(0.0, 0.0, {1})


def test_weight_function_checks():
    p = ModelParams(3.5)
    W = WeightFunctionSet.closed_form(p, SigmaFamily.single(-0.5), 1.0)
    assert W.check(p) == []
    bad = WeightFunctionSet({frozenset(): lambda x: 1.0 + 0.0 * np.asarray(x) + np.asarray(x)})
    assert "W^∅ exceeds 1" in bad.check(p)
    spiky = WeightFunctionSet({frozenset(): lambda x: np.ones_like(np.asarray(x, float)),
                               frozenset([1]): lambda x: np.exp(np.minimum(40 * np.asarray(x, float), 700.0))})
    assert any("doubling" in m for m in spiky.check(p))
    with pytest.raises(DomainError):
        WeightFunctionSet({frozenset([1]): lambda x: x})


@pytest.mark.parametrize("theta", [1.4, 2.0])
def test_jump_sum_ratio_kappa_six(theta, rng):
    p = ModelParams(6.0, 0.3)
    res = levy.jump_sum_moments(p, theta, n=20000, rng=rng)
    assert res.ratio.within(levy.power_theta_closed(p, theta), extra_se=res.tail_bound)
    assert res.status_counts.get("killed", 0) > 0.99 * 20000


def test_jump_sum_domain():
    with pytest.raises(DomainError):
        levy.jump_sum_moments(ModelParams(3.5), 0.9, n=10, rng=np.random.default_rng(0))
    with pytest.raises(DomainError):
        levy.jump_sum_moments(ModelParams(3.5), 2.0, l=1.0, r=1.0, n=10, rng=np.random.default_rng(0))


def test_empty_family_reduces_to_weighted_expectation():
    p = ModelParams(3.5, 0.3)
    W = WeightFunctionSet.closed_form(p, None, 0.0)  # W^∅ = 1
    ens = levy.marked_process_simulate(p, None, W, MarkedState(0.5, 0.5), [0.05], n=20000, rng=np.random.default_rng(1))
    a = ens.expect(lambda l, r, P: np.ones_like(l), 0)
    b = levy.weighted_expectation(p, 0.5, 0.5, 0.05, n=20000, rng=np.random.default_rng(2))
    assert abs(a.estimate - b.estimate) <= 3 * math.hypot(a.stderr, b.stderr)


def test_weighted_process_is_absorbed():
    p = ModelParams(3.5, 0.3)
    s = SigmaFamily.single(-0.5)
    W = WeightFunctionSet.closed_form(p, s, 1.0)
    ens = levy.marked_process_simulate(p, s, W, MarkedState(0.5, 0.5, {1}), [1.0, 10.0, 50.0], n=5000,
                                       rng=np.random.default_rng(3))
    surv = ens.survival()
    assert np.all(np.diff(surv) <= 0)
    assert surv[-1] < 1e-3
    assert np.all(ens.marked_fraction() <= surv + 1e-15)


def test_marked_simulation_rejects_bad_input():
    p = ModelParams(3.5)
    s2 = SigmaFamily.from_points({1: -0.5, 2: -0.4})
    W = WeightFunctionSet.closed_form(p, s2, 1.0)
    with pytest.raises(DomainError):
        levy.marked_process_simulate(p, s2, W, MarkedState(0.5, 0.5), [1.0], n=10, rng=np.random.default_rng(0))
    s = SigmaFamily.single(-0.5)
    W1 = WeightFunctionSet({frozenset(): lambda x: np.ones_like(np.asarray(x, float))})
    with pytest.raises(DomainError):
        levy.marked_process_simulate(p, s, W1, MarkedState(0.5, 0.5), [1.0], n=10, rng=np.random.default_rng(0))


def test_generator_of_a_function_without_marks():
    # with W ≡ 1 and A = ∅ the generator is the raw stable generator applied to w f, divided by w
    p = ModelParams(3.5, 0.0)
    W = WeightFunctionSet.closed_form(p, None, 0.0)
    from lqgnest.experiments import BumpTest

    f = BumpTest(0.5, 0.5, 0.25)
    st = MarkedState(0.5, 0.5)
    g = levy.generator_apply(p, None, W, lambda a, b, Q: float(f(np.array([a]), np.array([b]), Q)[0]), st)
    sl = levy.semigroup_slopes(p, None, W, f, st, [0.005, 0.01], n=100000, rng=np.random.default_rng(4))
    # slope error is O(t): the extrapolated slope 2 s(t/2) - s(t) matches the generator
    extra = 2 * sl[0].estimate - sl[1].estimate
    se = 2 * sl[0].stderr + sl[1].stderr
    assert abs(extra - g) <= max(3 * se, 0.02 * abs(g))
    assert levy.generator_apply(p, None, W, lambda a, b, Q: 1.0, MarkedState(0.0, 0.0)) == 0.0


def test_mc_estimate_helpers():
    e = MCEstimate.from_samples(np.array([1.0, 2.0, 3.0]))
    assert e.estimate == 2.0 and e.n == 3
    assert e.within(2.5) and not e.within(10.0)
    assert MCEstimate.from_samples(np.array([1.0])).stderr == math.inf
