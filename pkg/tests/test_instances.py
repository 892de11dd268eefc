import math

import numpy as np
import pytest

from varbai.instances import (
    BanditInstance,
    InstanceError,
    RewardDistribution,
    complexity_profile,
    instance_from_dict,
    kl_divergence,
    load_instance,
    make_example1,
    make_lower_bound_instance,
    make_perturbed_instance,
    moments,
    validate,
)

R = RewardDistribution


def test_moments_of_named_families():
    assert moments(R.point(0.7)) == (0.7, 0.0)
    assert moments(R.bernoulli(0.5)) == (0.5, 0.25)
    m, v = moments(R.two_point(0.5, 0.2))
    assert m == pytest.approx(0.5, abs=1e-15)
    assert v == pytest.approx(0.04, abs=1e-15)


@pytest.mark.parametrize("mu,sigma", [(0.5, 0.1), (0.3, 0.25), (0.45, 0.0), (0.9, 0.1)])
def test_two_point_moments_exact(mu, sigma):
    m, v = moments(R.two_point(mu, sigma))
    assert m == pytest.approx(mu, abs=1e-12)
    assert v == pytest.approx(sigma**2, abs=1e-12)


def test_pmf_canonical_form():
    d = R.from_pmf([[0.3, 0.25], [0.1, 0.5], [0.3, 0.25], [0.9, 0.0]])
    assert d.values == (0.1, 0.3)
    assert d.probs == (0.5, 0.5)
    assert d == R((0.3, 0.1), (0.5, 0.5))


@pytest.mark.parametrize("values,probs,msg", [
    ((1.2,), (1.0,), "value outside"),
    ((-0.1, 0.5), (0.5, 0.5), "value outside"),
    ((0.1, 0.5), (0.5, 0.4), "sum to"),
    ((0.1,), (1.5,), "probability outside"),
])
def test_invalid_pmfs_rejected(values, probs, msg):
    with pytest.raises(InstanceError, match=msg):
        R(values, probs)


def test_pmf_tolerance_is_1e12():
    R((0.1, 0.2), (0.5, 0.5 + 5e-13))
    with pytest.raises(InstanceError):
        R((0.1, 0.2), (0.5, 0.5 + 5e-12))


def test_sampling_by_inversion_matches_pmf():
    d = R.from_pmf([[0.0, 0.2], [0.5, 0.3], [1.0, 0.5]])
    u = np.array([0.0, 0.1999, 0.2, 0.4999, 0.5, 0.99])
    assert d.sample_from_uniforms(u).tolist() == [0.0, 0.0, 0.5, 0.5, 1.0, 1.0]
    x = d.sample_from_uniforms(np.random.default_rng(3).random(200_000))
    assert x.mean() == pytest.approx(d.mean, abs=5e-3)


def test_example1_n4():
    inst = make_example1(4)
    assert inst.means.tolist() == [0.75, 0.5, 0.25, 0.0]
    assert inst.variances.tolist() == [0.1875, 0.25, 0.1875, 0.0]
    assert inst.gaps.tolist() == [0.25, 0.25, 0.5, 0.75]
    assert inst.best_arm == 0


def test_example1_n2_and_error():
    assert make_example1(2).means.tolist() == [0.5, 0.0]
    with pytest.raises(InstanceError):
        make_example1(1)


def test_lower_bound_instance_supports():
    inst = make_lower_bound_instance([0.2, 0.2], [0.05])
    a, b = inst.arms
    assert a.values == pytest.approx((0.3, 0.7))
    assert b.values == pytest.approx((0.25, 0.65))
    assert inst.means == pytest.approx([0.5, 0.45])


def test_lower_bound_instance_recovers_parameters():
    sig, gaps = [0.3, 0.1, 0.25, 0.0], [0.05, 0.09, 0.01]
    inst = make_lower_bound_instance(sig, gaps)
    assert inst.variances == pytest.approx(np.square(sig), abs=1e-12)
    assert (inst.means[0] - inst.means[1:]) == pytest.approx(gaps, abs=1e-12)


@pytest.mark.parametrize("sigmas,deltas", [
    ([0.5, 0.2], [0.05]),
    ([0.2, 0.2], [0.1]),
    ([0.2, 0.2], [0.0]),
    ([0.2, 0.2], [0.05, 0.05]),
])
def test_lower_bound_range_errors(sigmas, deltas):
    with pytest.raises(InstanceError):
        make_lower_bound_instance(sigmas, deltas)


def test_prime_1_flips_best_arm():
    base = make_lower_bound_instance([0.3, 0.25], [0.05])
    alt = make_perturbed_instance(base, "prime_1", 0)
    arm = alt.arms[0]
    assert arm.prob_of(0.8) == pytest.approx(0.5 - 1 / 6, abs=1e-12)
    assert arm.prob_of(0.2) == pytest.approx(0.5 + 1 / 6, abs=1e-12)
    assert alt.means[0] == pytest.approx(0.5 - 2 * 0.05, abs=1e-12)
    assert alt.best_arm == 1


def test_doubleprime_1_adds_zero_mass():
    base = make_lower_bound_instance([0.3, 0.25], [0.05])
    alt = make_perturbed_instance(base, "doubleprime_1", 0)
    assert alt.arms[0].prob_of(0.0) == pytest.approx(0.2, abs=1e-12)
    assert alt.best_arm != base.best_arm


@pytest.mark.parametrize("variant,i", [("prime_i", 1), ("doubleprime_i", 1), ("doubleprime_i", 2)])
def test_sub_optimal_perturbations_flip(variant, i):
    base = make_lower_bound_instance([0.3, 0.3, 0.3], [0.05, 0.06])
    alt = make_perturbed_instance(base, variant, i)
    assert alt.best_arm == i
    assert all(a == b for k, (a, b) in enumerate(zip(base.arms, alt.arms)) if k != i)


def test_perturbation_errors():
    base = make_lower_bound_instance([0.2, 0.2], [0.05])
    with pytest.raises(InstanceError):
        make_perturbed_instance(base, "prime_i", 0)
    with pytest.raises(InstanceError):
        make_perturbed_instance(base, "prime_1", 1)
    with pytest.raises(InstanceError, match="sigma >= 5"):
        make_perturbed_instance(base, "prime_1", 0)  # 0.2 < 5 * 0.05
    with pytest.raises(InstanceError):
        make_perturbed_instance(base, "other", 0)


def test_kl_values():
    p = R.two_point(0.5, 0.25)
    assert kl_divergence(p, p) == 0.0
    q = R((0.25, 0.75), (0.5 + 0.2, 0.5 - 0.2))
    closed = 0.5 * math.log(1 / (1 - 4 * 0.05**2 / 0.25**2))
    assert kl_divergence(p, q) == pytest.approx(closed, abs=1e-12)
    assert closed == pytest.approx(0.08719, abs=2e-5)
    assert kl_divergence(R.point(0.3), R.bernoulli(0.5)) == math.inf
    assert kl_divergence(R.bernoulli(0.3), R.bernoulli(0.6)) > 0


def test_complexity_example1_n4():
    prof = complexity_profile(make_example1(4))
    assert prof.phi == pytest.approx(7 + 8 + 2.75 + 4 / 3, abs=1e-12)
    assert prof.phi == pytest.approx(19.0833, abs=1e-4)
    assert prof.lower_bound(0.1) == pytest.approx(prof.phi * math.log(10) / 80)
    assert prof.lower_bound(0.1) <= prof.upper_proxy(0.1)


def test_complexity_equal_gaps():
    inst = BanditInstance((R.point(0.75), R.point(0.25)))
    prof = complexity_profile(inst)
    assert prof.phi == pytest.approx(4.0)
    assert prof.psi == pytest.approx(4.0 * math.log(math.e + math.log(2)))


def test_validate():
    with pytest.raises(InstanceError, match="tied best arm"):
        validate(BanditInstance((R.bernoulli(0.5), R.bernoulli(0.5))))
    with pytest.raises(InstanceError, match="at least 2"):
        validate(BanditInstance((R.bernoulli(0.5),)))
    for n in (2, 3, 7, 50):
        validate(make_example1(n))


def test_instance_documents(tmp_path):
    doc = {"name": "x", "arms": [{"family": "bernoulli", "params": {"p": 0.7}},
                                  {"family": "two_point", "params": [0.5, 0.1]},
                                  {"pmf": [[0.0, 0.5], [0.2, 0.5]]},
                                  {"family": "point", "params": 0.05}]}
    inst = instance_from_dict(doc)
    assert inst.means == pytest.approx([0.7, 0.5, 0.1, 0.05])
    path = tmp_path / "i.yaml"
    path.write_text("name: y\narms:\n  - {family: bernoulli, params: {p: 0.9}}\n"
                    "  - {pmf: [[1.2, 1.0]]}\n")
    with pytest.raises(InstanceError, match="value outside"):
        load_instance(path)
    with pytest.raises(InstanceError):
        instance_from_dict({"arms": [{"family": "gauss", "params": [0.1]}]})
