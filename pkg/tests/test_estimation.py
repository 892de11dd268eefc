import math

import numpy as np
import pytest

from varbai.estimation import (
    bernstein_sample_count,
    mean_est,
    mean_est_proc,
    mistake_ratio,
    var_est,
    var_test,
    var_test_count,
)
from varbai.instances import BanditInstance, RewardDistribution as R
from varbai.profiles import PAPER, PRACTICAL
from varbai.sampling import SamplingOracle

POINTS = BanditInstance((R.point(0.3), R.point(0.8)))
BERN = BanditInstance((R.bernoulli(0.5), R.bernoulli(0.1)))


def test_frozen_counts():
    assert var_test_count(0.25, 0.1, 80) == 737
    assert var_test_count(0.5, 0.5, 1) == 2
    assert var_test_count(0.5, 0.99, 1) == 1
    assert bernstein_sample_count(0.25, 0.1, 0.1) == 763
    assert bernstein_sample_count(0.0, 0.5, 0.5) == math.ceil(4 / 3 * math.log(8))


def test_var_test_draws_2t():
    o = SamplingOracle(BERN, 0)
    var_test(o, 0, 0.25, 0.1)
    assert o.total_count == 2 * 737
    with pytest.raises(ValueError):
        var_test(o, 0, 0.75, 0.1)
    with pytest.raises(ValueError):
        var_test(o, 0, 0.25, 0.1, c=0.5)


def test_var_test_on_point_mass_never_fires():
    o = SamplingOracle(POINTS, 0)
    assert var_test(o, 0, 1 / 64, 0.1) is False


def test_var_est_point_mass_descends_to_ell():
    o = SamplingOracle(POINTS, 0)
    assert var_est(o, 0, 0.1, 0.01) == 1 / 128
    inner = 0.1 / math.e
    expected = sum(2 * var_test_count(2.0**-r, inner, 80) for r in range(1, 7))
    assert o.total_count == expected


def test_var_est_large_ell_is_free():
    o = SamplingOracle(BERN, 0)
    assert var_est(o, 0, 0.1, 0.5) == 0.5
    assert o.total_count == 0


def test_var_est_output_exceeds_half_ell():
    rng = np.random.default_rng(0)
    for _ in range(20):
        ell = float(rng.uniform(0.005, 0.6))
        tau = var_est(SamplingOracle(BERN, int(rng.integers(1 << 30))), 0, 0.1, ell, PRACTICAL)
        assert tau > ell / 2
        assert math.log2(tau) == int(math.log2(tau))


def test_mean_est_exact_on_point_masses():
    for eps in (0.3, 0.1, 0.01):
        o = SamplingOracle(POINTS, 4)
        assert mean_est(o, 1, eps, 0.05) == 0.8


def test_mean_est_two_phase_count():
    o = SamplingOracle(POINTS, 0)
    mean_est(o, 0, 0.1, 0.2)
    var_part = o.by_tag["var_test"]
    assert o.by_tag["mean_est"] == bernstein_sample_count(1 / 16, 0.1, 0.2)
    inner = 0.1 / math.e
    assert var_part == sum(2 * var_test_count(2.0**-r, inner, 80) for r in range(1, 4))


def test_mean_est_preconditions():
    o = SamplingOracle(POINTS, 0)
    with pytest.raises(ValueError):
        mean_est(o, 0, 1.0, 0.1)
    with pytest.raises(ValueError):
        mean_est(o, 0, 0.1, 0.0)


def test_mean_est_is_a_process():
    gen = mean_est_proc(0, 0.5, 0.5, PAPER)
    req = next(gen)
    assert req.tag in ("var_test", "mean_est")


def test_mistake_ratio():
    assert mistake_ratio(0.25, 0.25) == 0
    assert mistake_ratio(0.25, 1 / 16) == 2
    assert mistake_ratio(0.0, 0.5) == math.inf
