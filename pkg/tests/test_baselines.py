import math

import pytest

from varbai.baselines import (
    median_elim_count,
    median_elimination,
    median_elimination_proc,
    se_radius,
    successive_elimination,
)
from varbai.instances import BanditInstance, RewardDistribution as R
from varbai.runner import run_identifier
from varbai.sampling import SamplingOracle, execute

PM = BanditInstance((R.point(0.9), R.point(0.1)))


def test_median_elim_count_formula():
    assert median_elim_count(0.1, 0.1) == math.ceil(4 / 0.05**2 * math.log(30))


def test_median_elim_singleton_and_points():
    o = SamplingOracle(PM, 0)
    assert median_elimination(o, [1], 0.2, 0.1) == 1 and o.total_count == 0
    o = SamplingOracle(PM, 0)
    assert median_elimination(o, [0, 1], 0.2, 0.1) == 0
    assert o.ledger().per_arm == [median_elim_count(0.05, 0.05)] * 2


def test_median_elim_ledger_matches_schedule():
    inst = BanditInstance(tuple(R.bernoulli(0.2 + 0.1 * i) for i in range(5)))
    trace = []
    o = SamplingOracle(inst, 2)
    execute(median_elimination_proc(range(5), 0.3, 0.1, trace=trace), o)
    eps, dl = 0.3 / 4, 0.05
    expected = 0
    for row in trace:
        assert row["per_arm"] == median_elim_count(eps, dl)
        assert row["epsilon"] == pytest.approx(eps) and row["delta"] == pytest.approx(dl)
        expected += row["per_arm"] * len(row["active"])
        eps, dl = eps * 0.75, dl / 2
    assert o.total_count == expected
    assert [len(r["active"]) for r in trace] == [5, 3, 2]


def test_succ_elim_points():
    o = SamplingOracle(PM, 0)
    assert successive_elimination(o, [0, 1], 0.1) == 0
    t = o.per_arm_counts[0]
    assert 2 * se_radius(t, 0.1, 2) < 0.8 <= 2 * se_radius(t - 1, 0.1, 2)
    o = SamplingOracle(PM, 0)
    assert successive_elimination(o, [1], 0.1) == 1 and o.total_count == 0


def test_gap_only():
    inst = BanditInstance(tuple(R.bernoulli(p) for p in (0.9, 0.6, 0.5, 0.4)))
    for name in ("median_elim", "succ_elim"):
        rep = run_identifier(name, inst, 0.1, seed=1)
        assert set(rep.samples_by_tag) == {name}
        assert rep.total_samples == sum(rep.per_arm_samples)


def test_succ_elim_per_pass_rule():
    """Stepping one pass at a time gives the same ledger as the block scan."""
    inst = BanditInstance(tuple(R.bernoulli(p) for p in (0.7, 0.55, 0.3)))
    o = SamplingOracle(inst, 5)
    successive_elimination(o, range(3), 0.1)
    # reference: naive per-pass loop on the same uniform stream
    ref = SamplingOracle(inst, 5)
    active, sums, t = [0, 1, 2], [0.0] * 3, 0
    while len(active) > 1:
        x = ref.draw_round_robin(active, 1)[0]
        for col, a in enumerate(active):
            sums[a] += x[col]
        t += 1
        mu = {a: sums[a] / t for a in active}
        rad = float(se_radius(t, 0.1, 3))
        best = max(mu.values())
        active = [a for a in active if not best - mu[a] > 2 * rad]
    assert ref.ledger() == o.ledger()
