"""Grouped median elimination and the epsilon-optimal arm finder built on it.

Arms are bucketed by their dyadic variance estimate; within each bucket of
two or more arms the lower empirical half is dropped, and singleton buckets
go to a recycle bin that survives to the end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .estimation import mean_est_proc, var_est_proc
from .instances import BanditInstance
from .naive import naive_best_arm_est_proc, pac_rounds
from .profiles import PAPER, AlgoProfile
from .sampling import SamplingOracle, execute


def num_buckets(epsilon: float) -> int:
    return pac_rounds(epsilon)


def bucket_assign(sigma_hat_sq: float, n_buckets: int) -> int:
    """The j in [1, N] with 2^-j < sigma_hat_sq <= 2^(-j+1).

    Raises ``ValueError`` outside (2^-N, 1]; var_est called with ell = eps
    never lands there, so hitting it means a broken caller.
    """
    if not 2.0**-n_buckets < sigma_hat_sq <= 1.0:
        raise ValueError(
            f"variance estimate {sigma_hat_sq} outside the bucket range (2^-{n_buckets}, 1]"
        )
    mantissa, exponent = math.frexp(sigma_hat_sq)
    return 2 - exponent if mantissa == 0.5 else 1 - exponent


def median_keep(entries: Sequence[tuple[int, float]]) -> list[int]:
    """Keep the ceil(k/2) arms with the largest estimates, ties to the lower index."""
    if len(entries) < 2:
        raise ValueError("median elimination needs at least two arms")
    ranked = sorted(entries, key=lambda e: (-e[1], e[0]))
    keep = math.ceil(len(ranked) / 2)
    return sorted(arm for arm, _ in ranked[:keep])


@dataclass
class BucketAudit:
    index: int
    lower: float
    upper: float
    arms: list[int]
    variances: dict[int, float]
    estimates: dict[int, float] = field(default_factory=dict)
    median: float | None = None
    kept: list[int] = field(default_factory=list)
    recycled: list[int] = field(default_factory=list)
    eliminated: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "bucket": self.index,
            "size": len(self.arms),
            "median": self.median,
            "kept": self.kept,
            "recycled": self.recycled,
            "eliminated": self.eliminated,
            "sigma_hat_sq": {str(a): v for a, v in self.variances.items()},
        }


@dataclass
class ElimOutcome:
    kept: list[int]
    recycled: list[int]
    eliminated: list[int]
    n_buckets: int
    epsilon: float
    delta: float
    buckets: list[BucketAudit]

    @property
    def variance_estimates(self) -> dict[int, float]:
        out: dict[int, float] = {}
        for b in self.buckets:
            out.update(b.variances)
        return out

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "delta": self.delta,
            "n_buckets": self.n_buckets,
            "kept": self.kept,
            "recycled": self.recycled,
            "eliminated": self.eliminated,
            "buckets": [b.to_dict() for b in self.buckets if b.arms],
        }


def group_elim_proc(arms: Sequence[int], epsilon: float, delta: float,
                    profile: AlgoProfile = PAPER):
    if not arms:
        raise ValueError("arm set must be non-empty")
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    arms = sorted(arms)
    n_buckets = num_buckets(epsilon)
    var_delta = delta / (profile.group_elim_var_split * n_buckets**2)
    mean_delta = delta / (profile.group_elim_mean_split * n_buckets)

    sigma_hat = {}
    for arm in arms:
        sigma_hat[arm] = yield from var_est_proc(arm, var_delta, epsilon, profile)
    buckets = [
        BucketAudit(j, 2.0**-j, 2.0 ** (1 - j), [], {}) for j in range(1, n_buckets + 1)
    ]
    for arm in arms:
        b = buckets[bucket_assign(sigma_hat[arm], n_buckets) - 1]
        b.arms.append(arm)
        b.variances[arm] = sigma_hat[arm]

    kept, recycled, eliminated = [], [], []
    for b in buckets:
        if len(b.arms) >= 2:
            for arm in b.arms:
                b.estimates[arm] = yield from mean_est_proc(arm, epsilon / 2, mean_delta, profile)
            ranked = sorted(b.estimates.values())
            k = len(ranked)
            b.median = ranked[k // 2] if k % 2 else (ranked[k // 2 - 1] + ranked[k // 2]) / 2
            b.kept = median_keep(list(b.estimates.items()))
            b.eliminated = [a for a in b.arms if a not in b.kept]
            kept += b.kept
            eliminated += b.eliminated
        elif b.arms:
            b.recycled = list(b.arms)
            recycled += b.arms
    return ElimOutcome(sorted(kept), sorted(recycled), sorted(eliminated),
                       n_buckets, epsilon, delta, buckets)


def iter_elim_schedule(r: int, epsilon: float, delta: float,
                       profile: AlgoProfile = PAPER) -> tuple[float, float]:
    """(eps_r, delta_r) for IterElim round r >= 0; both sum over r to at most (eps, delta)."""
    beta = profile.iter_elim_beta
    rate = profile.iter_elim_delta_rate
    return beta**r * (1 - beta) * epsilon, math.exp(-rate * r) * (1 - math.exp(-rate)) * delta


def iter_elim_proc(arms: Sequence[int], epsilon: float, delta: float,
                   profile: AlgoProfile = PAPER, trace: list | None = None):
    """Apply GroupElim while more than ``iter_elim_threshold`` arms are active.

    Returns the final active arms together with everything recycled on the way.
    """
    active = sorted(arms)
    recycled: list[int] = []
    r = 0
    while len(active) > profile.iter_elim_threshold:
        eps_r, delta_r = iter_elim_schedule(r, epsilon, delta, profile)
        outcome = yield from group_elim_proc(active, eps_r, delta_r, profile)
        if trace is not None:
            trace.append(outcome)
        active = outcome.kept
        recycled += outcome.recycled
        r += 1
    return sorted(active + recycled)


def best_arm_est_proc(arms: Sequence[int], epsilon: float, delta: float,
                      profile: AlgoProfile = PAPER):
    """An arm within ``epsilon`` of the best in ``arms`` with probability 1 - delta."""
    if not arms:
        raise ValueError("arm set must be non-empty")
    third_eps, third_delta = epsilon / 3, delta / 3
    s1 = yield from iter_elim_proc(arms, third_eps, third_delta, profile)
    if 1 / epsilon <= math.log(len(arms)):
        s2 = s1
    else:
        s2 = yield from iter_elim_proc(s1, third_eps, third_delta, profile)
    return (yield from naive_best_arm_est_proc(s2, third_eps, third_delta, profile))


def group_elim(oracle: SamplingOracle, arms: Sequence[int], epsilon: float, delta: float,
               profile: AlgoProfile = PAPER) -> ElimOutcome:
    return execute(group_elim_proc(arms, epsilon, delta, profile), oracle)


def iter_elim(oracle: SamplingOracle, arms: Sequence[int], epsilon: float, delta: float,
              profile: AlgoProfile = PAPER, trace: list | None = None) -> list[int]:
    return execute(iter_elim_proc(arms, epsilon, delta, profile, trace), oracle)


def best_arm_est(oracle: SamplingOracle, arms: Sequence[int], epsilon: float, delta: float,
                 profile: AlgoProfile = PAPER) -> int:
    return execute(best_arm_est_proc(arms, epsilon, delta, profile), oracle)


# ground-truth diagnostics; never consulted by the algorithms


def ideal_bucket(sigma_sq: float, n_buckets: int) -> int:
    """Bucket of the true variance; the last bucket absorbs [0, 2^(-N+1)]."""
    if sigma_sq <= 2.0 ** (1 - n_buckets):
        return n_buckets
    return bucket_assign(sigma_sq, n_buckets)


def misbucketing(outcome: ElimOutcome, instance: BanditInstance) -> dict[int, int]:
    """Histogram of |ideal bucket - empirical bucket| over the arms of one GroupElim call."""
    variances = instance.variances
    hist: dict[int, int] = {}
    for b in outcome.buckets:
        for arm in b.arms:
            d = abs(ideal_bucket(float(variances[arm]), outcome.n_buckets) - b.index)
            hist[d] = hist.get(d, 0) + 1
    return dict(sorted(hist.items()))


def variance_reduced(outcome: ElimOutcome, instance: BanditInstance,
                     factor: float = 255 / 256) -> bool:
    """Did the kept set shed enough total (variance + eps) mass?"""
    v = instance.variances
    eps = outcome.epsilon
    arms = outcome.kept + outcome.recycled + outcome.eliminated
    before = math.fsum(v[a] + eps for a in arms)
    after = math.fsum(v[a] + eps for a in outcome.kept)
    return after <= factor * before
