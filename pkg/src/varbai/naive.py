"""Exact-identification warm-up: halve epsilon each round with a per-arm union bound."""

from __future__ import annotations

import math
from typing import Sequence

from .estimation import mean_est_proc
from .profiles import PAPER, AlgoProfile
from .sampling import SamplingOracle, execute


def argmax_arm(estimates: dict[int, float]) -> int:
    """Arm with the largest estimate; ties go to the lowest index."""
    return min(estimates, key=lambda a: (-estimates[a], a))


def _naive_rounds(arms: Sequence[int], delta: float, profile: AlgoProfile,
                  max_rounds: int | None, trace: list | None):
    active = sorted(arms)
    if not active:
        raise ValueError("arm set must be non-empty")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    r = 1
    leader = active[0]
    while len(active) > 1 and (max_rounds is None or r <= max_rounds):
        eps_r = 0.5**r
        delta_r = delta / (2 * r * r)
        estimates = {}
        for arm in active:
            estimates[arm] = yield from mean_est_proc(arm, eps_r / 2, delta_r / len(active), profile)
        leader = argmax_arm(estimates)
        cut = estimates[leader] - eps_r
        survivors = [a for a in active if estimates[a] >= cut]
        if trace is not None:
            trace.append({"round": r, "epsilon": eps_r, "delta": delta_r, "active": list(active),
                          "estimates": estimates, "leader": leader})
        active = survivors
        r += 1
    return active[0] if len(active) == 1 else leader


def naive_best_arm_proc(arms: Sequence[int], delta: float, profile: AlgoProfile = PAPER,
                        trace: list | None = None):
    """Loop until one arm survives; rounds use eps_r = 2^-r and delta_r = delta / (2 r^2)."""
    return (yield from _naive_rounds(arms, delta, profile, None, trace))


def pac_rounds(epsilon: float) -> int:
    """Round cap ceil(log2(2 / eps)), after which eps_R <= eps / 2."""
    return math.ceil(math.log2(2 / epsilon))


def naive_best_arm_est_proc(arms: Sequence[int], epsilon: float, delta: float,
                            profile: AlgoProfile = PAPER, trace: list | None = None):
    """PAC variant: stop after :func:`pac_rounds` rounds and return the final-round leader."""
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    return (yield from _naive_rounds(arms, delta, profile, pac_rounds(epsilon), trace))


def naive_best_arm(oracle: SamplingOracle, arms: Sequence[int], delta: float,
                   profile: AlgoProfile = PAPER) -> int:
    return execute(naive_best_arm_proc(arms, delta, profile), oracle)


def naive_best_arm_est(oracle: SamplingOracle, arms: Sequence[int], epsilon: float,
                       delta: float, profile: AlgoProfile = PAPER) -> int:
    return execute(naive_best_arm_est_proc(arms, epsilon, delta, profile), oracle)
