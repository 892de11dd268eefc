"""Uniform dispatch from an algorithm name to a :class:`RunReport`."""

from __future__ import annotations

import time
from typing import Callable

from .baselines import median_elimination_proc, successive_elimination_proc
from .grouped import best_arm_est_proc
from .instances import BanditInstance
from .naive import naive_best_arm_est_proc, naive_best_arm_proc
from .profiles import AlgoProfile, get_profile
from .sampling import DEFAULT_BUDGET, SamplingOracle
from .vd import (
    BUDGET,
    SINGLE_SURVIVOR,
    RunReport,
    _execute_tracking,
    vd_best_arm_id,
    vd_best_arm_id_star,
)

IDENTIFIERS = ("vd", "vd_star", "naive", "median_elim", "succ_elim")
PAC_MODES = ("naive_est", "best_arm_est")
ALGORITHMS = IDENTIFIERS + PAC_MODES


def default_epsilon(instance: BanditInstance) -> float:
    """Half the smallest positive gap, so an epsilon-good answer is the best arm."""
    gaps = [g for g in instance.gaps if g > 0]
    return min(gaps) / 2 if gaps else 0.5


def _generic(name: str, oracle: SamplingOracle, make_proc: Callable, delta: float,
             profile: AlgoProfile, epsilon: float | None, trace: list) -> RunReport:
    inst = oracle.instance
    start = time.perf_counter()
    finished, value = _execute_tracking(make_proc(), oracle)
    if finished:
        reason = SINGLE_SURVIVOR if name in IDENTIFIERS else "pac_rounds"
    else:
        reason = BUDGET
        value = None
    if epsilon is not None and name in PAC_MODES:
        correct = value is not None and inst.means[value] >= inst.means[inst.best_arm] - epsilon
    else:
        correct = value == inst.best_arm
    led = oracle.ledger()
    extra = {"epsilon": epsilon} if epsilon is not None else {}
    return RunReport(
        algorithm=name,
        profile=profile.name,
        seed=oracle.seed,
        delta=delta,
        output_arm=value,
        correct=bool(correct),
        total_samples=led.total,
        per_arm_samples=led.per_arm,
        rounds=[{k: v for k, v in row.items() if k != "estimates"} for row in trace],
        stop_reason=reason,
        wall_ms=(time.perf_counter() - start) * 1000,
        samples_by_tag=dict(oracle.by_tag),
        extra=extra,
    )


def run_identifier(name: str, instance: BanditInstance, delta: float, seed: int = 0,
                   profile: AlgoProfile | str = "practical", budget: int | None = DEFAULT_BUDGET,
                   epsilon: float | None = None, star_mode: str = "fast") -> RunReport:
    """Build a fresh oracle for ``instance`` and run algorithm ``name`` on all its arms."""
    if name not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {name!r}; choose from {list(ALGORITHMS)}")
    profile = get_profile(profile)
    if name == "vd_star":
        return vd_best_arm_id_star(instance, seed, delta, profile, budget, mode=star_mode)
    oracle = SamplingOracle(instance, seed, budget=budget)
    if name == "vd":
        return vd_best_arm_id(oracle, delta, profile)
    arms = list(range(instance.n))
    trace: list = []
    if name in ("median_elim", "naive_est", "best_arm_est") and epsilon is None:
        epsilon = default_epsilon(instance)
    makers = {
        "naive": lambda: naive_best_arm_proc(arms, delta, profile, trace),
        "median_elim": lambda: median_elimination_proc(arms, epsilon, delta, trace=trace),
        "succ_elim": lambda: successive_elimination_proc(arms, delta),
        "naive_est": lambda: naive_best_arm_est_proc(arms, epsilon, delta, profile, trace),
        "best_arm_est": lambda: best_arm_est_proc(arms, epsilon, delta, profile),
    }
    return _generic(name, oracle, makers[name], delta, profile, epsilon, trace)
