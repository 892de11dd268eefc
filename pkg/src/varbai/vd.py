"""Variance-dependent best-arm identification and its interleaved wrapper.

:func:`vd_best_arm_id_proc` halves the accuracy every round, eliminates arms
that fall ``eps_r`` below the champion, and stops early once the champion
and runner-up are separated by more than ``2 eps_r``.

:class:`Interleaver` runs copies A_1, A_2, ... with confidence delta / 2^i,
stepping A_i by one draw in every outer round divisible by 2^i, and returns
the first answer. :func:`vd_best_arm_id_star` offers it in two modes:
``stepped`` literally steps every draw; ``fast`` runs each copy directly and
reconstructs the schedule arithmetically, producing the same report.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

from .grouped import best_arm_est_proc
from .estimation import mean_est_proc
from .instances import BanditInstance
from .profiles import PAPER, AlgoProfile, get_profile
from .sampling import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    SamplingOracle,
    SteppableRun,
    derive_seed,
    prefix_ledger,
    serve,
)

EARLY_STOP = "early_stop_line10"
SINGLE_SURVIVOR = "single_survivor"
BUDGET = "budget"


@dataclass
class VDState:
    """Mutable progress record, readable while (or after) the process runs."""

    rounds: list[dict] = field(default_factory=list)
    champion: int | None = None
    stop_reason: str | None = None


def vd_best_arm_id_proc(arms: Sequence[int], delta: float, profile: AlgoProfile = PAPER,
                        state: VDState | None = None):
    if not arms:
        raise ValueError("arm set must be non-empty")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    state = state if state is not None else VDState()
    active = sorted(arms)
    state.champion = active[0]
    r = 1
    while len(active) > 1:
        eps_r = 0.5 ** (r + profile.vd_eps_shift)
        delta_r = delta / (2 * r * r)
        conf = delta_r / profile.vd_delta_split
        estimates = {}
        for arm in active:
            estimates[arm] = yield from mean_est_proc(arm, eps_r / 2, conf, profile)
        champion = yield from best_arm_est_proc(active, eps_r / 2, conf, profile)
        state.champion = champion
        rest = [a for a in active if a != champion]
        runner_up = yield from best_arm_est_proc(rest, eps_r / 2, conf, profile)
        separation = abs(estimates[champion] - estimates[runner_up])
        summary = {
            "round": r,
            "epsilon": eps_r,
            "delta": delta_r,
            "active": list(active),
            "estimates": {str(a): v for a, v in estimates.items()},
            "champion": champion,
            "runner_up": runner_up,
            "separation": separation,
        }
        state.rounds.append(summary)
        if separation > 2 * eps_r:
            state.stop_reason = EARLY_STOP
            return champion
        cut = estimates[champion] - eps_r
        active = [a for a in active if estimates[a] >= cut]
        summary["survivors"] = list(active)
        r += 1
    state.stop_reason = SINGLE_SURVIVOR
    state.champion = active[0]
    return active[0]


def _execute_tracking(process, oracle: SamplingOracle):
    """Like :func:`execute`, but on budget exhaustion also hand back the unserved request."""
    try:
        request = next(process)
        while True:
            try:
                reply = serve(request, oracle)
            except BudgetExceeded:
                return False, request
            request = process.send(reply)
    except StopIteration as stop:
        return True, stop.value


@dataclass
class RunReport:
    algorithm: str
    profile: str
    seed: int
    delta: float
    output_arm: int | None
    correct: bool
    total_samples: int
    per_arm_samples: list[int]
    rounds: list[dict]
    stop_reason: str
    wall_ms: float = 0.0
    samples_by_tag: dict[str, int] = field(default_factory=dict)
    extra: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "algorithm": self.algorithm,
            "profile": self.profile,
            "seed": self.seed,
            "delta": self.delta,
            "output_arm": self.output_arm,
            "correct": self.correct,
            "total_samples": self.total_samples,
            "per_arm_samples": list(self.per_arm_samples),
            "rounds": self.rounds,
            "stop_reason": self.stop_reason,
            "wall_ms": self.wall_ms,
            "samples_by_tag": dict(self.samples_by_tag),
            **self.extra,
        }

    def replay_key(self) -> dict[str, Any]:
        """Everything except wall time; equal keys mean a bit-identical replay."""
        d = self.to_dict()
        d.pop("wall_ms")
        return d


def vd_best_arm_id(oracle: SamplingOracle, delta: float, profile: AlgoProfile | str = PAPER,
                   arms: Sequence[int] | None = None) -> RunReport:
    profile = get_profile(profile)
    arms = list(range(oracle.instance.n)) if arms is None else list(arms)
    state = VDState()
    start = time.perf_counter()
    finished, value = _execute_tracking(vd_best_arm_id_proc(arms, delta, profile, state), oracle)
    if not finished:
        state.stop_reason = BUDGET
        value = state.champion
    ledger = oracle.ledger()
    return RunReport(
        algorithm="vd",
        profile=profile.name,
        seed=oracle.seed,
        delta=delta,
        output_arm=value,
        correct=value == oracle.instance.best_arm,
        total_samples=ledger.total,
        per_arm_samples=ledger.per_arm,
        rounds=state.rounds,
        stop_reason=state.stop_reason,
        wall_ms=(time.perf_counter() - start) * 1000,
        samples_by_tag=dict(oracle.by_tag),
    )


# interleaving wrapper


@dataclass
class SubRun:
    index: int
    delta: float
    run: SteppableRun
    state: VDState


class Interleaver:
    """Literal one-draw-at-a-time schedule over lazily created sub-runs.

    In outer round r, for i = 1 .. floor(log2 r) with 2^i | r, sub-run A_i is
    advanced by one step; the first sub-run to finish supplies the answer.
    """

    def __init__(self, make_subrun: Callable[[int], SubRun], budget: int | None = DEFAULT_BUDGET):
        self.make_subrun = make_subrun
        self.budget = budget
        self.subruns: dict[int, SubRun] = {}
        self.r = 0
        self.total = 0
        self.winner: int | None = None
        self.exhausted = False

    @property
    def done(self) -> bool:
        return self.winner is not None or self.exhausted

    def step_round(self) -> bool:
        """Play one outer round; True once the interleaver has stopped."""
        if self.done:
            raise RuntimeError("interleaver already stopped")
        self.r += 1
        i = 1
        while 2**i <= self.r:
            if self.r % 2**i == 0:
                if i not in self.subruns:
                    self.subruns[i] = self.make_subrun(i)
                sub = self.subruns[i]
                oracle = sub.run.oracle
                if self.budget is not None:
                    oracle.budget = oracle.total_count + (self.budget - self.total)
                before = oracle.total_count
                try:
                    status = sub.run.step()
                except BudgetExceeded:
                    self.exhausted = True
                    return True
                self.total += oracle.total_count - before
                if status.finished:
                    self.winner = i
                    return True
            i += 1
        return False

    def run(self) -> None:
        while not self.done:
            self.step_round()


def _draws_through(r: int) -> int:
    """Total draws after r complete outer rounds when no sub-run has finished."""
    return r - bin(r).count("1")


def _vd_subrun_factory(instance: BanditInstance, seed: int, delta: float,
                       profile: AlgoProfile, record: bool = False):
    arms = list(range(instance.n))

    def make(i: int, budget: int | None = None) -> tuple[SamplingOracle, VDState, Any]:
        oracle = SamplingOracle(instance, derive_seed(seed, i), budget=budget, record=record)
        state = VDState()
        return oracle, state, vd_best_arm_id_proc(arms, delta / 2**i, profile, state)

    return make


def _settled_champion(sub: SubRun) -> int | None:
    """Champion once the process has seen every reward drawn so far."""
    sub.run.settle()
    return sub.run.status.arm if sub.run.finished else sub.state.champion


def _star_stepped(instance, seed, delta, profile, budget):
    make = _vd_subrun_factory(instance, seed, delta, profile)

    def make_subrun(i: int) -> SubRun:
        oracle, state, proc = make(i)
        return SubRun(i, delta / 2**i, SteppableRun(proc, oracle), state)

    inter = Interleaver(make_subrun, budget)
    inter.run()
    subs = []
    per_arm = [0] * instance.n
    by_tag: dict[str, int] = {}
    for i, sub in sorted(inter.subruns.items()):
        led = sub.run.oracle.ledger()
        per_arm = [a + b for a, b in zip(per_arm, led.per_arm)]
        for k, v in sub.run.oracle.by_tag.items():
            by_tag[k] = by_tag.get(k, 0) + v
        subs.append({
            "subrun": i,
            "delta": sub.delta,
            "steps": sub.run.steps,
            "draws": led.total,
            "finished": sub.run.finished,
            "output": sub.run.status.arm if sub.run.finished else None,
            "stop_reason": sub.state.stop_reason,
            "per_arm": led.per_arm,
        })
    if inter.winner is not None:
        win = inter.subruns[inter.winner]
        out, reason = win.run.status.arm, win.state.stop_reason
    else:
        out = _settled_champion(inter.subruns[1]) if 1 in inter.subruns else 0
        reason = BUDGET
    return out, reason, inter.winner, inter.r, per_arm, by_tag, subs


def _star_fast(instance, seed, delta, profile, budget):
    make = _vd_subrun_factory(instance, seed, delta, profile, record=True)
    n = instance.n
    # Round in which the (budget+1)-th draw would happen if nobody finished.
    if budget is None:
        r_budget = math.inf
    else:
        lo, hi = 1, 2 * budget + 4
        while lo < hi:
            mid = (lo + hi) // 2
            if _draws_through(mid) >= budget + 1:
                hi = mid
            else:
                lo = mid + 1
        r_budget = lo

    r_star, winner = math.inf, None
    runs: dict[int, dict] = {}
    i = 1
    while 2**i <= min(r_star - 1, r_budget):
        cap = None if budget is None else budget
        if r_star != math.inf:
            steps_cap = math.ceil(r_star / 2**i) - 1
            cap = steps_cap if cap is None else min(cap, steps_cap)
        oracle, state, proc = make(i, cap)
        finished, value = _execute_tracking(proc, oracle)
        runs[i] = {"oracle": oracle, "state": state, "finished": finished,
                   "value": value if finished else None,
                   "pending": None if finished else value}
        if finished:
            r_i = (oracle.total_count + 1) * 2**i
            if r_i < r_star:
                r_star, winner = r_i, i
        i += 1

    def draws_for(j: int, r_end: int, extra: set[int]) -> int:
        return (r_end - 1) // 2**j + (1 if j in extra else 0)

    def ledger_for(j: int, m: int):
        info = runs[j]
        log = list(info["oracle"].log)
        pending = info["pending"]
        if pending is not None:
            log.append((pending.arm, pending.count) if hasattr(pending, "count")
                       else (tuple(pending.arms), pending.rounds))
        return prefix_ledger(log, n, m)

    normal = False
    if winner is not None:
        before_winner = {j for j in runs if j < winner and r_star % 2**j == 0}
        final_total = _draws_through(r_star - 1) + len(before_winner)
        normal = budget is None or final_total <= budget
    if normal:
        r_end, extra = r_star, before_winner
    else:
        r_end = r_budget
        q = budget - _draws_through(r_end - 1)
        order = [j for j in range(1, r_end.bit_length() + 1) if r_end % 2**j == 0]
        extra = set(order[:q])

    subs = []
    per_arm = [0] * n
    by_tag: dict[str, int] = {}
    for j in sorted(runs):
        if 2**j > r_end:
            continue
        info = runs[j]
        if normal and j == winner:
            m = info["oracle"].total_count
            steps = m + 1
        else:
            m = draws_for(j, r_end, extra)
            if not normal and winner is not None and j >= winner and r_end == r_star:
                m = (r_end - 1) // 2**j
            steps = m
        led = ledger_for(j, m)
        per_arm = [a + b for a, b in zip(per_arm, led.per_arm)]
        finished = normal and j == winner
        subs.append({
            "subrun": j,
            "delta": delta / 2**j,
            "steps": steps,
            "draws": m,
            "finished": finished,
            "output": info["value"] if finished else None,
            "stop_reason": info["state"].stop_reason if finished else None,
            "per_arm": led.per_arm,
        })
    if normal:
        out, reason = runs[winner]["value"], runs[winner]["state"].stop_reason
        # tag totals are not recoverable from prefixes of unfinished runs
        by_tag = None
    else:
        m1 = next((s["draws"] for s in subs if s["subrun"] == 1), 0)
        oracle, state, proc = make(1, m1)
        finished, value = _execute_tracking(proc, oracle)
        out = value if finished else state.champion
        reason = BUDGET
        by_tag = None
    return out, reason, winner if normal else None, r_end, per_arm, by_tag, subs


def vd_best_arm_id_star(instance: BanditInstance, seed: int, delta: float,
                        profile: AlgoProfile | str = PAPER, budget: int | None = DEFAULT_BUDGET,
                        mode: str = "fast") -> RunReport:
    """Interleaved copies of the identifier with confidences delta / 2^i."""
    if not 0 < delta <= 0.1:
        raise ValueError("the interleaved identifier requires 0 < delta <= 0.1")
    profile = get_profile(profile)
    start = time.perf_counter()
    if mode == "stepped":
        result = _star_stepped(instance, seed, delta, profile, budget)
    elif mode == "fast":
        result = _star_fast(instance, seed, delta, profile, budget)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    out, reason, winner, rounds_outer, per_arm, by_tag, subs = result
    return RunReport(
        algorithm="vd_star",
        profile=profile.name,
        seed=seed,
        delta=delta,
        output_arm=out,
        correct=out == instance.best_arm,
        total_samples=sum(per_arm),
        per_arm_samples=per_arm,
        rounds=[{k: v for k, v in s.items() if k != "per_arm" and v is not None} for s in subs],
        stop_reason=reason,
        wall_ms=(time.perf_counter() - start) * 1000,
        samples_by_tag={},
        extra={"terminating_subrun": winner, "outer_rounds": rounds_outer,
               "subrun_per_arm": {str(s["subrun"]): s["per_arm"] for s in subs}},
    )
