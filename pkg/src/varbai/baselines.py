"""Gap-only comparators: median elimination and successive elimination.

Neither looks at variance estimates; their sample counts depend only on the
schedule and the empirical means.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .estimation import sample_mean
from .grouped import median_keep
from .sampling import Draw, RoundRobin, SamplingOracle, execute


@dataclass(frozen=True)
class BaselineParams:
    me_eps_start: float = 0.25  # eps_1 = eps / 4
    me_delta_start: float = 0.5  # delta_1 = delta / 2
    me_eps_decay: float = 0.75
    me_delta_decay: float = 0.5
    se_first_chunk: int = 16
    se_max_cells: int = 1 << 22  # largest peeked round-robin block, in draws

    def to_dict(self) -> dict:
        return asdict(self)


DEFAULT_PARAMS = BaselineParams()


def median_elim_count(eps_l: float, delta_l: float) -> int:
    """Per-arm draws in one halving round: ceil(4 / (eps_l / 2)^2 * ln(3 / delta_l))."""
    return math.ceil(4 / (eps_l / 2) ** 2 * math.log(3 / delta_l))


def median_elimination_proc(arms: Sequence[int], epsilon: float, delta: float,
                            params: BaselineParams = DEFAULT_PARAMS, trace: list | None = None):
    if not arms:
        raise ValueError("arm set must be non-empty")
    if not 0 < epsilon < 1 or not 0 < delta < 1:
        raise ValueError("epsilon and delta must lie in (0, 1)")
    active = sorted(arms)
    eps_l = epsilon * params.me_eps_start
    delta_l = delta * params.me_delta_start
    while len(active) > 1:
        k = median_elim_count(eps_l, delta_l)
        estimates = []
        for arm in active:
            x = yield Draw(arm, k, "median_elim")
            estimates.append((arm, sample_mean(x)))
        kept = median_keep(estimates)
        if trace is not None:
            trace.append({"epsilon": eps_l, "delta": delta_l, "per_arm": k,
                          "active": list(active), "kept": kept})
        active = kept
        eps_l *= params.me_eps_decay
        delta_l *= params.me_delta_decay
    return active[0]


def se_radius(t: np.ndarray | int, delta: float, n: int) -> np.ndarray | float:
    """alpha(t) = sqrt(ln(4 n t^2 / delta) / (2 t))."""
    t = np.asarray(t, dtype=float)
    return np.sqrt(np.log(4 * n * t**2 / delta) / (2 * t))


def successive_elimination_proc(arms: Sequence[int], delta: float,
                                params: BaselineParams = DEFAULT_PARAMS):
    """Round-robin sampling with an elimination check after every full pass.

    Blocks of passes are peeked first; only the passes up to the first one
    that eliminates something are committed, so the result is identical to
    checking after each single pass.
    """
    if not arms:
        raise ValueError("arm set must be non-empty")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    active = sorted(arms)
    n = len(active)
    sums = {a: 0.0 for a in active}
    t = 0
    chunk = params.se_first_chunk
    while len(active) > 1:
        m = len(active)
        chunk = max(1, min(chunk, params.se_max_cells // m))
        block = yield RoundRobin(tuple(active), chunk, "succ_elim", peek=True)
        base = np.array([sums[a] for a in active])
        cum = base + np.cumsum(block, axis=0)
        ts = t + np.arange(1, chunk + 1)
        means = cum / ts[:, None]
        alpha = se_radius(ts, delta, n)
        out = (means.max(axis=1)[:, None] - means) > 2 * alpha[:, None]
        hit = out.any(axis=1)
        passes = int(np.argmax(hit)) + 1 if hit.any() else chunk
        got = yield RoundRobin(tuple(active), passes, "succ_elim")
        if not np.array_equal(got, block[:passes]):
            raise RuntimeError("committed draws differ from the peeked block")
        row = passes - 1
        for col, arm in enumerate(active):
            sums[arm] = float(cum[row, col])
        t += passes
        if hit.any():
            active = [a for col, a in enumerate(active) if not out[row, col]]
        else:
            chunk *= 2
    return active[0]


def median_elimination(oracle: SamplingOracle, arms: Sequence[int], epsilon: float,
                       delta: float, params: BaselineParams = DEFAULT_PARAMS) -> int:
    return execute(median_elimination_proc(arms, epsilon, delta, params), oracle)


def successive_elimination(oracle: SamplingOracle, arms: Sequence[int], delta: float,
                           params: BaselineParams = DEFAULT_PARAMS) -> int:
    return execute(successive_elimination_proc(arms, delta, params), oracle)
