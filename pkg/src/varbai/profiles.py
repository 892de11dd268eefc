"""Constant bundles shared by the variance-dependent algorithms."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace


@dataclass(frozen=True)
class AlgoProfile:
    """Every tunable constant of the estimator / elimination stack.

    The ``paper`` bundle holds the reference constants (c = 80, beta =
    sqrt(255)/16 e^0.001, threshold 10); ``practical`` shrinks the
    variance-test constant and the IterElim accuracy decay so that
    end-to-end runs on more than ten arms fit on a desk.
    """

    name: str = "paper"
    var_test_c: float = 80.0
    var_est_delta_divisor: float = math.e
    iter_elim_beta: float = math.sqrt(255) / 16 * math.exp(0.001)
    iter_elim_threshold: int = 10
    iter_elim_delta_rate: float = 0.1
    group_elim_var_split: float = 2.0  # VarEst confidence delta / (split * N^2)
    group_elim_mean_split: float = 9.0  # MeanEst confidence delta / (split * N)
    vd_eps_shift: int = 2  # eps_r = 2^-(r + shift)
    vd_delta_split: float = 18.0

    def to_dict(self) -> dict:
        return asdict(self)

    def with_(self, **changes) -> "AlgoProfile":
        return replace(self, **changes)


PAPER = AlgoProfile()
PRACTICAL = AlgoProfile(name="practical", var_test_c=8.0, iter_elim_beta=0.75)

PROFILES = {"paper": PAPER, "practical": PRACTICAL}


def get_profile(name: str | AlgoProfile) -> AlgoProfile:
    if isinstance(name, AlgoProfile):
        return name
    try:
        return PROFILES[name]
    except KeyError:
        raise ValueError(f"unknown profile {name!r}; choose from {sorted(PROFILES)}") from None
