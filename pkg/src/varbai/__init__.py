"""Variance-dependent best-arm identification with a counted sampling oracle."""

from .instances import (
    BanditInstance,
    ComplexityProfile,
    InstanceError,
    RewardDistribution,
    complexity_profile,
    kl_divergence,
    load_instance,
    make_example1,
    make_lower_bound_instance,
    make_perturbed_instance,
    moments,
    validate,
)
from .profiles import PAPER, PRACTICAL, AlgoProfile, get_profile
from .runner import ALGORITHMS, run_identifier
from .sampling import BudgetExceeded, SamplingOracle, SteppableRun
from .vd import RunReport, vd_best_arm_id, vd_best_arm_id_star

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "AlgoProfile",
    "BanditInstance",
    "BudgetExceeded",
    "ComplexityProfile",
    "InstanceError",
    "PAPER",
    "PRACTICAL",
    "RewardDistribution",
    "RunReport",
    "SamplingOracle",
    "SteppableRun",
    "complexity_profile",
    "get_profile",
    "kl_divergence",
    "load_instance",
    "make_example1",
    "make_lower_bound_instance",
    "make_perturbed_instance",
    "moments",
    "run_identifier",
    "validate",
    "vd_best_arm_id",
    "vd_best_arm_id_star",
]
