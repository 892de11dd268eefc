"""Variance threshold test, dyadic variance estimation and Bernstein mean estimation.

Each estimator comes in two forms: a ``*_proc`` generator that composes into
larger algorithms via ``yield from``, and a plain function that runs it
against an oracle.
"""

from __future__ import annotations

import math

import numpy as np

from .profiles import PAPER, AlgoProfile
from .sampling import Draw, SamplingOracle, execute


def var_test_count(tau: float, delta: float, c: float) -> int:
    """Half-sample size T = ceil((c / tau) ln(1/delta)); the test draws 2T."""
    return max(1, math.ceil(c / tau * -math.log(delta)))


def var_test_proc(arm: int, tau: float, delta: float, c: float):
    """Is the variance of ``arm`` above ``tau``?

    Pairs draw r with draw r + T, so each (x_r - x_{r+T})^2 / 2 is an unbiased
    variance sample. The guarantee needs delta <= 1/e (not enforced).
    """
    if not 0 < tau <= 0.5:
        raise ValueError(f"tau must lie in (0, 1/2], got {tau}")
    if c < 1:
        raise ValueError("c must be >= 1")
    t = var_test_count(tau, delta, c)
    x = yield Draw(arm, 2 * t, "var_test")
    sigma_hat = float(np.mean((x[:t] - x[t:]) ** 2) / 2)
    return sigma_hat > tau


def var_est_proc(arm: int, delta: float, ell: float, profile: AlgoProfile = PAPER):
    """Descend tau = 1/2, 1/4, ... until tau <= ell or the variance test fires.

    The threshold check runs first, so ell >= 1/2 costs nothing. The result
    is always a dyadic strictly above ell / 2.
    """
    if ell <= 0:
        raise ValueError("ell must be positive")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    inner = delta / profile.var_est_delta_divisor
    r = 1
    while True:
        tau = 0.5**r
        if tau <= ell:
            return tau
        if (yield from var_test_proc(arm, tau, inner, profile.var_test_c)):
            return tau
        r += 1


def bernstein_sample_count(sigma_hat_sq: float, epsilon: float, delta: float) -> int:
    """ceil((8 s^2 / eps^2 + 2 / (3 eps)) ln(4 / delta)), at least 1."""
    n = (8 * sigma_hat_sq / epsilon**2 + 2 / (3 * epsilon)) * math.log(4 / delta)
    return max(1, math.ceil(n))


def sample_mean(x: np.ndarray) -> float:
    """Mean shifted by the first sample; exact when every sample is equal."""
    x0 = x[0]
    return float(x0 + np.mean(x - x0))


def mean_est_proc(arm: int, epsilon: float, delta: float, profile: AlgoProfile = PAPER):
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    sigma_hat = yield from var_est_proc(arm, delta / 2, epsilon, profile)
    k = bernstein_sample_count(sigma_hat, epsilon, delta)
    x = yield Draw(arm, k, "mean_est")
    return sample_mean(x)


def var_test(oracle: SamplingOracle, arm: int, tau: float, delta: float, c: float = 80.0) -> bool:
    return execute(var_test_proc(arm, tau, delta, c), oracle)


def var_est(oracle: SamplingOracle, arm: int, delta: float, ell: float,
            profile: AlgoProfile = PAPER) -> float:
    return execute(var_est_proc(arm, delta, ell, profile), oracle)


def mean_est(oracle: SamplingOracle, arm: int, epsilon: float, delta: float,
             profile: AlgoProfile = PAPER) -> float:
    """Estimate the mean of ``arm`` to within ``epsilon`` with probability 1 - delta."""
    return execute(mean_est_proc(arm, epsilon, delta, profile), oracle)


def mistake_ratio(sigma_sq: float, tau: float) -> float:
    """Dyadic distance ceil(|log2(sigma^2 / tau)|) between a variance and its estimate."""
    if sigma_sq <= 0:
        return math.inf
    return math.ceil(abs(math.log2(sigma_sq / tau)))
