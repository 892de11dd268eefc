"""Finite-support bandit instances with exact ground truth.

Every arm is a finite PMF on [0, 1], so means, variances, gaps and KL
divergences are computed exactly rather than estimated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

PROB_TOL = 1e-12


class InstanceError(ValueError):
    """Raised when a distribution or instance violates its invariants."""


@dataclass(frozen=True)
class RewardDistribution:
    """A finite PMF on [0, 1].

    Duplicate support values are merged and zero-probability entries dropped,
    so two distributions with the same PMF compare equal.
    """

    values: tuple[float, ...]
    probs: tuple[float, ...]
    _cdf: np.ndarray = field(init=False, repr=False, compare=False)
    _support: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.values) != len(self.probs):
            raise InstanceError("values and probs must have equal length")
        if not self.values:
            raise InstanceError("empty support")
        merged: dict[float, float] = {}
        for v, p in zip(self.values, self.probs):
            v, p = float(v), float(p)
            if not (0.0 <= v <= 1.0) or math.isnan(v):
                raise InstanceError(f"value outside [0,1]: {v}")
            if not (0.0 <= p <= 1.0) or math.isnan(p):
                raise InstanceError(f"probability outside [0,1]: {p}")
            merged[v] = merged.get(v, 0.0) + p
        total = math.fsum(merged.values())
        if abs(total - 1.0) > PROB_TOL:
            raise InstanceError(f"probabilities sum to {total!r}, not 1")
        items = sorted((v, p) for v, p in merged.items() if p > 0.0)
        object.__setattr__(self, "values", tuple(v for v, _ in items))
        object.__setattr__(self, "probs", tuple(p for _, p in items))
        cdf = np.cumsum(self.probs)
        cdf[-1] = 1.0
        object.__setattr__(self, "_cdf", cdf)
        object.__setattr__(self, "_support", np.asarray(self.values, dtype=float))

    # named families

    @classmethod
    def point(cls, value: float) -> "RewardDistribution":
        return cls((value,), (1.0,))

    @classmethod
    def bernoulli(cls, p: float) -> "RewardDistribution":
        if not 0.0 <= p <= 1.0:
            raise InstanceError(f"Bernoulli parameter outside [0,1]: {p}")
        return cls((0.0, 1.0), (1.0 - p, p))

    @classmethod
    def two_point(cls, mu: float, sigma: float) -> "RewardDistribution":
        """Symmetric two-point law on {mu - sigma, mu + sigma}, each w.p. 1/2."""
        if sigma < 0:
            raise InstanceError("sigma must be nonnegative")
        return cls((mu - sigma, mu + sigma), (0.5, 0.5))

    @classmethod
    def from_pmf(cls, pmf: Iterable[Sequence[float]]) -> "RewardDistribution":
        pairs = [tuple(pair) for pair in pmf]
        if any(len(pair) != 2 for pair in pairs):
            raise InstanceError("pmf entries must be [value, prob] pairs")
        return cls(tuple(v for v, _ in pairs), tuple(p for _, p in pairs))

    @property
    def mean(self) -> float:
        return math.fsum(v * p for v, p in zip(self.values, self.probs))

    @property
    def variance(self) -> float:
        m = self.mean
        return math.fsum(p * (v - m) ** 2 for v, p in zip(self.values, self.probs))

    def prob_of(self, value: float) -> float:
        try:
            return self.probs[self.values.index(value)]
        except ValueError:
            return 0.0

    def sample_from_uniforms(self, u: np.ndarray) -> np.ndarray:
        """Map uniforms in [0, 1) to rewards by CDF inversion."""
        if len(self.values) == 1:
            return np.full(u.shape, self._support[0])
        if len(self.values) == 2:
            return np.where(u >= self._cdf[0], self._support[1], self._support[0])
        idx = np.searchsorted(self._cdf, u, side="right")
        return self._support[np.minimum(idx, len(self.values) - 1)]

    def to_dict(self) -> dict[str, Any]:
        return {"pmf": [[v, p] for v, p in zip(self.values, self.probs)]}


def moments(d: RewardDistribution) -> tuple[float, float]:
    """Exact (mean, variance) of a finite PMF."""
    return d.mean, d.variance


@dataclass(frozen=True)
class BanditInstance:
    """An ordered list of arms; arm indices are 0-based.

    Construction does not enforce the n >= 2 / unique-best invariants so that
    degenerate sub-problems can be represented; call :func:`validate`.
    """

    arms: tuple[RewardDistribution, ...]
    name: str = "instance"

    def __post_init__(self) -> None:
        object.__setattr__(self, "arms", tuple(self.arms))
        if not self.arms:
            raise InstanceError("an instance needs at least one arm")

    @property
    def n(self) -> int:
        return len(self.arms)

    @property
    def means(self) -> np.ndarray:
        return np.array([a.mean for a in self.arms])

    @property
    def variances(self) -> np.ndarray:
        return np.array([a.variance for a in self.arms])

    @property
    def best_arm(self) -> int:
        # lowest index among maximisers
        return int(np.argmax(self.means))

    @property
    def gaps(self) -> np.ndarray:
        """Gap to the best arm; the best arm's own gap is the smallest other gap."""
        means = self.means
        best = self.best_arm
        gaps = means[best] - means
        if self.n == 1:
            return np.array([math.nan])
        gaps[best] = np.min(np.delete(gaps, best))
        return gaps

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "arms": [a.to_dict() for a in self.arms]}


def validate(inst: BanditInstance) -> BanditInstance:
    """Check the instance invariants, raising :class:`InstanceError` listing every violation."""
    problems = []
    if inst.n < 2:
        problems.append(f"need at least 2 arms, got {inst.n}")
    for idx, arm in enumerate(inst.arms):
        if any(not 0.0 <= v <= 1.0 for v in arm.values):
            problems.append(f"arm {idx}: value outside [0,1]")
        if abs(math.fsum(arm.probs) - 1.0) > PROB_TOL:
            problems.append(f"arm {idx}: probabilities do not sum to 1")
    if inst.n >= 2:
        means = inst.means
        top = means.max()
        if np.count_nonzero(means == top) > 1:
            problems.append("tied best arm")
    if problems:
        raise InstanceError("; ".join(problems))
    return inst


def make_example1(n: int) -> BanditInstance:
    """``n`` Bernoulli arms with means 1 - i/n for i = 1..n."""
    if n < 2:
        raise InstanceError("the 1 - i/n family needs n >= 2")
    arms = [RewardDistribution.bernoulli(1.0 - i / n) for i in range(1, n + 1)]
    return validate(BanditInstance(tuple(arms), name=f"example1_n{n}"))


def _check_lower_bound_params(sigmas: Sequence[float], deltas: Sequence[float]) -> None:
    if len(sigmas) < 2:
        raise InstanceError("need at least two arms")
    if len(deltas) != len(sigmas) - 1:
        raise InstanceError("deltas must have one entry per arm after the first")
    for s in sigmas:
        if s < 0 or s * s >= 0.1:
            raise InstanceError(f"sigma^2 must lie in [0, 0.1): sigma={s}")
    for d in deltas:
        if not 0.0 < d < 0.1:
            raise InstanceError(f"gap must lie in (0, 0.1): {d}")


def make_lower_bound_instance(sigmas: Sequence[float], deltas: Sequence[float]) -> BanditInstance:
    """Hard instance: symmetric two-point arms centred at 0.5 and 0.5 - gap."""
    _check_lower_bound_params(sigmas, deltas)
    arms = [RewardDistribution.two_point(0.5, sigmas[0])]
    arms += [RewardDistribution.two_point(0.5 - d, s) for s, d in zip(sigmas[1:], deltas)]
    return validate(BanditInstance(tuple(arms), name="lower_bound"))


PERTURBATIONS = ("prime_1", "doubleprime_1", "prime_i", "doubleprime_i")


def _two_point_params(arm: RewardDistribution) -> tuple[float, float, float]:
    """Return (low, high, sigma) of a symmetric two-point arm (low == high for a point mass)."""
    if len(arm.values) == 1:
        return arm.values[0], arm.values[0], 0.0
    if len(arm.values) != 2 or abs(arm.probs[0] - 0.5) > PROB_TOL:
        raise InstanceError("base arm is not a symmetric two-point distribution")
    lo, hi = arm.values
    return lo, hi, (hi - lo) / 2


def make_perturbed_instance(base: BanditInstance, variant: str, i: int) -> BanditInstance:
    """Replace arm ``i`` of a lower-bound instance so that the best arm changes.

    ``prime_1``/``doubleprime_1`` demote the best arm below the runner-up;
    ``prime_i``/``doubleprime_i`` promote a sub-optimal arm above the best.
    """
    if variant not in PERTURBATIONS:
        raise InstanceError(f"unknown variant {variant!r}")
    best = base.best_arm
    if not 0 <= i < base.n:
        raise InstanceError(f"arm index {i} out of range")
    if variant.endswith("_1") != (i == best):
        raise InstanceError(f"variant {variant} does not apply to arm {i} (best arm is {best})")
    lo, hi, sigma = _two_point_params(base.arms[i])
    gap = float(base.gaps[i])
    tol = 1e-12

    if variant.startswith("prime"):
        if sigma <= 0 or sigma + tol < 5 * gap:
            raise InstanceError(f"prime variant needs sigma >= 5*gap (sigma={sigma}, gap={gap})")
        shift = gap / sigma
        if variant == "prime_1":
            new = RewardDistribution((hi, lo), (0.5 - shift, 0.5 + shift))
        else:
            new = RewardDistribution((hi, lo), (0.5 + shift, 0.5 - shift))
    elif variant == "doubleprime_1":
        q = 0.5 - 2 * gap
        if q < 0 or 4 * gap > 1:
            raise InstanceError("infeasible probabilities")
        new = RewardDistribution((hi, lo, 0.0), (q, q, 4 * gap))
    else:
        q = 0.5 - gap
        if q < 0 or 2 * gap > 1:
            raise InstanceError("infeasible probabilities")
        new = RewardDistribution((1.0, hi, lo), (2 * gap, q, q))

    arms = list(base.arms)
    arms[i] = new
    out = validate(BanditInstance(tuple(arms), name=f"{base.name}_{variant}_{i}"))
    if out.best_arm == best:
        raise InstanceError("perturbation failed to change the best arm")
    return out


def kl_divergence(p: RewardDistribution, q: RewardDistribution) -> float:
    """KL(p || q) in nats; ``inf`` when p puts mass where q has none."""
    total = []
    for v, pv in zip(p.values, p.probs):
        qv = q.prob_of(v)
        if qv == 0.0:
            return math.inf
        total.append(pv * math.log(pv / qv))
    return max(math.fsum(total), 0.0)


@dataclass(frozen=True)
class ComplexityProfile:
    phi: float
    psi: float

    def upper_proxy(self, delta: float) -> float:
        return self.phi * math.log(1 / delta) + self.psi

    def lower_bound(self, delta: float) -> float:
        return self.phi * math.log(1 / delta) / 80


def complexity_profile(inst: BanditInstance) -> ComplexityProfile:
    """Hardness sums over all arms (using the best arm's gap = smallest gap)."""
    if inst.n < 2:
        raise InstanceError("complexity needs at least 2 arms")
    terms = [s / d**2 + 1 / d for s, d in zip(inst.variances, inst.gaps)]
    loglog = [math.log(math.e + math.log(1 / d)) for d in inst.gaps]
    return ComplexityProfile(
        phi=math.fsum(terms),
        psi=math.fsum(t * g for t, g in zip(terms, loglog)),
    )


# instance files


def _arm_from_spec(spec: dict[str, Any]) -> RewardDistribution:
    if "pmf" in spec:
        return RewardDistribution.from_pmf(spec["pmf"])
    family = spec.get("family")
    params = spec.get("params", {})
    builders = {
        "point": (RewardDistribution.point, ("value",)),
        "bernoulli": (RewardDistribution.bernoulli, ("p",)),
        "two_point": (RewardDistribution.two_point, ("mu", "sigma")),
    }
    if family not in builders:
        raise InstanceError(f"unknown arm family {family!r}")
    fn, names = builders[family]
    if isinstance(params, dict):
        try:
            args = [float(params[k]) for k in names]
        except KeyError as exc:
            raise InstanceError(f"family {family} needs params {names}") from exc
    else:
        args = [float(x) for x in (params if isinstance(params, list) else [params])]
        if len(args) != len(names):
            raise InstanceError(f"family {family} needs params {names}")
    return fn(*args)


def instance_from_dict(doc: dict[str, Any]) -> BanditInstance:
    if not isinstance(doc, dict) or "arms" not in doc:
        raise InstanceError("instance document needs an 'arms' list")
    arms = tuple(_arm_from_spec(a) for a in doc["arms"])
    return validate(BanditInstance(arms, name=str(doc.get("name", "instance"))))


def load_instance(path: str | Path) -> BanditInstance:
    """Load a JSON or YAML instance document and validate it."""
    import yaml

    with open(path) as fh:
        doc = yaml.safe_load(fh)
    return instance_from_dict(doc)
