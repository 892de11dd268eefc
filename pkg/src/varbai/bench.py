"""Trial orchestration, aggregation and the two reproduction reports.

Trial t of an experiment uses seed ``base_seed + t`` and its own oracle, so
results do not depend on the worker count or on completion order.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .instances import (
    PERTURBATIONS,
    BanditInstance,
    InstanceError,
    RewardDistribution,
    complexity_profile,
    instance_from_dict,
    kl_divergence,
    load_instance,
    make_example1,
    make_lower_bound_instance,
    make_perturbed_instance,
    validate,
)
from .runner import ALGORITHMS, IDENTIFIERS, RunReport, run_identifier
from .sampling import DEFAULT_BUDGET

CSV_COLUMNS = ("trial", "seed", "algorithm", "profile", "n", "delta", "output_arm",
               "correct", "total_samples", "wall_ms")
WORKERS_ENV = "VARBAI_WORKERS"


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    return max(1, value)


def resolve_instance(spec: Any) -> BanditInstance:
    """Accept an instance, a file path, or a dict (inline arms or a named generator)."""
    if isinstance(spec, BanditInstance):
        return validate(spec)
    if isinstance(spec, (str, Path)):
        return load_instance(spec)
    if isinstance(spec, dict):
        gen = spec.get("generator")
        if gen is None:
            return instance_from_dict(spec)
        if gen == "example1":
            return validate(make_example1(int(spec["n"])))
        if gen == "lower_bound":
            return validate(make_lower_bound_instance(spec["sigmas"], spec["deltas"]))
        if gen == "bernoulli":
            arms = tuple(RewardDistribution.bernoulli(float(p)) for p in spec["means"])
            return validate(BanditInstance(arms, name=spec.get("name", "bernoulli")))
        raise InstanceError(f"unknown instance generator {gen!r}")
    raise InstanceError(f"cannot build an instance from {type(spec).__name__}")


@dataclass
class ExperimentConfig:
    instance: Any
    algorithm: str = "vd"
    delta: float = 0.1
    epsilon: float | None = None
    trials: int = 100
    seed: int = 0
    profile: str = "practical"
    budget: int | None = DEFAULT_BUDGET
    csv_path: str | None = None
    json_path: str | None = None
    workers: int | None = None
    star_mode: str = "fast"

    def check(self) -> BanditInstance:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        return resolve_instance(self.instance)

    def summary(self) -> dict[str, Any]:
        d = asdict(self)
        if isinstance(self.instance, BanditInstance):
            d["instance"] = self.instance.to_dict()
        elif isinstance(self.instance, Path):
            d["instance"] = str(self.instance)
        return d


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion (95% by default)."""
    if trials == 0:
        return 0.0, 1.0
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == trials else min(1.0, centre + half)
    return lo, hi


@dataclass
class TrialRecord:
    trial: int
    seed: int
    algorithm: str
    profile: str
    n: int
    delta: float
    output_arm: int | None
    correct: bool
    total_samples: int
    wall_ms: float
    per_arm_samples: list[int] = field(default_factory=list)
    stop_reason: str = ""

    def csv_row(self) -> list[Any]:
        return [getattr(self, c) for c in CSV_COLUMNS]


@dataclass
class AggregateReport:
    config: dict[str, Any]
    trials: int
    successes: int
    success_rate: float
    success_ci: tuple[float, float]
    mean_samples: float
    median_samples: float
    p95_samples: float
    mean_per_arm: list[float]
    budget_hits: int
    upper_proxy: float
    lower_bound: float
    records: list[TrialRecord]

    def to_dict(self, with_records: bool = True) -> dict[str, Any]:
        d = asdict(self)
        d["success_ci"] = list(self.success_ci)
        if not with_records:
            d.pop("records")
        return d


def _run_trial(args: tuple) -> TrialRecord:
    t, inst, cfg = args
    seed = cfg.seed + t
    rep: RunReport = run_identifier(cfg.algorithm, inst, cfg.delta, seed, cfg.profile,
                                    cfg.budget, cfg.epsilon, cfg.star_mode)
    return TrialRecord(t, seed, rep.algorithm, rep.profile, inst.n, cfg.delta, rep.output_arm,
                       bool(rep.correct), rep.total_samples, round(rep.wall_ms, 3),
                       rep.per_arm_samples, rep.stop_reason)


def aggregate(cfg: ExperimentConfig, inst: BanditInstance,
              records: Sequence[TrialRecord]) -> AggregateReport:
    records = sorted(records, key=lambda r: r.trial)
    totals = np.array([r.total_samples for r in records], dtype=float)
    wins = sum(r.correct for r in records)
    prof = complexity_profile(inst)
    return AggregateReport(
        config=cfg.summary(),
        trials=len(records),
        successes=int(wins),
        success_rate=wins / len(records),
        success_ci=wilson_interval(int(wins), len(records)),
        mean_samples=float(totals.mean()),
        median_samples=float(np.median(totals)),
        p95_samples=float(np.percentile(totals, 95)),
        mean_per_arm=np.mean([r.per_arm_samples for r in records], axis=0).tolist(),
        budget_hits=sum(r.stop_reason == "budget" for r in records),
        upper_proxy=prof.upper_proxy(cfg.delta),
        lower_bound=prof.lower_bound(cfg.delta),
        records=list(records),
    )


def write_outputs(report: AggregateReport, csv_path: str | None, json_path: str | None) -> None:
    if csv_path:
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for rec in report.records:
                w.writerow(rec.csv_row())
    if csv_path and not json_path:
        json_path = str(Path(csv_path).with_suffix(".json"))
    if json_path:
        doc = report.to_dict(with_records=False)
        doc["per_trial"] = [
            {"trial": r.trial, "seed": r.seed, "per_arm_samples": r.per_arm_samples,
             "stop_reason": r.stop_reason}
            for r in report.records
        ]
        with open(json_path, "w") as fh:
            json.dump(doc, fh, indent=2, default=str)


def run_experiment(cfg: ExperimentConfig) -> AggregateReport:
    inst = cfg.check()
    workers = cfg.workers or default_workers()
    jobs = [(t, inst, cfg) for t in range(cfg.trials)]
    if workers > 1 and cfg.trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_trial, jobs, chunksize=max(1, cfg.trials // (4 * workers))))
    else:
        records = [_run_trial(j) for j in jobs]
    report = aggregate(cfg, inst, records)
    write_outputs(report, cfg.csv_path, cfg.json_path)
    return report


# scaling on the 1 - i/n family


@dataclass
class SweepCell:
    n: int
    algorithm: str
    profile: str
    trials: int
    mean_samples: float
    success_rate: float


@dataclass
class SweepTable:
    cells: list[SweepCell]
    ratios: list[dict[str, Any]]

    def mean(self, algorithm: str, n: int) -> float:
        for c in self.cells:
            if c.algorithm == algorithm and c.n == n:
                return c.mean_samples
        raise KeyError((algorithm, n))

    def ratio(self, algorithm: str, n: int) -> float:
        """T(2n) / T(n)."""
        return self.mean(algorithm, 2 * n) / self.mean(algorithm, n)

    def to_dict(self) -> dict[str, Any]:
        return {"cells": [asdict(c) for c in self.cells], "ratios": self.ratios}


def sweep_example1(n_list: Sequence[int], delta: float = 0.1, trials: int = 50,
                   profile: str = "paper", algorithms: Sequence[str] = ("naive", "succ_elim"),
                   include_vd: bool = False, seed: int = 0, workers: int | None = None,
                   budget: int | None = DEFAULT_BUDGET) -> SweepTable:
    """Mean samples on ``make_example1(n)`` for each n, plus doubling ratios."""
    if any(n < 2 for n in n_list):
        raise ValueError("every n must be >= 2")
    algos = [(a, profile) for a in algorithms]
    if include_vd:
        algos.append(("vd", "practical"))
    cells = []
    for n in n_list:
        for algo, prof in algos:
            cfg = ExperimentConfig({"generator": "example1", "n": n}, algo, delta, trials=trials,
                                   seed=seed, profile=prof, budget=budget, workers=workers)
            rep = run_experiment(cfg)
            cells.append(SweepCell(n, algo, prof, trials, rep.mean_samples, rep.success_rate))
    table = SweepTable(cells, [])
    ns = sorted(set(n_list))
    for algo, _ in algos:
        for n in ns:
            if 2 * n in ns:
                table.ratios.append({"algorithm": algo, "n": n, "2n": 2 * n,
                                     "ratio": table.ratio(algo, n)})
    return table


# lower-bound consistency


def prime_kl_closed_form(gap: float, sigma: float) -> float:
    """KL between a symmetric two-point arm and its prime perturbation."""
    return 0.5 * math.log(1 / (1 - 4 * gap * gap / (sigma * sigma)))


@dataclass
class LowerBoundReport:
    sigmas: list[float]
    deltas: list[float]
    delta: float
    phi: float
    lower_bound: float
    rows: list[dict[str, Any]]
    kl_rows: list[dict[str, Any]]

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def perturbation_kl_table(base: BanditInstance) -> list[dict[str, Any]]:
    gaps = base.gaps
    rows = []
    for variant in PERTURBATIONS:
        targets = [0] if variant.endswith("_1") else list(range(1, base.n))
        for i in targets:
            row: dict[str, Any] = {"variant": variant, "arm": i}
            try:
                alt = make_perturbed_instance(base, variant, i)
            except InstanceError as exc:
                row.update(feasible=False, reason=str(exc))
                rows.append(row)
                continue
            kl = math.fsum(kl_divergence(p, q) for p, q in zip(base.arms, alt.arms))
            row.update(feasible=True, kl=kl, new_best=alt.best_arm)
            if variant.startswith("prime"):
                sigma = math.sqrt(base.variances[i])
                row["closed_form"] = prime_kl_closed_form(float(gaps[i]), sigma)
            rows.append(row)
    return rows


def lower_bound_report(sigmas: Sequence[float], deltas: Sequence[float], delta: float = 0.1,
                       trials: int = 20, algorithms: Sequence[str] = IDENTIFIERS,
                       profile: str = "practical", seed: int = 0,
                       workers: int | None = None) -> LowerBoundReport:
    base = validate(make_lower_bound_instance(sigmas, deltas))
    prof = complexity_profile(base)
    bound = prof.lower_bound(delta)
    rows = []
    for algo in algorithms:
        cfg = ExperimentConfig(base, algo, delta, trials=trials, seed=seed, profile=profile,
                               workers=workers)
        rep = run_experiment(cfg)
        rows.append({"algorithm": algo, "profile": profile, "trials": trials,
                     "mean_samples": rep.mean_samples, "success_rate": rep.success_rate,
                     "lower_bound": bound, "ratio": rep.mean_samples / bound,
                     "above_bound": rep.mean_samples >= bound})
    return LowerBoundReport(list(sigmas), list(deltas), delta, prof.phi, bound, rows,
                            perturbation_kl_table(base))
