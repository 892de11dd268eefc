"""Command-line entry point: ``varbai run | sweep-example1 | lower-bound | validate-instance``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .bench import (
    ExperimentConfig,
    default_workers,
    lower_bound_report,
    resolve_instance,
    run_experiment,
    sweep_example1,
)
from .instances import InstanceError, complexity_profile
from .profiles import PROFILES
from .runner import ALGORITHMS, IDENTIFIERS, PAC_MODES
from .sampling import DEFAULT_BUDGET, parse_seed

log = logging.getLogger("varbai")


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.replace(",", " ").split()]


def _budget(text: str) -> int | None:
    return None if text.lower() in ("none", "inf", "0") else int(float(text))


def _add_instance_args(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--instance", help="instance file (YAML or JSON)")
    g.add_argument("--example1", type=int, metavar="N", help="Bernoulli arms with means 1 - i/N")
    g.add_argument("--bernoulli", type=_floats, metavar="P,P,...", help="Bernoulli arms with these means")


def _instance_spec(args: argparse.Namespace):
    if args.instance:
        return args.instance
    if args.example1 is not None:
        return {"generator": "example1", "n": args.example1}
    return {"generator": "bernoulli", "means": args.bernoulli}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="varbai", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    profiles = sorted(PROFILES)

    p = sub.add_parser("run", help="repeat one algorithm on one instance")
    _add_instance_args(p)
    p.add_argument("--algorithm", choices=ALGORITHMS, default="vd")
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--epsilon", type=float, default=None,
                   help="accuracy for median_elim and the PAC modes (default: half the smallest gap)")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=parse_seed, default=0, help="base seed; trial t uses seed + t")
    p.add_argument("--profile", choices=profiles, default=None,
                   help="constants bundle (default: practical, or paper for the PAC modes)")
    p.add_argument("--budget", type=_budget, default=DEFAULT_BUDGET, help="per-trial draw cap")
    p.add_argument("--csv", dest="csv_path", default=None)
    p.add_argument("--json", dest="json_path", default=None,
                   help="aggregate + per-arm counts (default: next to --csv)")
    p.add_argument("--workers", type=int, default=None,
                   help="parallel trial workers (default: $VARBAI_WORKERS or 1)")
    p.add_argument("--star-mode", choices=("fast", "stepped"), default="fast")

    p = sub.add_parser("sweep-example1", help="sample-count scaling on Bernoulli arms with means 1 - i/n")
    p.add_argument("--n", type=int, nargs="+", default=[8, 16, 32])
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=parse_seed, default=0)
    p.add_argument("--profile", choices=profiles, default="practical")
    p.add_argument("--algorithms", nargs="+", choices=IDENTIFIERS, default=["naive", "succ_elim"])
    p.add_argument("--include-vd", action="store_true", help="also run vd (practical profile)")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default=None, help="write the table as JSON")

    p = sub.add_parser("lower-bound", help="compare measured samples with the hard-instance bound")
    p.add_argument("--sigmas", type=float, nargs="+", required=True)
    p.add_argument("--deltas", type=float, nargs="+", required=True, help="gaps of arms 2..n")
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=parse_seed, default=0)
    p.add_argument("--profile", choices=profiles, default="practical")
    p.add_argument("--algorithms", nargs="+", choices=IDENTIFIERS, default=list(IDENTIFIERS))
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("validate-instance", help="check an instance file and print its ground truth")
    p.add_argument("path")
    return parser


def _cmd_run(args) -> int:
    profile = args.profile or ("paper" if args.algorithm in PAC_MODES else "practical")
    cfg = ExperimentConfig(
        instance=_instance_spec(args), algorithm=args.algorithm, delta=args.delta,
        epsilon=args.epsilon, trials=args.trials, seed=args.seed, profile=profile,
        budget=args.budget, csv_path=args.csv_path, json_path=args.json_path,
        workers=args.workers or default_workers(), star_mode=args.star_mode,
    )
    rep = run_experiment(cfg)
    lo, hi = rep.success_ci
    print(f"{cfg.algorithm} [{profile}] trials={rep.trials} success={rep.success_rate:.4f} "
          f"(95% CI {lo:.4f}-{hi:.4f}) mean_samples={rep.mean_samples:.1f} "
          f"median={rep.median_samples:.1f} p95={rep.p95_samples:.1f} budget_hits={rep.budget_hits}")
    print(f"lower_bound={rep.lower_bound:.4g} upper_proxy={rep.upper_proxy:.4g}")
    return 0


def _cmd_sweep(args) -> int:
    table = sweep_example1(args.n, args.delta, args.trials, args.profile, args.algorithms,
                           args.include_vd, args.seed, args.workers or default_workers())
    print(f"{'n':>5} {'algorithm':>12} {'profile':>10} {'mean_samples':>16} {'success':>8}")
    for c in table.cells:
        print(f"{c.n:>5} {c.algorithm:>12} {c.profile:>10} {c.mean_samples:>16.1f} {c.success_rate:>8.3f}")
    for r in table.ratios:
        print(f"ratio {r['algorithm']}: T({r['2n']})/T({r['n']}) = {r['ratio']:.3f}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(table.to_dict(), fh, indent=2)
    return 0


def _cmd_lower_bound(args) -> int:
    rep = lower_bound_report(args.sigmas, args.deltas, args.delta, args.trials, args.algorithms,
                             args.profile, args.seed, args.workers or default_workers())
    print(f"phi={rep.phi:.6g} lower_bound={rep.lower_bound:.6g}")
    for r in rep.rows:
        print(f"{r['algorithm']:>12} mean_samples={r['mean_samples']:.1f} ratio={r['ratio']:.3g} "
              f"above_bound={r['above_bound']}")
    for r in rep.kl_rows:
        if r["feasible"]:
            extra = f" closed_form={r['closed_form']:.12g}" if "closed_form" in r else ""
            print(f"KL {r['variant']} arm {r['arm']}: {r['kl']:.12g}{extra}")
        else:
            print(f"KL {r['variant']} arm {r['arm']}: infeasible ({r['reason']})")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(rep.to_dict(), fh, indent=2)
    return 0


def _cmd_validate(args) -> int:
    inst = resolve_instance(args.path)
    prof = complexity_profile(inst)
    print(f"ok: {inst.name} with {inst.n} arms, best arm {inst.best_arm}")
    for i, (m, v, g) in enumerate(zip(inst.means, inst.variances, inst.gaps)):
        print(f"  arm {i}: mean={m:.6g} variance={v:.6g} gap={g:.6g}")
    print(f"  phi={prof.phi:.6g} psi={prof.psi:.6g}")
    return 0


COMMANDS = {
    "run": _cmd_run,
    "sweep-example1": _cmd_sweep,
    "lower-bound": _cmd_lower_bound,
    "validate-instance": _cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (InstanceError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
