import csv
import json
import math

import pytest

from varbai.bench import (
    CSV_COLUMNS,
    ExperimentConfig,
    lower_bound_report,
    resolve_instance,
    run_experiment,
    sweep_example1,
    wilson_interval,
)
from varbai.cli import main
from varbai.instances import InstanceError

POINTS = {"arms": [{"family": "point", "params": [0.8]}, {"family": "point", "params": [0.5]}]}


def test_wilson_interval():
    lo, hi = wilson_interval(90, 100)
    assert lo < 0.9 < hi
    assert wilson_interval(0, 10)[0] == 0.0
    assert wilson_interval(10, 10)[1] == 1.0


def test_point_mass_single_trial():
    rep = run_experiment(ExperimentConfig(POINTS, "vd", 0.1, trials=1))
    assert rep.success_rate == 1.0 and rep.trials == 1


def test_csv_and_json_outputs(tmp_path):
    csv_path = tmp_path / "a.csv"
    cfg = ExperimentConfig({"generator": "example1", "n": 4}, "naive", 0.1, trials=6, seed=10,
                           csv_path=str(csv_path))
    rep = run_experiment(cfg)
    rows = list(csv.reader(open(csv_path)))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 7
    assert [int(r[1]) for r in rows[1:]] == list(range(10, 16))
    assert rep.success_rate == sum(r[7] == "True" for r in rows[1:]) / 6
    doc = json.load(open(tmp_path / "a.json"))
    assert len(doc["per_trial"]) == 6
    assert all(sum(t["per_arm_samples"]) == int(r[8]) for t, r in zip(doc["per_trial"], rows[1:]))


def test_replay_identical_minus_wall_time(tmp_path):
    outs = []
    for k in range(2):
        p = tmp_path / f"{k}.csv"
        run_experiment(ExperimentConfig({"generator": "bernoulli", "means": [0.7, 0.4, 0.2]},
                                        "vd_star", 0.1, trials=4, csv_path=str(p)))
        outs.append([r[:-1] for r in csv.reader(open(p))])
    assert outs[0] == outs[1]


def test_workers_do_not_change_results():
    base = dict(instance={"generator": "example1", "n": 3}, algorithm="succ_elim", trials=6)
    a = run_experiment(ExperimentConfig(**base, workers=1))
    b = run_experiment(ExperimentConfig(**base, workers=2))
    strip = lambda rep: [(r.trial, r.output_arm, r.total_samples) for r in rep.records]
    assert strip(a) == strip(b)


def test_lower_bound_column_example1():
    rep = run_experiment(ExperimentConfig({"generator": "example1", "n": 4}, "succ_elim", 0.1, trials=2))
    phi = (0.1875 / 0.0625 + 4) + (0.25 / 0.0625 + 4) + (0.1875 / 0.25 + 2) + (0 + 4 / 3)
    assert phi == pytest.approx(19.0833, abs=1e-4)
    assert rep.lower_bound == pytest.approx(phi * math.log(10) / 80, rel=1e-12)


def test_budget_errors_recorded_per_trial():
    rep = run_experiment(ExperimentConfig({"generator": "example1", "n": 4}, "vd", 0.1, trials=2,
                                          budget=1000))
    assert rep.budget_hits == 2


def test_config_errors():
    with pytest.raises(ValueError):
        run_experiment(ExperimentConfig(POINTS, "vd", trials=0))
    with pytest.raises(ValueError):
        run_experiment(ExperimentConfig(POINTS, "nope"))
    with pytest.raises(InstanceError):
        resolve_instance({"generator": "mystery"})


def test_sweep_small():
    table = sweep_example1([2, 4], trials=3, profile="practical")
    assert table.mean("naive", 2) > 0 and math.isfinite(table.mean("succ_elim", 2))
    assert {r["algorithm"] for r in table.ratios} == {"naive", "succ_elim"}
    with pytest.raises(ValueError):
        sweep_example1([1])


def test_lower_bound_report_small():
    rep = lower_bound_report([0.25, 0.25], [0.05], trials=2, algorithms=["succ_elim"])
    assert rep.phi == pytest.approx(2 * (0.0625 / 0.0025 + 20))
    assert rep.rows[0]["above_bound"]
    prime = [r for r in rep.kl_rows if r["variant"] == "prime_1"][0]
    assert prime["kl"] == pytest.approx(prime["closed_form"], abs=1e-9)
    with pytest.raises(InstanceError):
        lower_bound_report([0.25, 0.25], [0.15], trials=1)


def test_cli_commands(tmp_path, capsys):
    inst = tmp_path / "i.yaml"
    inst.write_text("name: t\narms:\n  - {family: bernoulli, params: {p: 0.8}}\n"
                    "  - {family: two_point, params: [0.4, 0.2]}\n")
    assert main(["validate-instance", str(inst)]) == 0
    assert "ok: t with 2 arms" in capsys.readouterr().out
    out_csv = tmp_path / "r.csv"
    assert main(["run", "--instance", str(inst), "--trials", "3", "--algorithm", "succ_elim",
                 "--csv", str(out_csv), "--seed", "0x10"]) == 0
    assert "success=" in capsys.readouterr().out
    assert [r[1] for r in csv.reader(open(out_csv))][1:] == ["16", "17", "18"]
    assert main(["sweep-example1", "--n", "2", "4", "--trials", "2"]) == 0
    assert "ratio naive" in capsys.readouterr().out
    assert main(["lower-bound", "--sigmas", "0.25", "0.25", "--deltas", "0.05", "--trials", "1",
                 "--algorithms", "succ_elim"]) == 0
    assert "KL prime_1" in capsys.readouterr().out


def test_cli_error_exit(tmp_path, capsys):
    bad = tmp_path / "b.yaml"
    bad.write_text("arms:\n  - {family: bernoulli, params: {p: 0.5}}\n  - {family: bernoulli, params: {p: 0.5}}\n")
    assert main(["validate-instance", str(bad)]) == 2
    assert "tied best arm" in capsys.readouterr().err
    assert main(["validate-instance", str(tmp_path / "missing.yaml")]) == 2
    assert main(["lower-bound", "--sigmas", "0.5", "0.2", "--deltas", "0.05"]) == 2
