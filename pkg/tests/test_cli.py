import json
import os
import subprocess
import sys

import pytest

from instances import MANIPULABLE, RUNNING
from organmatch.cli import main, parse_seeds
from organmatch.population import load_instance, organs_to_csv, patients_to_csv
from organmatch.report import recompute_metrics


def write_instance(tmp_path, inst, name="inst"):
    d = tmp_path / name
    d.mkdir()
    (d / "patients.csv").write_text(patients_to_csv(inst.patients))
    (d / "organs.csv").write_text(organs_to_csv(inst.organs))
    return d / "patients.csv", d / "organs.csv"


def test_generate_then_run(tmp_path):
    out = tmp_path / "d"
    assert main(["generate", "--preset", "era2014", "--patients", "100", "--organs", "50",
                 "--horizon", "365", "--seed", "7", "--out", str(out)]) == 0
    inst = load_instance(out / "patients.csv", out / "organs.csv")
    assert len(inst.patients) == 100 and len(inst.organs) == 50
    report = tmp_path / "r.json"
    assert main(["run", "--mechanism", "rank", "--patients", str(out / "patients.csv"),
                 "--organs", str(out / "organs.csv"), "--seed", "1", "--report", str(report)]) == 0
    data = json.loads(report.read_text())
    assert data["metrics"] == recompute_metrics(data)


def test_run_running_example(tmp_path):
    pf, of = write_instance(tmp_path, RUNNING)
    report = tmp_path / "r.json"
    assert main(["run", "--mechanism", "greedy", "--patients", str(pf), "--organs", str(of),
                 "--seed", "0", "--report", str(report)]) == 0
    data = json.loads(report.read_text())
    assert data["schema_version"] == "1"
    assert data["metrics"]["total_cost"] == 55
    assert data["offline"]["total_cost"] == 45
    assert data["metrics"]["competitive_ratio"] == "11/9"
    assert data["metrics"]["competitive_ratio_decimal"] == 1.222222
    assert data["metrics"] == recompute_metrics(data)


def test_unknown_mechanism_is_usage_error(tmp_path, capsys):
    pf, of = write_instance(tmp_path, RUNNING)
    with pytest.raises(SystemExit) as exc:
        main(["run", "--mechanism", "frobnicate", "--patients", str(pf), "--organs", str(of),
              "--report", str(tmp_path / "r.json")])
    assert exc.value.code == 2
    err = capsys.readouterr().err
    assert all(name in err for name in ("fifo", "greedy", "rank", "random"))


def test_bad_file_is_input_error(tmp_path, capsys):
    pf, of = write_instance(tmp_path, RUNNING)
    pf.write_text("id,arrival_day,epts\npa,0,0\npb,0,150\n")
    code = main(["run", "--mechanism", "fifo", "--patients", str(pf), "--organs", str(of),
                 "--report", str(tmp_path / "r.json")])
    assert code == 1
    assert "line 3" in capsys.readouterr().err


def test_missing_file_is_input_error(tmp_path):
    code = main(["run", "--mechanism", "fifo", "--patients", str(tmp_path / "nope.csv"),
                 "--organs", str(tmp_path / "nope2.csv"), "--report", str(tmp_path / "r.json")])
    assert code == 1


def test_compare(tmp_path):
    pf, of = write_instance(tmp_path, RUNNING)
    report = tmp_path / "c.json"
    assert main(["compare", "--patients", str(pf), "--organs", str(of), "--seeds", "1..3", "7",
                 "--report", str(report)]) == 0
    data = json.loads(report.read_text())
    assert data["seeds"] == [1, 2, 3, 7]
    assert sorted(data["mechanisms"]) == ["fifo", "greedy", "random", "rank"]
    greedy = data["mechanisms"]["greedy"]
    assert [r["seed"] for r in greedy["runs"]] == [1, 2, 3, 7]
    assert greedy["aggregate_mean_abs_diff"] == "55/2"
    assert data["offline"]["total_cost"] == 45


def test_axioms_report(tmp_path):
    pf, of = write_instance(tmp_path, MANIPULABLE)
    report = tmp_path / "a.json"
    assert main(["axioms", "--mechanism", "greedy", "--patients", str(pf), "--organs", str(of),
                 "--report", str(report)]) == 0
    data = json.loads(report.read_text())
    assert data["manipulable"] is True
    a = next(m for m in data["misreports"] if m["patient"] == "A")["finding"]
    assert a["reported_epts"] == 40 and a["utility_gain"] == 45
    assert data["efficiency"]["offline"] == {"pairwise_swap_optimal": True, "pareto_efficient": True}

    assert main(["axioms", "--mechanism", "fifo", "--patients", str(pf), "--organs", str(of),
                 "--report", str(report)]) == 0
    assert json.loads(report.read_text())["manipulable"] is False


def test_generate_with_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scoring": {"donor_diabetic": 0},
                               "scenario": {"donor_age_mean": 40, "donor_age_max": 75}}))
    out = tmp_path / "g"
    assert main(["generate", "--preset", "custom", "--patients", "5", "--organs", "5",
                 "--horizon", "10", "--seed", "1", "--out", str(out), "--config", str(cfg)]) == 0
    assert load_instance(out / "patients.csv", out / "organs.csv").organs


def test_bad_config_is_input_error(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scoring": {"bogus": 1}}))
    assert main(["generate", "--out", str(tmp_path / "g"), "--config", str(cfg)]) == 1


def test_parse_seeds():
    assert parse_seeds(["0..2", "5,9"]) == [0, 1, 2, 5, 9]
    with pytest.raises(ValueError):
        parse_seeds(["-1"])


def test_module_entry_point_and_logging(tmp_path):
    pf, of = write_instance(tmp_path, RUNNING)
    env = dict(os.environ, ORGANMATCH_LOG="info")
    proc = subprocess.run(
        [sys.executable, "-m", "organmatch.cli", "run", "--mechanism", "greedy",
         "--patients", str(pf), "--organs", str(of), "--report", str(tmp_path / "r.json")],
        capture_output=True, text=True, env=env,
    )
    assert proc.returncode == 0
    assert proc.stdout == ""
    assert "total_cost=55" in proc.stderr
