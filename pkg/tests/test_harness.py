import csv
import json
import math

import pytest

from cyclic_halpern import harness
from cyclic_halpern.errors import ConfigError
from cyclic_halpern.harness import (
    CSV_HEADER,
    NOT_EXECUTED,
    ExperimentConfig,
    certify_table,
    check_schedule,
    check_space,
    format_certify_table,
    main,
    run_experiment,
)

ROTATIONS = {
    "space": {"kind": "euclidean", "dim": 2},
    "family": [{"kind": "rotation", "angle": 0.7}, {"kind": "rotation", "angle": 1.1}],
    "schedule": {"kind": "harmonic"},
    "kind": "halpern",
    "u": [1.0, 0.0],
    "M": 2.0,
    "n_max": 1100,
    "epsilon_grid": [8.0],
    "seed": 0,
}


def _write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({**ROTATIONS, "M": -1})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({**ROTATIONS, "n_max": "forever"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({k: v for k, v in ROTATIONS.items() if k != "family"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({**ROTATIONS, "epsilon_grid": [0.0]})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict([ROTATIONS])


def test_config_radius_hypothesis():
    cfg = ExperimentConfig.from_dict({**ROTATIONS, "space": {"kind": "sphere", "kappa": 1.0, "mu": 0.5}, "M": 1.0})
    with pytest.raises(ConfigError):
        cfg.build()


def test_run_experiment_report():
    res = run_experiment(ROTATIONS)
    rep = res.report
    assert res.passed
    assert rep["N"] == 2 and rep["n_max"] == 1100
    (e,) = rep["epsilons"]
    assert e["epsilon"] == 8.0
    assert e["phi_tilde"] == 64 and e["phi"] == 1024
    assert e["certified_index"] == 1024
    assert e["status"] == "verified"
    assert e["empirical_value_at_index"] <= 8.0
    assert {"epsilon", "certified_index", "empirical_value_at_index", "pass"} <= set(e)
    assert rep["trace_inequalities"]["pass"]
    assert all(v["pass"] for v in rep["schedule_checks"].values())
    json.dumps(rep)


def test_unexecuted_epsilon_is_reported_not_failed():
    rep = run_experiment({**ROTATIONS, "epsilon_grid": [8.0, 0.5]}).report
    small = rep["epsilons"][1]
    assert small["status"] == NOT_EXECUTED
    assert small["pass"] is None
    assert small["feasible"] is False
    assert rep["pass"]


def test_auto_length():
    rep = run_experiment({**ROTATIONS, "n_max": "auto"}).report
    assert rep["n_max"] == 1024


def test_cli_run_csv(tmp_path):
    cfg = _write(tmp_path, {**ROTATIONS, "n_max": 10})
    out = tmp_path / "trace.csv"
    assert main(["run", cfg, "-o", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert tuple(rows[0]) == CSV_HEADER == ("n", "lambda_n", "shift_gap_N", "residual")
    assert len(rows) == 12
    assert rows[1][0] == "0" and rows[1][1] == ""
    assert float(rows[2][1]) == 0.5
    # the last N rows have no shift gap
    assert rows[-1][2] == "" and rows[-2][2] == "" and rows[-3][2] != ""
    assert all(r[3] != "" for r in rows[1:])


def test_cli_verify(tmp_path, capsys):
    cfg = _write(tmp_path, ROTATIONS)
    trace = tmp_path / "t.csv"
    assert main(["verify", cfg, "--csv", str(trace)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["pass"] is True
    assert trace.read_text().startswith("n,lambda_n,shift_gap_N,residual\n")


def test_cli_verify_list_with_workers(tmp_path, monkeypatch, capsys):
    small = {**ROTATIONS, "n_max": 200, "epsilon_grid": [16.0]}
    cfg = _write(tmp_path, [small, {**small, "kind": "anchored"}])
    monkeypatch.setenv("CYCLIC_HALPERN_WORKERS", "1")
    assert main(["verify", cfg]) == 0
    inline = json.loads(capsys.readouterr().out)
    monkeypatch.setenv("CYCLIC_HALPERN_WORKERS", "2")
    assert main(["verify", cfg]) == 0
    pooled = json.loads(capsys.readouterr().out)
    assert inline == pooled
    assert [r["kind"] for r in inline] == ["halpern", "anchored"]


def test_cli_certify(tmp_path, capsys):
    cfg = _write(tmp_path, {"epsilon_grid": [8, 4], "M": 2.0, "N": 2, "schedule": {"kind": "harmonic"}})
    assert main(["certify", cfg]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].split() == ["epsilon", "|", "phi_tilde", "|", "phi", "|", "psi", "|", "feasible"]
    assert out[1].split("|")[1].strip() == "64"
    assert out[1].split("|")[2].strip() == "1024"
    assert out[2].split("|")[2].strip() == "1048576"


def test_certify_table_from_experiment_config():
    certs = certify_table(ROTATIONS)
    assert [c.phi for c in certs] == [1024]
    assert "1024" in format_certify_table(certs)


def test_check_space(tmp_path, capsys):
    cfg = _write(tmp_path, {**ROTATIONS, "samples": 2000})
    assert main(["check-space", cfg]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["rdelta"]["violations"] == 0
    assert len(out["maps"]) == 2
    sphere = check_space(
        {
            "space": {"kind": "sphere", "kappa": 1.0, "mu": 0.5},
            "family": [{"kind": "rotation", "angle": 0.7}],
            "samples": 2000,
        }
    )
    assert sphere["pass"]
    assert sphere["spherical_comparison"]["violations"] == 0


def test_check_schedule(tmp_path, capsys):
    cfg = _write(tmp_path, {"schedule": {"kind": "power", "q": 0.5}, "N": 2, "horizon": 10**4})
    assert main(["check-schedule", cfg]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["pass"] and set(out) >= {"divergence", "cauchy", "vanishing"}
    assert "vanishing" not in check_schedule({"schedule": {"kind": "constant", "value": 0.5}, "horizon": 100})


def test_failed_check_exits_one(tmp_path, monkeypatch, capsys):
    monkeypatch.setattr(harness, "check_schedule", lambda d: {"pass": False})
    cfg = _write(tmp_path, {"schedule": {"kind": "harmonic"}})
    assert main(["check-schedule", cfg]) == 1


@pytest.mark.parametrize(
    "cfg",
    [
        {**ROTATIONS, "M": 0.5},  # d(u, T u) exceeds M
        {**ROTATIONS, "space": {"kind": "torus"}},
        {**ROTATIONS, "schedule": {"kind": "harmonic"}, "u": [1.0, 0.0, 0.0]},
    ],
)
def test_errors_exit_two(tmp_path, capsys, cfg):
    assert main(["verify", _write(tmp_path, cfg)]) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_missing_file_exits_two(tmp_path, capsys):
    assert main(["run", str(tmp_path / "nope.json")]) == 2


def test_certificate_reports_infinite_radius():
    rep = run_experiment({**ROTATIONS, "n_max": 5, "epsilon_grid": []}).report
    assert rep["certificate"]["r"] == "inf"
    assert not math.isnan(rep["certificate"]["delta"])
