import io
import json
import math

import pandas as pd
import pytest

import main
from app.core.config import settings

FID_SCENARIO = {
    "name": "fid",
    "working_point": {"J": 0.5, "dh": 0.0},
    "noise": {"charge": {"sigma_qs": 0.01}},
    "sequence": {"kind": "fid"},
    "time": {"t_max": 300.0, "points": 7},
}

ECHO_SCENARIO = {
    "name": "echo",
    "working_point": {"J": 1.0, "dh": 0.5},
    "noise": {"charge": {"sigma_qs": 0.05}, "magnetic": {"sigma_qs": 0.05}},
    "sequence": {"kind": "cpmg", "n": 1},
    "time": {"t_max": 10.0, "points": 5},
    "mc": {"n_traj": 20, "dt": 0.02, "points": 3, "batch_size": 8},
}


@pytest.fixture
def scenario_file(tmp_path):
    def write(data, name="scenario.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return str(path)
    return write


def _frame(text):
    return pd.read_csv(io.StringIO(text), comment="#")


def test_coherence_writes_csv(scenario_file, capsys):
    assert main.main(["coherence", scenario_file(FID_SCENARIO)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("# fid: ")
    frame = _frame(out)
    assert len(frame) == 7
    assert {"curve", "t_ns", "W", "phase", "c_z", "c_x"} <= set(frame.columns)
    expected = [math.exp(-0.5 * 0.01 ** 2 * t ** 2) for t in frame["t_natural"]]
    assert frame["W"].tolist() == pytest.approx(expected, rel=1e-6)


def test_output_file(scenario_file, tmp_path, capsys):
    target = tmp_path / "curve.csv"
    assert main.main(["coherence", scenario_file(FID_SCENARIO), "-o", str(target)]) == 0
    assert capsys.readouterr().out == ""
    assert len(_frame(target.read_text(encoding="utf-8"))) == 7


def test_dump_config(scenario_file, capsys):
    assert main.main(["coherence", scenario_file(FID_SCENARIO), "--dump-config", "-"]) == 0
    resolved = json.loads(capsys.readouterr().out)
    assert resolved["working_point"]["J"] == 0.5
    assert resolved["noise"]["charge"]["omega_low"] > 0
    assert resolved["mode"] == "resummed"


def test_t2_command(scenario_file, capsys):
    assert main.main(["t2", scenario_file(FID_SCENARIO)]) == 0
    frame = _frame(capsys.readouterr().out)
    assert frame["T2_resummed"][0] == pytest.approx(math.sqrt(2.0) / 0.01, rel=1e-3)
    assert frame["T2_first_order"][0] == pytest.approx(math.sqrt(2.0) / 0.01, rel=1e-3)


def test_sweep_command(scenario_file, capsys):
    argv = ["sweep", scenario_file(FID_SCENARIO), "--axis", "dh", "--start", "0.01", "--stop", "0.1", "--points", "3"]
    assert main.main(argv) == 0
    frame = _frame(capsys.readouterr().out)
    assert len(frame) == 3
    assert frame["dh"].tolist() == pytest.approx([0.01, math.sqrt(0.001), 0.1])
    assert frame["T2_resummed"].notna().all()


def test_mc_command_and_tolerance_breach(scenario_file, capsys):
    path = scenario_file(ECHO_SCENARIO)
    assert main.main(["mc", path]) == 0
    frame = _frame(capsys.readouterr().out)
    assert {"W_mc", "W_mc_stderr"} <= set(frame.columns)
    assert frame["W_mc"].tolist() == pytest.approx([1.0] * 3, abs=1e-9)

    assert main.main(["mc", path, "--model-tol", "-1"]) == main.EXIT_TOLERANCE
    assert len(_frame(capsys.readouterr().out)) == 3


@pytest.mark.parametrize("command", ["coherence", "mc"])
def test_repeated_runs_write_identical_bytes(command, scenario_file, tmp_path, monkeypatch):
    path = scenario_file(ECHO_SCENARIO)
    first, second = tmp_path / "first.csv", tmp_path / "second.csv"
    assert main.main([command, path, "-o", str(first)]) == 0
    monkeypatch.setattr(settings, "workers", 1)
    assert main.main([command, path, "-o", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_mc_without_block_is_config_error(scenario_file):
    assert main.main(["mc", scenario_file(FID_SCENARIO)]) == main.EXIT_CONFIG


def test_bad_scenario_exit_code(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"name": "x",', encoding="utf-8")
    assert main.main(["coherence", str(path)]) == main.EXIT_CONFIG


def test_psd_check(scenario_file, capsys):
    argv = ["psd-check", scenario_file(FID_SCENARIO), "--traj", "200", "--steps", "256", "--dt", "0.1"]
    assert main.main(argv) == 0
    frame = _frame(capsys.readouterr().out)
    variance = frame[frame["quantity"] == "variance"].set_index("spectrum")
    assert variance.loc["charge", "model"] == pytest.approx(1e-4)
    assert variance.loc["charge", "ratio"] == pytest.approx(1.0, rel=0.5)


def test_preset_command(capsys):
    assert main.main(["preset", "fig1a", "--points", "5"]) == 0
    frame = _frame(capsys.readouterr().out)
    assert frame["curve"].nunique() == 4
    assert len(frame) == 20


def test_init_writes_loadable_scenario(tmp_path, capsys):
    path = str(tmp_path / "starter.json")
    assert main.main(["init", path]) == 0
    assert "NOTICE" in capsys.readouterr().err
    assert main.main(["init", path]) == 1
    assert main.main(["coherence", path, "--dump-config", "-"]) == 0
    assert json.loads(capsys.readouterr().out)["name"] == "fid-exchange"
