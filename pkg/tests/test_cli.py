import json
import subprocess
import sys

import pytest

from harmloss import synthetic
from harmloss.cli import EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_IO, EXIT_OK, EXIT_USAGE, run


@pytest.fixture(scope="module")
def fast_config(tmp_path_factory):
    data = synthetic.config_dict()
    data["pwm"]["samples_per_switching_period"] = 64
    data["cycle"]["lattice"] = [4, 4]
    path = tmp_path_factory.mktemp("cfg") / "fast.json"
    path.write_text(json.dumps(data))
    return str(path)


def call(tmp_path, config, *argv):
    return run([argv[0], "--config", config, "--out", str(tmp_path), *argv[1:]])


def test_spectrum_writes_outputs(tmp_path, fast_config, capsys):
    code = call(tmp_path, fast_config, "spectrum", "--modes", "tnpc_3l", "--torque", "60",
                "--speed", "300")
    assert code == EXIT_OK
    assert {p.name for p in tmp_path.iterdir()} == {
        "waveform_tnpc_3l.csv", "spectrum_tnpc_3l.csv", "point_tnpc_3l.json"}
    doc = json.loads((tmp_path / "point_tnpc_3l.json").read_text())
    assert doc["mode"] == "TNPC_3L" and doc["p_total_W"] > 0
    assert "generated_utc" not in doc
    assert "TNPC_3L" in capsys.readouterr().out


def test_stamp_adds_timestamp(tmp_path, fast_config):
    call(tmp_path, fast_config, "spectrum", "--modes", "B6_2L", "--torque", "60", "--speed",
         "300", "--stamp")
    assert "generated_utc" in json.loads((tmp_path / "point_b6_2l.json").read_text())


def test_lossmap_rerun_is_bitwise_identical(tmp_path, fast_config):
    args = ("lossmap", "--modes", "ML_5L", "--grid", "2x3", "--torque", "20:200")
    assert call(tmp_path / "a", fast_config, *args) == EXIT_OK
    assert call(tmp_path / "b", fast_config, *args, "--threads", "4") == EXIT_OK
    a = (tmp_path / "a" / "lossmap_ml_5l.csv").read_bytes()
    assert a == (tmp_path / "b" / "lossmap_ml_5l.csv").read_bytes()
    assert len(a.decode().splitlines()) == 1 + 2 * 3


def test_compare_writes_maps_and_summary(tmp_path, fast_config, capsys):
    code = call(tmp_path, fast_config, "compare", "--modes", "b6_2l,tnpc_3l", "--grid", "2x2")
    assert code == EXIT_OK
    names = {p.name for p in tmp_path.iterdir()}
    assert {"lossmap_b6_2l.csv", "lossmap_tnpc_3l.csv", "compare_ratios.csv"} <= names
    assert "TNPC_3L vs B6_2L: harmonic iron ratio" in capsys.readouterr().out


def test_optimize_single_point(tmp_path, fast_config, capsys):
    code = call(tmp_path, fast_config, "optimize", "--torque", "50", "--speed", "200")
    assert code == EXIT_OK
    lines = (tmp_path / "decisions.csv").read_text().splitlines()
    assert lines[0].endswith(",vdc_set_V") and len(lines) == 2
    assert "at vdc=" in capsys.readouterr().out


def test_cycle_report(tmp_path, fast_config):
    cyc = tmp_path / "c.csv"
    cyc.write_text("t_s,v_mps\n0,0\n1,0\n2,3\n3,6\n4,6\n5,3\n6,0\n7,0\n")
    code = call(tmp_path, fast_config, "cycle", "--cycle", str(cyc), "--modes", "B6_2L,TNPC_3L")
    assert code == EXIT_OK
    doc = json.loads((tmp_path / "cycle_report.json").read_text())
    assert sum(doc["edrive_shares_pct"].values()) == pytest.approx(100.0, abs=1e-9)
    assert sum(doc["mode_time_share_pct"].values()) == pytest.approx(100.0, abs=1e-9)
    assert (tmp_path / "cycle_long.csv").exists() and (tmp_path / "cycle_report.txt").exists()


def test_exit_code_config_error(tmp_path, fast_config):
    bad = tmp_path / "bad.json"
    bad.write_text('{"motor": {}}')
    assert call(tmp_path, str(bad), "lossmap", "--modes", "B6_2L") == EXIT_CONFIG
    assert call(tmp_path, str(tmp_path / "nope.json"), "lossmap") == EXIT_CONFIG
    malformed = tmp_path / "m.csv"
    malformed.write_text("t_s,v_mps\n0,0\n1,x\n")
    assert call(tmp_path, fast_config, "cycle", "--cycle", str(malformed)) == EXIT_CONFIG


def test_exit_code_infeasible(tmp_path, fast_config):
    code = call(tmp_path, fast_config, "spectrum", "--modes", "B6_2L", "--torque", "5000",
                "--speed", "100")
    assert code == EXIT_INFEASIBLE
    code = call(tmp_path, fast_config, "optimize", "--torque", "5000", "--speed", "100")
    assert code == EXIT_INFEASIBLE


def test_exit_code_io_error(tmp_path, fast_config):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert run(["lossmap", "--config", fast_config, "--out", str(blocker / "sub"),
                "--modes", "B6_2L", "--grid", "1x1"]) == EXIT_IO
    assert call(tmp_path, fast_config, "cycle", "--cycle", str(tmp_path / "none.csv")) == EXIT_IO


@pytest.mark.parametrize("argv", [
    [], ["frobnicate"], ["lossmap", "--grid", "5by5"], ["lossmap", "--bogus"],
    ["lossmap", "--modes", "NPC"], ["spectrum", "--torque", "1"], ["lossmap", "--threads", "0"],
    ["compare", "--modes", "B6_2L"],
])
def test_exit_code_usage(argv, capsys):
    assert run(argv) == EXIT_USAGE
    assert capsys.readouterr().err.startswith(("harmloss", "usage"))


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "harmloss.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "harmloss" in proc.stdout
