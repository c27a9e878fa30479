import json
import subprocess
import sys

import numpy as np
import pytest

from scatter1d import cli
from scatter1d.config import load_config, read_config_file


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_scan_writes_full_precision_csv(tmp_path, capsys):
    out = tmp_path / "scan.csv"
    assert run("scan", "--out", out, "--n", 2000, "--peaks") == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "E,ReT,ImT,ReR,ImR,T2,R2,unitarity_residual"
    data = np.loadtxt(out, delimiter=",", skiprows=1)
    assert data.shape == (2000, 8)
    assert np.all(np.diff(data[:, 0]) > 0)
    # 17 significant digits round-trip exactly
    assert float(lines[1].split(",")[0]) == 0.1
    peaks = [float(l.split()[1].split("=")[1]) for l in capsys.readouterr().out.splitlines()
             if l.startswith("peak")]
    assert len(peaks) == 2
    assert peaks[0] == pytest.approx(0.621, abs=5e-3)
    assert peaks[1] == pytest.approx(1.327, abs=5e-3)


def test_scan_is_byte_identical_on_rerun(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("scan", "--out", a, "--n", 300) == 0
    assert run("scan", "--out", b, "--n", 300) == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\npotential.name = square\nfd.dx = 0.002\nscan.n = 10  ; inline\nsiegert.n = 12\n")
    assert read_config_file(cfg)["fd.dx"] == "0.002"
    c = load_config(cfg, {"scan_n": 7})
    assert (c.potential_name, c.fd_dx, c.scan_n, c.siegert_n) == ("square", 0.002, 7, 12)
    out = tmp_path / "s.csv"
    assert run("scan", "--config", cfg, "--out", out) == 0
    assert len(out.read_text().splitlines()) == 11


def test_threads_from_environment(monkeypatch):
    monkeypatch.setenv("SCATTER1D_THREADS", "3")
    assert load_config().threads == 3
    assert load_config(overrides={"threads": 1}).threads == 1


def test_usage_errors_exit_1(tmp_path, capsys):
    with pytest.raises(SystemExit) as e:
        run("scan")
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        run("frobnicate")
    assert e.value.code == 1
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense.key = 1\n")
    assert run("scan", "--config", bad, "--out", tmp_path / "x.csv") == 1
    assert run("scan", "--config", tmp_path / "missing.cfg", "--out", tmp_path / "x.csv") == 1


def test_computation_errors_exit_2(tmp_path, capsys):
    assert run("scan", "--out", tmp_path / "x.csv", "--emin", -1) == 2
    assert run("siegert", "--box-a", 8) == 2  # potential not negligible at the box edge
    assert "SupportExceedsBox" in capsys.readouterr().err


def test_siegert_and_resonances(tmp_path):
    spec, curve, table = tmp_path / "spec.json", tmp_path / "fd.csv", tmp_path / "res.csv"
    assert run("siegert", "--n", 80, "--out", spec) == 0
    d = json.loads(spec.read_text())
    assert len(d["states"]) == 160
    assert run("scan", "--out", curve, "--n", 400) == 0
    assert run("resonances", "--spectrum", spec, "--fd-curve", curve, "--out", table,
               "--local-scan") == 0
    rows = np.atleast_2d(np.loadtxt(table, delimiter=",", skiprows=1))
    first = rows[np.argmin(np.abs(rows[:, 0] - 0.621))]
    assert first[0] == pytest.approx(0.620971, abs=1e-5)
    assert first[4] == pytest.approx(1, abs=0.05)
    assert first[6] == 1


def test_compare_writes_report(tmp_path):
    out, rep = tmp_path / "cmp.csv", tmp_path / "cmp.json"
    assert run("compare", "--potential", "stepwell", "--box-a", 1, "--n", 24, "--points", 20,
               "--out", out, "--report", rep) == 0
    s = json.loads(rep.read_text())
    assert s["points"] == 20
    assert s["max_abs_diff"] < 5e-2
    assert np.loadtxt(out, delimiter=",", skiprows=1).shape == (20, 6)


def test_free_case_has_a_zero_siegert_eigenvalue(tmp_path, capsys):
    assert run("compare", "--potential", "zero", "--box-a", 1, "--n", 12, "--out", tmp_path / "c.csv") == 2
    assert "ZeroEigenvalue" in capsys.readouterr().err


def test_green_check(tmp_path):
    out = tmp_path / "g.json"
    assert run("green-check", "--no-siegert", "--energy", 0.7, "--out", out) == 0
    g = json.loads(out.read_text())
    assert g["endpoint_rel"] < 1e-3 and g["onshell_plus"] < 1e-5


def test_wavepacket_command(tmp_path):
    out, rep = tmp_path / "wp.csv", tmp_path / "wp.json"
    assert run("wavepacket", "--times", "0,100", "--xmin", -50, "--xmax", 200, "--xstep", 0.5,
               "--out", out, "--report", rep) == 0
    r = json.loads(rep.read_text())
    assert abs(r["sum"] - 1) < 1e-4
    assert len(r["refined_at"]) == 1
    data = np.loadtxt(out, delimiter=",", skiprows=1)
    assert data.shape[1] == 5 and set(data[:, 0]) == {0.0, 100.0}


def test_validate_detects_coarse_grid_and_small_basis(capsys):
    code = run("validate", "--potential", "square", "--box-a", 0.5, "--n", 8, "--dx", 0.05)
    text = capsys.readouterr().out
    assert code == 3
    assert "FAIL  fd grid convergence" in text
    assert "FAIL  siegert vs FD transmission" in text


def test_console_script_runs():
    r = subprocess.run([sys.executable, "-m", "scatter1d", "--help"], capture_output=True, text=True)
    assert r.returncode == 0
    for sub in ("scan", "siegert", "resonances", "compare", "green-check", "wavepacket", "validate"):
        assert sub in r.stdout
