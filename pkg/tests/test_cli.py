"""Drive kplane.cli.main in process and check exit codes, stdout, artifacts."""

import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from kplane import RadialProfile, write_profile
from kplane.cli import _THREAD_VARS, main


def test_constant_text(capsys):
    code = main(["constant", "--k", "1", "--d", "3"])
    out = capsys.readouterr().out
    assert code == 0
    assert "A(1, 3) = 1.33133536380038" in out  # pi^(1/4), last ulp free
    assert "sphere-area form" in out and "gamma-ratio form" in out
    assert "quadrature cross-check" in out


def test_constant_json(capsys):
    code = main(["constant", "--k", "1", "--d", "3", "--format", "json"])
    payload = json.loads(capsys.readouterr().out)
    assert code == 0
    assert payload["k"] == 1 and payload["d"] == 3
    assert abs(payload["sphere_form"] - math.pi ** 0.25) < 1e-15
    assert abs(payload["gamma_form"] - payload["sphere_form"]) < 1e-12
    assert payload["relative_deviation"] <= 2e-4
    assert payload["within_2e-4"] is True
    assert payload["grid"] == 2048


def test_constant_k2_d3(capsys):
    # A(2, 3) = 2^(3/4) pi^(-1/4)
    code = main(["constant", "--k", "2", "--d", "3"])
    out = capsys.readouterr().out
    assert code == 0
    assert "A(2, 3) = 1.2632375554921296" in out


def test_constant_bad_dims(capsys):
    code = main(["constant", "--k", "3", "--d", "2"])
    err = capsys.readouterr().err
    assert code == 2
    assert err.startswith("kplane:")


def test_iterate_h_is_fixed_point(tmp_path, capsys):
    out_dir = tmp_path / "run"
    code = main(
        ["iterate", "--k", "1", "--d", "3", "--init", "h", "--grid", "512",
         "--seed", "7", "--out", str(out_dir)]
    )
    out = capsys.readouterr().out
    assert code == 0
    assert "seed 7" in out
    assert "converged = True after 0 iterations" in out
    with open(out_dir / "summary.json") as fh:
        summary = json.load(fh)
    assert summary["converged"] is True
    assert summary["n_iters"] == 0
    assert summary["seed"] == 7
    assert all(summary["invariants"].values())
    trace = (out_dir / "trace.csv").read_text().strip().splitlines()
    assert trace[0] == "n,distance,ratio,norm"
    assert len(trace) == 2  # just the starting point


def test_iterate_gaussian_json_trace(tmp_path, capsys):
    out_dir = tmp_path / "run"
    code = main(
        ["iterate", "--init", "gaussian", "--grid", "512", "--iters", "60",
         "--out", str(out_dir), "--format", "json"]
    )
    capsys.readouterr()
    assert code == 0
    with open(out_dir / "trace.json") as fh:
        trace = json.load(fh)
    with open(out_dir / "summary.json") as fh:
        summary = json.load(fh)
    assert summary["converged"] is True
    n = len(trace["distance"])
    assert trace["n"] == list(range(n))
    assert n == summary["n_iters"] + 1
    assert len(trace["ratio"]) == n and len(trace["norm"]) == n


def test_iterate_profile_from_csv(tmp_path, capsys):
    r = np.geomspace(1e-4, 1e4, 512)
    f = RadialProfile(3, r, (1.0 + 0.5 * r**2) ** -1.8, tail_exponent=3.6)
    path = tmp_path / "start.csv"
    write_profile(path, f)
    out_dir = tmp_path / "run"
    code = main(
        ["iterate", "--init", str(path), "--grid", "512", "--iters", "80",
         "--out", str(out_dir)]
    )
    capsys.readouterr()
    assert code == 0
    with open(out_dir / "summary.json") as fh:
        summary = json.load(fh)
    assert summary["init"] == str(path)
    assert summary["converged"] is True
    assert summary["final_distance"] < 1e-3


def test_iterate_malformed_csv(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("r,value\n1.0,oops\n")
    (tmp_path / "bad.json").write_text('{"d": 3, "tail_exponent": 4.0}')
    code = main(["iterate", "--init", str(path), "--out", str(tmp_path / "run")])
    err = capsys.readouterr().err
    assert code == 2
    assert "line 2" in err


def test_iterate_dimension_mismatch(tmp_path, capsys):
    r = np.geomspace(1e-3, 1e3, 64)
    f = RadialProfile(2, r, (1.0 + r**2) ** -1.5, tail_exponent=3.0)
    path = tmp_path / "flat.csv"
    write_profile(path, f)
    code = main(
        ["iterate", "--k", "1", "--d", "3", "--init", str(path),
         "--out", str(tmp_path / "run")]
    )
    err = capsys.readouterr().err
    assert code == 2
    assert "d = 2" in err and "d = 3" in err


def test_verify_symmetry_csv(capsys):
    code = main(["verify", "--suite", "symmetry"])
    out = capsys.readouterr().out
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "# suite symmetry, seed 0, samples 1000000"
    assert lines[1].split(",")[:2] == ["status", "name"]
    assert all(row.startswith("PASS,") for row in lines[2:])
    assert len(lines) > 2


def test_verify_symmetry_json(capsys):
    code = main(["verify", "--suite", "symmetry", "--format", "json", "--seed", "3"])
    payload = json.loads(capsys.readouterr().out)
    assert code == 0
    assert payload["suite"] == "symmetry" and payload["seed"] == 3
    assert payload["all_pass"] is True
    assert all(c["passed"] for c in payload["checks"])


def test_verify_unknown_suite():
    with pytest.raises(SystemExit) as info:
        main(["verify", "--suite", "nosuch"])
    assert info.value.code == 2


def test_thread_cap_invalid(monkeypatch, capsys):
    monkeypatch.setenv("KPLANE_THREADS", "many")
    code = main(["constant", "--k", "1", "--d", "2"])
    err = capsys.readouterr().err
    assert code == 2
    assert "KPLANE_THREADS" in err


def test_thread_cap_zero(monkeypatch, capsys):
    monkeypatch.setenv("KPLANE_THREADS", "0")
    code = main(["constant", "--k", "1", "--d", "2"])
    capsys.readouterr()
    assert code == 2


def test_thread_cap_exported(monkeypatch, capsys):
    monkeypatch.setenv("KPLANE_THREADS", "2")
    for var in _THREAD_VARS:
        monkeypatch.delenv(var, raising=False)
    code = main(["constant", "--k", "1", "--d", "2"])
    capsys.readouterr()
    assert code == 0
    for var in _THREAD_VARS:
        assert os.environ[var] == "2"


def test_console_script_end_to_end():
    proc = subprocess.run(
        [sys.executable, "-m", "kplane.cli", "constant", "--k", "1", "--d", "2",
         "--grid", "512"],
        capture_output=True,
        text=True,
    )
    print(proc.stdout)
    assert proc.returncode == 0
    # (pi/2)^(1/3)
    assert "A(1, 2) = 1.16244735150962" in proc.stdout
