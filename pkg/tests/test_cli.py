"""Command-line interface."""

import json
import math

import pytest

from rinewton.cli import main

CONFIG = """
seed = 11
[problem]
name = "x-minus-x-squared"
[majorant]
kind = "holder"
constant = 2.0
[run]
budget = 0.0
[starts]
fractions = [0.5]
[checks]
names = ["step-bound", "contraction"]
samples = 40
"""


def test_run_subcommand(tmp_path, capsys):
    cfg = tmp_path / "exp.toml"
    cfg.write_text(CONFIG)
    out_dir = tmp_path / "results"
    code = main(["run", str(cfg), "--out-dir", str(out_dir)])
    assert code == 0
    captured = capsys.readouterr().out
    assert "converged" in captured
    assert "check step-bound: pass" in captured
    assert (out_dir / "checks.json").exists()
    assert (out_dir / "radius_report.json").exists()


def test_run_seed_override_changes_start(tmp_path):
    cfg = tmp_path / "exp.toml"
    cfg.write_text("""
[problem]
name = "rayleigh-3d"
[starts]
fractions = [0.5]
[checks]
names = []
""")
    main(["run", str(cfg), "--out-dir", str(tmp_path / "a"), "--seed", "1"])
    main(["run", str(cfg), "--out-dir", str(tmp_path / "b"), "--seed", "2"])
    a = (tmp_path / "a" / "trace_f0.5_0.csv").read_text()
    b = (tmp_path / "b" / "trace_f0.5_0.csv").read_text()
    assert a != b
    # same seed reproduces bytes
    main(["run", str(cfg), "--out-dir", str(tmp_path / "c"), "--seed", "1"])
    assert (tmp_path / "c" / "trace_f0.5_0.csv").read_text() == a


def test_radii_subcommand(capsys):
    code = main(["radii", "--kind", "smale", "--gamma", "1.0", "--format", "json"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["radii"]["contraction_radius"] == pytest.approx(
        (5.0 - math.sqrt(17.0)) / 4.0)
    code = main(["radii", "--kind", "holder", "--constant", "1.0"])
    assert code == 0
    out = capsys.readouterr().out
    assert "convergence_radius: 0.666666" in out


def test_radii_missing_parameter(capsys):
    assert main(["radii", "--kind", "smale"]) == 2
    assert "--gamma is required" in capsys.readouterr().err


def test_checks_list(capsys):
    assert main(["checks", "--list"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert "majorant-condition" in out
    assert "contraction" in out


def test_failing_check_exits_nonzero(tmp_path, capsys):
    # a 4x-weakened Lipschitz constant makes the bound checks fail
    cfg = tmp_path / "weak.toml"
    cfg.write_text("""
[problem]
name = "x-minus-x-squared"
[majorant]
kind = "holder"
constant = 0.5
[starts]
fractions = [0.2]
[checks]
names = ["step-bound"]
samples = 60
""")
    code = main(["run", str(cfg), "--out-dir", str(tmp_path / "w")])
    assert code == 1
    assert "check step-bound: FAIL" in capsys.readouterr().out


def test_bad_config_exits_nonzero(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("[problem]\nname = 'exp-minus-one'\nbogus = 2\n")
    assert main(["run", str(cfg)]) == 2
    assert "unknown config keys" in capsys.readouterr().err


def test_missing_config_file(capsys):
    assert main(["run", "/no/such/file.toml"]) == 2
