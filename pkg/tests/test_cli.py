import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from fpg.cli import main
from fpg.fixtures import P0, sphere_christoffel

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(tmp_path, *argv):
    out = tmp_path / "report.json"
    code = main([*argv, "--out", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def write(tmp_path, text):
    path = tmp_path / "cfg.yaml"
    path.write_text(text)
    return str(path)


def test_tensors_gijk_is_christoffel(tmp_path):
    code, rep = run(tmp_path, "tensors", "Gijk", "--config", str(CONFIGS / "sphere_lin.yaml"))
    assert code == 0
    got = np.array(rep["tensors"][0]["components"])
    assert np.max(np.abs(got - np.array(sphere_christoffel(np.array(P0.x))))) <= 1e-10


def test_tensors_weyl_euclidean(tmp_path):
    code, rep = run(tmp_path, "tensors", "W", "W2", "Douglas", "--config", str(CONFIGS / "euclidean_zero.yaml"))
    assert code == 0
    for t in rep["tensors"]:
        assert np.max(np.abs(t["components"])) == 0.0


def test_unicode_alias(tmp_path):
    code, rep = run(tmp_path, "tensors", "ℙ", "--config", str(CONFIGS / "randers_norm.yaml"))
    assert code == 0 and rep["tensors"][0]["name"] == "Douglas"


def test_unknown_tensor(tmp_path, capsys):
    code, _ = run(tmp_path, "tensors", "Q9", "--config", str(CONFIGS / "euclidean_zero.yaml"))
    assert code == 2
    assert "valid names" in capsys.readouterr().err


def test_unknown_config_key(tmp_path):
    cfg = write(tmp_path, "n: 3\nmetric: {family: euclidean}\ncolour: red\n")
    assert run(tmp_path, "homogeneity", "--config", cfg)[0] == 2


def test_bad_expression(tmp_path, capsys):
    cfg = write(tmp_path, "n: 3\nmetric: {family: custom, L: 'sqrt(y1^2 +* y2^2)'}\n")
    assert run(tmp_path, "homogeneity", "--config", cfg)[0] == 2
    assert "metric.L" in capsys.readouterr().err


def test_missing_config(tmp_path):
    assert run(tmp_path, "classify", "--config", str(tmp_path / "nope.yaml"))[0] == 2


def test_bad_subcommand():
    assert main(["frobnicate"]) == 2


def test_domain_error_exit(tmp_path):
    # |b|_a reaches 1 inside the domain
    cfg = write(tmp_path, """
n: 3
metric: {family: randers, a: [["1","0","0"],["0","1","0"],["0","0","1"]], b: ["3*x1", "0", "0"]}
""")
    assert run(tmp_path, "homogeneity", "--config", cfg)[0] == 3


def test_invariance_sphere(tmp_path):
    code, rep = run(tmp_path, "invariance", "--config", str(CONFIGS / "sphere_lin.yaml"), "--points", "4")
    assert code == 0 and rep["summary"]["all_hold"]
    ids = {r["id"] for r in rep["records"]}
    assert {"weyl_curvature_invariant", "douglas_invariant", "Rc_cyclic"} <= ids


def test_invariance_needs_lambda(tmp_path):
    cfg = write(tmp_path, "n: 3\nmetric: {family: euclidean}\n")
    assert run(tmp_path, "invariance", "--config", cfg)[0] == 2


def test_tolerance_override_fails(tmp_path):
    cfg = write(tmp_path, (CONFIGS / "randers_norm.yaml").read_text() + "tolerance: {default: 1.0e-30}\n")
    code, rep = run(tmp_path, "homogeneity", "--config", cfg, "--points", "2")
    assert code == 1 and rep["summary"]["failed"]


def test_classify_exit_zero_with_failing_predicate(tmp_path):
    code, rep = run(tmp_path, "classify", "--config", str(CONFIGS / "randers_norm.yaml"), "--points", "10")
    assert code == 0
    verdicts = {v["predicate"]: v["verdict"] for v in rep["verdicts"]}
    assert verdicts["berwald"] == "fails" and verdicts["douglas"] == "fails"
    assert all(rep["implications"].values())


def test_oracle_check(tmp_path):
    code, rep = run(tmp_path, "oracle-check", "--config", str(CONFIGS / "minkowski.yaml"), "--samples", "30")
    assert code == 0 and rep["records"][0]["id"] == "jet_vs_fd"


def test_determinism(tmp_path):
    a = run(tmp_path, "homogeneity", "--config", str(CONFIGS / "minkowski.yaml"), "--points", "3")[1]
    b = run(tmp_path, "homogeneity", "--config", str(CONFIGS / "minkowski.yaml"), "--points", "3")[1]
    for r in (a, b):
        r["environment"].pop("timing_s")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "fpg.cli", "tensors", "G", "--config", str(CONFIGS / "euclidean_zero.yaml")],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["tensors"][0]["name"] == "G"
