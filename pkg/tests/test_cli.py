import json
import subprocess
import sys

import pytest

from cellload.cli import main


def run(*args):
    return main(list(args))


def test_stable_fraction_csv(capsys):
    assert run("stable-fraction", "--sweep-values", "1 2 5") == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "lambda_bs,stable_fraction"
    vals = [float(l.split(",")[1]) for l in lines[1:]]
    assert vals == sorted(vals) and len(vals) == 3


def test_json_format(capsys):
    assert run("mean-load", "--format", "json", "--g0-db", "36", "--sweep-values", "10") == 0
    doc = json.loads(capsys.readouterr().out)
    row = doc["rows"][0]
    assert row["mean_cell_load"] >= row["ei_mean_load"] > 0


def test_empty_sweep_is_usage_error(capsys):
    assert run("stable-fraction", "--sweep-values", "") == 1
    assert "sweep_values is empty" in capsys.readouterr().err


def test_unknown_key_and_subcommand():
    assert run("stable-fraction", "--bogus-key", "3") == 1
    assert run("nope") == 1
    assert run("stable-fraction", "--format", "xml") == 1
    assert run() == 1


def test_config_file_errors(tmp_path):
    assert run("selftest", "--config", str(tmp_path / "absent.cfg")) == 1


def test_selftest_passes_and_tampering_fails(capsys):
    assert run("selftest") == 0
    out = capsys.readouterr().out
    assert out.startswith("check,measured,tolerance,passed")
    assert run("selftest", "--tol-barry_max_rel_error", "1e-6") == 2


def test_validate_stable_fraction(capsys):
    code = run("stable-fraction", "--validate", "--sweep-values", "2", "--realizations", "20", "--seed", "5")
    row = capsys.readouterr().out.splitlines()[1].split(",")
    assert code == 0 and row[-1] == "1"


def test_out_and_meta(tmp_path, monkeypatch):
    monkeypatch.setenv("CELLLOAD_SEED", "77")
    out = tmp_path / "sf.csv"
    assert run("stable-fraction", "--out", str(out)) == 0
    meta = json.loads((tmp_path / "sf.csv.meta.json").read_text())
    assert meta["config"]["seed_resolved"] == 77
    assert out.read_text().startswith("lambda_bs,")


def test_byte_identical_across_runs_and_jobs(tmp_path):
    args = ["mean-load", "--validate", "--sweep-values", "10 50", "--realizations", "8", "--seed", "3", "--inner-cells", "30"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(*args, "--out", str(a), "--jobs", "1")
    run(*args, "--out", str(b), "--jobs", "2")
    assert a.read_bytes() == b.read_bytes()


def test_throughput_compare_small(capsys):
    code = run(
        "throughput-compare",
        "--sweep-values", "0 100 300",
        "--sim-duration-s", "60",
        "--sim-inner-cells", "9",
        "--static-draws", "50",
        "--n-integration-points", "20000",
    )
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("lambda_u,w,rho_bar,mean_users,r_dyn_formula")
    assert len(lines) == 4


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "cellload", "stable-fraction", "--sweep-values", "5"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("lambda_bs,")
