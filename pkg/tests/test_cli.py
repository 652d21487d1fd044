import json
import subprocess
import sys

import pytest

from crcalc.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_single_identity_passes(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "symbolic", "--identity", "grahamlee")
    assert code == 0
    assert out.startswith("PASS grahamlee")
    assert "1 verified, 0 failed" in out


def test_model_identity_with_factor(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "models", "--identity",
                       "qprime_total_invariance", "--sigma", "Re(z1)")
    assert code == 0 and "PASS qprime_total_invariance" in out


def test_model_identity_reports_failure(capsys):
    # the integral is not preserved when the factor is not pluriharmonic
    code, out, _ = run(capsys, "verify", "--suite", "models", "--identity",
                       "qprime_total_invariance", "--sigma", "z1*z1b")
    assert code == 1 and "FAIL qprime_total_invariance" in out


def test_unknown_identity(capsys):
    code, out, err = run(capsys, "verify", "--suite", "symbolic", "--identity", "no_such_id")
    assert code == 2
    assert "unknown identity" in err
    assert out == ""


@pytest.mark.parametrize("argv, expected", [
    (["--op", "Q4prime", "--model", "sphere"], "1"),
    (["--op", "P4", "--model", "sphere", "--f", "Re(z1*z2)"], "0"),
    (["--op", "Delta_b", "--model", "heisenberg", "--f", "t"], "0"),
])
def test_apply(capsys, argv, expected):
    code, out, _ = run(capsys, "apply", *argv)
    assert code == 0 and out.strip() == expected


def test_apply_errors(capsys):
    assert run(capsys, "apply", "--op", "P6", "--f", "z1")[0] == 2
    code, _, err = run(capsys, "apply", "--op", "P4", "--f", "w")
    assert code == 2 and "w" in err


def test_expected_failures_marked(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "models", "--identity", "prop49_energy*")
    assert code == 1
    lines = out.splitlines()
    assert lines[0].startswith("PASS prop49_energy")
    assert lines[1].startswith("FAIL prop49_energy_literal (expected)")
    assert lines[-1] == "1 verified, 1 failed (1 of them expected)"


def test_alias_and_globs(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "covariance", "--identity", "bochner,torsion*",
                       "--no-timings")
    assert code == 0
    assert "PASS bochner" in out


def test_every_glob_must_match(capsys):
    code, _, err = run(capsys, "verify", "--suite", "symbolic", "--identity", "grahamlee,zzz*")
    assert code == 2 and "zzz" in err


def test_jsonl_is_deterministic(capsys):
    argv = ["verify", "--suite", "tractor", "--format", "jsonl", "--no-timings"]
    _, one, _ = run(capsys, *argv)
    _, two, _ = run(capsys, *argv, "--jobs", "2")
    assert one == two
    rows = [json.loads(l) for l in one.splitlines()]
    assert "config" in rows[0]
    assert all("duration" not in r for r in rows[1:])
    assert {r["id"] for r in rows[1:]} >= {"fefferman_assembly", "tractor_paneitz"}


def test_fail_fast(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "models", "--identity",
                       "prop49_energy_literal,spectrum", "--fail-fast")
    assert code == 1
    assert "spectrum" not in out


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "run.yaml"
    cfg.write_text("suite: models\nidentity: qprime_total_invariance\nsigma: Re(z1*z2)\n")
    code, out, _ = run(capsys, "verify", "--config", str(cfg))
    assert code == 0 and "PASS qprime_total_invariance" in out
    # command-line flags win over the file
    code, out, _ = run(capsys, "verify", "--config", str(cfg), "--sigma", "z1*z1b")
    assert code == 1


def test_config_rejects_unknown_keys(capsys, tmp_path):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("suite: models\ncolour: red\n")
    code, _, err = run(capsys, "verify", "--config", str(cfg))
    assert code == 2 and "colour" in err


def test_list(capsys):
    code, out, _ = run(capsys, "list", "--suite", "tractor")
    assert code == 0
    rows = [l.split("\t") for l in out.splitlines()]
    assert all(r[0] == "tractor" and r[2] for r in rows)
    code, out, _ = run(capsys, "list", "--suite", "symbolic", "--format", "jsonl")
    ids = [json.loads(l)["id"] for l in out.splitlines()]
    assert "grahamlee" in ids


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "crcalc", "apply", "--op", "Q4prime"],
                       capture_output=True, text=True, check=False)
    assert p.returncode == 0 and p.stdout.strip() == "1"
