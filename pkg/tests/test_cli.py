import csv
import io
import json
import math
import subprocess
import sys

import pytest

from mm_rigidity.cli import main, parse_measure, parse_space
from mm_rigidity.errors import DomainError
from mm_rigidity.measures1d import Gaussian, SphericalModel, Uniform
from mm_rigidity.mmspace import path_space
from mm_rigidity.schemas import validate


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_obsvar_two_point_json(capsys):
    code, out, _ = run(capsys, "obsvar", "--space", "twopoint")
    assert code == 0
    assert json.loads(out)["result"]["value"] == pytest.approx(0.5)


def test_bad_lambda_exit_2(capsys):
    code, _, err = run(capsys, "obsvar", "--space", "twopoint", "--lambda", "cubic")
    assert code == 2 and "lambda" in err


def test_obsvar_sphere_with_bound_and_foliation(capsys):
    code, out, _ = run(capsys, "obsvar", "--space", "sphere:2:128", "--nu", "sigma2", "--foliation")
    rec = json.loads(out)
    assert code == 0 and rec["pass"] and rec["bound"]["pass"]
    assert rec["foliation"]["case"] == "bounded"


def test_profile_two_point(capsys):
    code, out, _ = run(capsys, "profile", "--space", "twopoint", "--eps", "1.0")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows == [["v", "value"], ["0.5", "0.5"]]


def test_profile_measure_to_file(capsys, tmp_path):
    meas = tmp_path / "gaussian.json"
    meas.write_text(json.dumps(Gaussian().to_json()))
    out = tmp_path / "prof.csv"
    code, _, _ = run(capsys, "profile", "--measure", str(meas), "--out", str(out))
    text = out.read_bytes()
    assert code == 0 and b"\r" not in text
    lines = text.decode().splitlines()
    assert lines[0] == "v,value" and len(lines) > 100


def test_size_guard_exit_3(capsys, tmp_path):
    big = tmp_path / "big.json"
    big.write_text(json.dumps(path_space(list(range(25))).to_json()))
    code, _, err = run(capsys, "profile", "--space", str(big))
    assert code == 3 and "n=25" in err


def test_schema_error_names_field(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    obj = path_space([0.0, 1.0]).to_json()
    obj["weight"] = ["a", "b"]
    bad.write_text(json.dumps(obj))
    code, _, err = run(capsys, "profile", "--space", str(bad))
    assert code == 2 and "weight" in err


def test_config_unknown_key_rejected(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 1, "colour": "red"}))
    code, _, err = run(capsys, "obsvar", "--space", "twopoint", "--config", str(cfg))
    assert code == 2 and "colour" in err


def test_models_commands(capsys):
    code, out, _ = run(capsys, "models", "variance", "--N", "2")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and float(rows[0]["value"]) == pytest.approx(math.pi**2 / 4 - 2, abs=1e-12)
    code, out, _ = run(capsys, "models", "zeta", "--h", "0.5", "--format", "json")
    assert json.loads(out)["zeta2"] == pytest.approx(math.pi**2 / 2, rel=1e-14)
    code, out, _ = run(capsys, "models", "asympt", "--N", "10:1000:log")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 10 and float(rows[-1]["deviation"]) <= 0.005


def test_dominate_examples(capsys):
    code, out, _ = run(capsys, "dominate", "uniform01", "uniform02")
    assert code == 0 and json.loads(out)["verdict"] == "fails"
    code, out, _ = run(capsys, "dominate", "gaussian(0,1)", "gaussian(0,0.5)", "--sep")
    rec = json.loads(out)
    assert rec["verdict"] == "dominates-monotone" and all(r["passed"] for r in rec["sep_checks"])


def test_generate_warped_is_schema_valid(capsys, tmp_path):
    out = tmp_path / "w.json"
    code, _, _ = run(capsys, "generate", "warped", "--phi", "sin", "--n", "1", "--F", "circle:8",
                     "--res", "32", "--out", str(out))
    obj = json.loads(out.read_text())
    validate(obj, "space")
    assert code == 0 and obj["n"] == 256


@pytest.mark.parametrize("fmt", ["json", "csv", "table"])
def test_byte_identical_reruns(capsys, fmt):
    args = ("obsvar", "--space", "path:6", "--lambda", "min1", "--format", fmt, "--seed", "3")
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    assert a == b and a


def test_threads_env_fallback(capsys, monkeypatch):
    monkeypatch.setenv("MM_RIGIDITY_THREADS", "2")
    code, out, _ = run(capsys, "obsvar", "--space", "path:5")
    assert code == 0
    monkeypatch.setenv("MM_RIGIDITY_THREADS", "lots")
    code, _, err = run(capsys, "obsvar", "--space", "path:5")
    assert code == 2 and "MM_RIGIDITY_THREADS" in err


def test_verify_exit_code_follows_results(capsys, monkeypatch):
    from mm_rigidity import acceptance

    fake = [acceptance.Criterion(1, "a", True, "ok", 0.0), acceptance.Criterion(2, "b", False, "bad", 0.0)]
    monkeypatch.setattr(acceptance, "run_all", lambda printer=None: fake)
    code, out, _ = run(capsys, "verify")
    assert code == 1 and "FAIL" in out and "PASS" in out


def test_argparse_errors_return_code(capsys):
    code, _, _ = run(capsys, "nonsense")
    assert code == 2


def test_parse_measure_forms():
    assert parse_measure("uniform(0,2)") == Uniform(0.0, 2.0)
    assert parse_measure("sphere(3)") == SphericalModel(3.0)
    assert parse_measure("sigma2") == SphericalModel(2.0)
    assert parse_measure("gaussian(0,1,-4,4)") == Gaussian(0, 1, -4, 4)
    assert parse_measure("atoms(0:0.5;1:0.5)").masses == (0.5, 0.5)
    with pytest.raises(DomainError):
        parse_measure("cauchy(0,1)")
    with pytest.raises(DomainError):
        parse_space("torus:3")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "mm_rigidity", "models", "zeta", "--h", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.startswith("h,zeta2")
