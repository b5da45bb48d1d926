import csv
import json
import subprocess
import sys

import pytest
import sympy as sp

from rdlie.cli import run_command
from rdlie.equation import parse_equation
from rdlie.equivgroup import PointTransformation
from rdlie.expr import parse


def run(capsys, *argv):
    code = run_command(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--json")
    return code, json.loads(out) if out.strip() else None, err


def test_classify_power_source(capsys):
    code, data, _ = run_json(capsys, "classify", "--eq", "f=1; g=1; h=1; n=2; m=5")
    assert code == 0 and data["case"] == 3
    assert list(data["params"]) == sorted(data["params"])


def test_classify_human_output(capsys):
    code, out, _ = run(capsys, "classify", "--eq", "f=1; g=1; h=1; n=2; m=5")
    assert code == 0 and out.startswith("case 3")


def test_excluded_exponent_is_a_usage_error(capsys):
    code, out, err = run(capsys, "classify", "--eq", "f=1; g=1; h=1; n=0; m=2")
    assert code == 2 and out == "" and "n=0" in err


@pytest.mark.parametrize("argv", [
    ["classify", "--eq", "f=1; g=1; h=1; n=2"],
    ["classify", "--eq", "f=1; g=1; h=1; n=(2; m=5"],
    ["frobnicate", "--eq", "f=1; g=1; h=1; n=2; m=5"],
    ["classify"],
    ["simulate", "--eq", "f=1; g=1; h=0; n=1", "--grid", "1,2"],
    ["admissible", "--eq", "f=1; g=1; h=1; n=1; m=3"],
])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_conserve_quadratic_source_free(capsys):
    code, data, _ = run_json(capsys, "conserve", "--eq", "f=1; g=1; h=0; n=1; m=2")
    assert code == 0 and data["dimension"] == 2
    assert all(law["verified"] for law in data["laws"])


def test_conserve_needs_gauge(capsys):
    assert run(capsys, "conserve", "--eq", "f=1; g=x; h=0; n=1")[0] == 3


def test_transform_output_round_trips(capsys):
    code, data, _ = run_json(capsys, "transform", "--eq", "f=1; g=1; h=1; n=1; m=3",
                             "--group", "G1", "--params", "delta3=0,delta4=1,delta5=1,delta6=0")
    assert code == 0
    tr = PointTransformation.from_json(data["transformation"])
    assert sp.simplify(tr.X - 1 / parse("x")) == 0
    image = parse_equation(data["image"])
    assert image.n == 1 and image.m == 3


def test_transform_by_classification(capsys):
    code, data, _ = run_json(capsys, "transform", "--eq",
                             "f=x^(-10/3); g=1; h=x^(-13/3); n=2; m=4")
    assert code == 0
    assert parse_equation(data["image"]).literal() == "f=1; g=1; h=1; n=2; m=4"


def test_constraint_violation_is_a_usage_error(capsys):
    code, _, err = run(capsys, "transform", "--eq", "f=1; g=1; h=1; n=1; m=3",
                       "--group", "G1", "--params", "delta3=2,delta6=2")
    assert code == 2 and "delta3" in err


def test_reduce_lists_rows(capsys):
    code, data, _ = run_json(capsys, "reduce", "--eq", "f=1; g=1; h=-x^(-2); n=1; m=2")
    assert code == 0 and data["case"] == 9
    rows = {r["row"]: r for r in data["rows"]}
    assert {"9.1", "9.2", "9.4"} <= set(rows)


def test_reduce_refuses_other_cases(capsys):
    assert run(capsys, "reduce", "--eq", "f=1; g=1; h=1; n=2; m=5")[0] == 3


@pytest.mark.parametrize("literal", [
    "f=1; g=1; h=1; n=2; m=5",
    "f=1; g=1; h=-x^(-2); n=1; m=2",
    "f=1; g=1; h=0; n=1",
])
def test_verify_fixtures_pass(capsys, literal):
    code, data, _ = run_json(capsys, "verify", "--eq", literal)
    assert code == 0 and data["passed"]


def test_verify_reports_unsupported_coefficients(capsys):
    code, data, _ = run_json(capsys, "verify", "--eq", "f=2+sin(x); g=1; h=1; n=1; m=3")
    assert code == 1 and not data["passed"]


def test_simulate_dump_and_drift(capsys, tmp_path):
    path = tmp_path / "u.csv"
    code, data, _ = run_json(capsys, "simulate", "--eq", "f=1; g=1; h=0; n=1",
                             "--u0", "1 + x/10", "--grid", "1,2,32", "--tspan", "0,0.05",
                             "--boundary", "zero-flux", "--dump", str(path))
    assert code == 0
    assert all(d["drift"] < 1e-6 for d in data["drift"][:1])
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["t", "x", "u"]


def test_simulate_csv_on_stdout(capsys):
    code, out, err = run(capsys, "simulate", "--eq", "f=1; g=1; h=0; n=1", "--u0", "1 + x",
                         "--grid", "1,2,16", "--tspan", "0,0.01")
    assert code == 0 and out.splitlines()[0] == "t,x,u" and "drift" in err


def test_simulate_failure_exit_code(capsys):
    code, _, err = run(capsys, "simulate", "--eq", "f=1; g=1; h=0; n=1", "--u0", "x - 3/2")
    assert code == 1 and "numerical failure" in err


def test_admissible_branches(capsys):
    code, data, _ = run_json(capsys, "admissible", "--eq", "f=1; g=1; h=1; n=1; m=3",
                             "--eq2", "f=1; g=1; h=1; n=2; m=3")
    assert code == 0 and data["witness"] is None
    code, data, _ = run_json(capsys, "admissible", "--eq", "f=1; g=1; h=1; n=1; m=1",
                             "--eq2", "f=(5*x)^(-7/5); g=1; h=3/(25*x^2); n=1; m=2")
    assert code == 0 and data["witness"] is not None and data["witness_divergence_checked"]
    code, _, err = run(capsys, "admissible", "--eq", "f=2+sin(x); g=1; h=1; n=1; m=3",
                       "--eq2", "f=1; g=1; h=1; n=1; m=3")
    assert code == 3 and err


def test_seed_flag_and_environment_agree(capsys, monkeypatch):
    argv = ["classify", "--eq", "f=1+x^2; g=1; h=x; n=1; m=3", "--json"]
    code, first, _ = run(capsys, *argv, "--seed", "7")
    monkeypatch.setenv("RDLIE_SEED", "7")
    code2, second, _ = run(capsys, *argv)
    assert code == code2 == 0 and first == second


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rdlie.cli", "classify", "--eq",
                           "f=1; g=1; h=1; n=2; m=5", "--json"],
                          capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0 and json.loads(proc.stdout)["case"] == 3
