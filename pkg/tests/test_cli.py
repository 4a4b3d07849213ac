import csv
import io
import json

import numpy as np
import pytest

from weightshift.cli import main, parse_config, UsageError


def run(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_params_scalar_example(capsys):
    code, out, _ = run(capsys, "params", "t=0", "k=0", "lambda_re=0.25")
    data = json.loads(out)
    assert code == 0
    assert (data["a"], data["b"], data["c_hde"]) == (0.5, 0.5, 1.0)


def test_params_equal_weights(capsys):
    _, out, _ = run(capsys, "params", "t=2", "k=2", "lambda_re=0.25")
    assert json.loads(out)["c_hde"] == 1.0


def test_parity_and_usage_errors(capsys):
    assert run(capsys, "params", "t=3", "k=2")[0] == 2
    assert run(capsys, "params", "bogus=1")[0] == 2
    assert run(capsys, "params", "t")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2


def test_defaults():
    cfg = parse_config("eval", [])
    assert (cfg["period_N"], cfg["coset_Q"], cfg["cusp_Y"], cfg["seed"]) == (200, 40, 20.0, 42)
    with pytest.raises(UsageError):
        parse_config("eval", ["out_format=xml"])


def test_seed_ray_reproduces_growth(capsys):
    code, out, _ = run(capsys, "eval", "which=seed", "t=2", "k=0", "q_re=0.2", "lambda_re=-4", "lambda_im=0.5",
                       "u2=0.3", "v_min=100", "v_max=10000", "samples=12", "out_format=csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == ["u", "v", "re", "im", "tail"]
    v = np.array([float(r["v"]) for r in rows])
    mag = np.hypot([float(r["re"]) for r in rows], [float(r["im"]) for r in rows])
    _, pj, _ = run(capsys, "params", "t=2", "k=0", "q_re=0.2", "lambda_re=-4", "lambda_im=0.5")
    alpha = json.loads(pj)["alpha_K"]
    assert abs(np.polyfit(np.log(v), np.log(mag), 1)[0] - alpha) < 0.05


def test_csv_is_seventeen_digits(capsys):
    _, out, _ = run(capsys, "eval", "which=seed", "lambda_re=-3", "v2=1.7", "out_format=csv")
    row = out.splitlines()[1].split(",")
    assert float(row[2]) != 0 and len(row[2].lstrip("-").replace(".", "").split("e")[0].lstrip("0")) >= 16


def test_refusals_exit_three(capsys):
    assert run(capsys, "eval", "which=k0", "lambda_re=0.3")[0] == 3
    code, _, err = run(capsys, "eval", "which=auto", "lambda_re=-3.3", "u1=0.2", "v1=1.3",
                       "u2=-0.11560693641618497", "v2=0.7514450867052023")
    assert code == 3 and "equivalent" in err
    assert run(capsys, "apply", "lambda_re=-2", "s=2.5")[0] == 3


def test_verify_command(capsys):
    code, out, _ = run(capsys, "verify", "suite=hde", "seed=42", "budget=0.1")
    assert code == 0 and json.loads(out)["failed"] == 0
    assert run(capsys, "verify", "suite=unknown")[0] == 2
    code, out, _ = run(capsys, "verify", "suite=eigenvalue", "budget=0.1")
    cases = json.loads(out)["cases"]
    assert all("measured" in c for c in cases) and len(cases) >= 100


def test_verify_byte_identical(capsys):
    a = run(capsys, "verify", "suite=covariance", "budget=0.1", "timing=off")[1]
    b = run(capsys, "verify", "suite=covariance", "budget=0.1", "timing=off")[1]
    assert a == b


def test_apply_at_i_reports_sector_weight(capsys):
    code, out, _ = run(capsys, "apply", "lambda_re=-6", "s=1.2", "u1=0", "v1=1", "grid=24")
    data = json.loads(out)
    assert code == 0 and data["breakdown"]["sector_weight"] == 0.5
    assert data["budget"] > 0
