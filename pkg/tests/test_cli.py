import json

import pytest

from nahmsums.cli import main

RR_SPEC = json.dumps({"A": [[2]], "b": [0], "c": "-1/60", "d": [1]})


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_detects_lambda(capsys):
    code, out, _ = run(capsys, ["solve", "--spec", RR_SPEC, "--prec", "100"])
    doc = json.loads(out)
    assert code == 0
    assert doc["schema"] == 1
    assert doc["lambda_rational"] == "1/60"


def test_coeffs(capsys):
    code, out, _ = run(capsys, ["coeffs", "--spec", RR_SPEC, "--order", "5"])
    doc = json.loads(out)
    assert code == 0
    assert doc["coefficients"]["-1/60"] == "1"
    assert doc["coefficients"]["299/60"] == "2"


def test_eval_tau(capsys):
    code, out, _ = run(capsys, ["eval", "--spec", RR_SPEC, "--tau", "1", "--prec", "30"])
    assert code == 0
    assert json.loads(out)["value"].startswith("1.1124768698639109823753103")


def test_identity_bundled(capsys):
    code, out, _ = run(capsys, ["identity", "--file", "rr1", "--order", "50"])
    assert code == 0
    assert "verified" in out.lower()


def test_asympt(capsys):
    code, out, _ = run(capsys, ["asympt", "--spec", RR_SPEC, "--alpha", "1/3", "--order", "2",
                                "--eps", "1/80", "--tol", "1e-6"])
    assert code == 0
    assert json.loads(out)["alpha"] == "1/3"


def test_verify_transform(capsys):
    code, out, _ = run(capsys, ["verify-transform", "--preset", "rr", "--tau", "1.0", "--prec", "40"])
    doc = json.loads(out)
    assert code == 0 and doc["verified"]


def test_scan_small(capsys, tmp_path):
    target = tmp_path / "out.csv"
    code, out, _ = run(capsys, ["scan", "--rank", "2", "--d", "1,2", "--height", "1",
                                "--b-height", "1", "--out", str(target)])
    assert code == 0
    assert target.read_text().startswith("A,b,c_est,d,third_diff,lambda")


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["solve"])
    assert exc.value.code == 2
    assert "NahmData JSON" in capsys.readouterr().err
    code, _, err = run(capsys, ["solve", "--spec", "{not json"])
    assert code == 2
    for argv in (["solve", "--spec", RR_SPEC, "--prec", "10"],
                 ["asympt", "--spec", RR_SPEC, "--order", "0"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2


def test_domain_error_exit_1(capsys):
    bad = json.dumps({"A": [[1, 2], [2, 1]], "b": [0, 0], "c": 0, "d": [1, 1]})
    code, _, err = run(capsys, ["solve", "--spec", bad])
    assert code == 1
    assert "NotPositiveDefinite" in err


def test_byte_determinism(capsys):
    outs = [run(capsys, ["eval", "--spec", RR_SPEC, "--q", "0.2", "--prec", "30"])[1] for _ in range(2)]
    assert outs[0] == outs[1]
