import csv
import io as stdio
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from mfspec import io
from mfspec.cli import main
from mfspec.errors import BadLength
from mfspec.measure import validate


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.reader(stdio.StringIO(text)))


# io ---------------------------------------------------------------------------


def test_fmt_and_csv():
    assert io.fmt(0.1) == "0.10000000000000001"
    assert io.fmt(-math.inf) == "-inf" and io.fmt(math.nan) == "nan"
    assert io.csv_text(("a", "b"), [(1.0, "x")]) == "a,b\n1,x\n"
    assert float(io.fmt(1 / 3)) == 1 / 3


def test_dumps_is_stable_and_strict_json():
    doc = io.dumps({"b": [math.inf, np.float64(0.5)], "a": None})
    assert json.loads(doc) == {"a": None, "b": ["inf", 0.5]}
    assert doc.index('"a"') < doc.index('"b"')


def test_read_weights_errors(tmp_path):
    p = tmp_path / "w.json"
    p.write_text("{not json")
    with pytest.raises(BadLength):
        io.read_weights(p)
    p.write_text(json.dumps({"weights": [0.5, 0.5]}))
    with pytest.raises(BadLength):
        io.read_weights(p)
    p.write_text(json.dumps({"base": 2, "weights": ["0.5", "0.2", "0.3", "0"]}))
    assert io.read_weights(p) == validate([0.5, 0.2, 0.3, 0.0], 2)


# commands -------------------------------------------------------------------------


def test_tau_column_is_the_rowwise_max(capsys):
    code, out, _ = run(capsys, "tau", "sec63", "--qmin", "-30", "--qmax", "5", "--samples", "701")
    assert code == 0
    table = rows(out)
    assert tuple(table[0]) == io.CURVE_HEADER
    body = table[1:]
    assert len(body) == 701
    for r in body:
        nu, tilde, mu = float(r[1]), float(r[2]), float(r[3])
        assert mu == max(nu, tilde)
        assert r[4] == ("nu" if nu >= tilde else "tilde")


def test_tau_depth_column(capsys):
    code, out, _ = run(capsys, "tau", "sec61", "--samples", "5", "--depth", "4")
    table = rows(out)
    assert table[0][-1] == "tau_n" and code == 0
    q1 = run(capsys, "tau", "sec61", "--qmin", "0", "--qmax", "1", "--samples", "2", "--depth", "6")[1]
    assert abs(float(rows(q1)[2][-1])) < 1e-12


def test_transitions_report(capsys):
    code, out, _ = run(capsys, "transitions", "sec63")
    assert code == 0
    doc = json.loads(out)
    assert len(doc["transitions"]) == 2
    for t in doc["transitions"]:
        assert {"qStar", "leftSlope", "rightSlope", "alphaLo", "alphaHi", "gapAtMidpoint"} <= set(t)
        assert t["alphaLo"] == -t["rightSlope"] and t["alphaHi"] == -t["leftSlope"]
        assert t["gapAtMidpoint"] > 0


def test_spectrum_has_the_isolated_row(capsys):
    code, out, _ = run(capsys, "spectrum", "sec61")
    assert code == 0
    table = rows(out)
    assert tuple(table[0]) == io.SPECTRUM_HEADER
    iso = [r for r in table[1:] if r[2] == "tilde"]
    assert len(iso) == 1
    assert float(iso[0][0]) == pytest.approx(-math.log2(0.2), abs=1e-15)
    assert float(iso[0][1]) == 0.0


def test_validate_report(capsys):
    code, out, _ = run(capsys, "validate", "sec63")
    doc = json.loads(out)
    assert code == 0 and doc["B"] == [3, 4] and doc["kKind"] == "Cantor" and doc["nuMultinomial"]


def test_preset_parameters(capsys):
    code, out, _ = run(capsys, "validate", "sec61", "--param", "p0=0.5", "--param", "p1=0.3", "--param", "p2=0.2")
    assert code == 0 and json.loads(out)["weights"] == [0.5, 0.3, 0.2, 0.0]
    code, _, err = run(capsys, "validate", "sec61", "--param", "p1=0.9", "--param", "p0=0.05", "--param", "p2=0.05")
    assert code == 2 and "ConstraintViolated" in err


def test_verify_report(capsys):
    code, out, _ = run(capsys, "verify", "sec61", "--checks", "wqb,qbfail,lemma1,submult", "--depth", "5", "--nmax", "8")
    doc = json.loads(out)
    assert code == 0
    assert {k: v["status"] for k, v in doc["checks"].items()} == {
        "wqb": "pass", "qbfail": "pass", "lemma1": "pass", "submult": "pass"
    }
    code, out, _ = run(capsys, "verify", "sec63", "--checks", "qbfail")
    assert code == 0 and json.loads(out)["checks"]["qbfail"]["status"] == "not-applicable"


def test_frostman_check(capsys):
    code, out, _ = run(capsys, "verify", "sec61", "--checks", "frostman")
    assert code == 0 and json.loads(out)["checks"]["frostman"]["status"] == "pass"


def test_synthesize_writes_a_weight_file(capsys, tmp_path):
    path = tmp_path / "w.json"
    code, _, _ = run(capsys, "synthesize", "--n", "2", "--out", str(path))
    assert code == 0
    ws = io.read_weights(path)
    doc = json.loads(path.read_text())
    assert len(doc["meta"]["qStars"]) == 2
    code, out, _ = run(capsys, "transitions", str(path))
    assert code == 0 and len(json.loads(out)["transitions"]) == 2


# exit codes ---------------------------------------------------------------------


def test_input_errors_exit_2(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"base": 2, "weights": [0.5, 0.5, 0.5, 0.5]}))
    assert run(capsys, "validate", str(bad))[0] == 2
    assert run(capsys, "validate", "no-such-thing")[0] == 2
    assert run(capsys, "tau", "sec61", "--qmin", "1", "--qmax", "0")[0] == 2
    assert run(capsys, "verify", "sec61", "--checks", "bogus")[0] == 2
    with pytest.raises(SystemExit) as e:
        main(["tau"])
    assert e.value.code == 2


def test_hypothesis_failures_exit_1(capsys, tmp_path):
    w = tmp_path / "w.json"
    w.write_text(json.dumps({"base": 2, "weights": [0.5, 0.5, 0.0, 0.0]}))
    code, _, err = run(capsys, "spectrum", str(w))
    assert code == 1 and "BOverlap" in err
    w.write_text(json.dumps({"base": 2, "weights": [0.0, 0.5, 0.5, 0.0]}))
    code, out, _ = run(capsys, "tau", str(w), "--samples", "3")
    # the curve is still written, flagged by the exit status
    assert code == 1 and len(rows(out)) == 4


def test_budget_environment_variable(capsys, monkeypatch):
    monkeypatch.setenv("MFSPEC_BUDGET", "100")
    code, _, err = run(capsys, "tau", "sec61", "--samples", "3", "--depth", "8")
    assert code == 2 and "DepthTooLarge" in err


def _cli(*argv, env=None):
    import os

    e = dict(os.environ, **(env or {}))
    return subprocess.run([sys.executable, "-m", "mfspec", *argv], capture_output=True, env=e)


def test_output_is_byte_identical_across_runs():
    a = _cli("transitions", "sec63")
    b = _cli("transitions", "sec63")
    assert a.returncode == 0 and a.stdout == b.stdout
    c = _cli("tau", "sec63", "--depth", "6", "--samples", "21")
    d = _cli("tau", "sec63", "--depth", "6", "--samples", "21")
    assert c.stdout == d.stdout


def test_module_entry_point_exit_codes():
    assert _cli("validate", "sec61").returncode == 0
    assert _cli("validate", "sec61", "--param", "p1=0.7").returncode == 2
    assert _cli("tau", "sec61", "--depth", "8", "--samples", "2", env={"MFSPEC_BUDGET": "10"}).returncode == 2
