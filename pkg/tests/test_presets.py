import json
import math

import pytest

from mfspec.errors import ConstraintViolated, SumNotOne
from mfspec.io import read_weights, weights_json, write_weights
from mfspec.measure import validate
from mfspec.presets import check_expectations, preset


def test_defaults():
    assert preset("sec61").ws.weights == (0.5, 0.2, 0.3, 0.0)
    assert preset("sec62").ws.weights == (0.4, 0.1, 0.04, 0.06, 0.34, 0.06, 0.0, 0.0)
    assert preset("sec63").ws.weights == (0.35, 0.14, 0.01, 0.03, 0.025, 0.325, 0.11, 0.01, 0.0, 0.0)
    assert preset("sec63").ws.base == 5


def test_derived_weights_are_exact_decimals():
    # 0.35 - 0.025 computed in binary would be 0.32499999999999996
    assert preset("sec63").ws.weights[5] == 0.325
    ws = preset("sec62", p0="0.3", p1="0.2", p3="0.1").ws
    assert ws.weights[4] == 0.2


@pytest.mark.parametrize(
    "name, params",
    [
        ("sec61", {"p1": "0.6", "p0": "0.3", "p2": "0.1"}),
        ("sec61", {"p2": "0"}),
        ("sec62", {"p3": "0.5"}),
        ("sec62", {"p3": "0.25", "p1": "0.2", "p0": "0.3", "p2": "0.05"}),
        ("sec63", {"p2": "0.02"}),
        ("sec63", {"p4": "0.4"}),
    ],
)
def test_constraints(name, params):
    with pytest.raises((ConstraintViolated, SumNotOne)):
        preset(name, **params)


def test_nondisjoint_variant_drops_the_shape_expectation():
    p = preset("sec62", p0="0.3", p1="0.2", p2="0.05", p3="0.25", disjoint="false")
    assert "domain_pieces" not in p.expected
    with pytest.raises(ConstraintViolated):
        preset("sec62", disjoint="maybe")


def test_unknown_preset():
    with pytest.raises(KeyError):
        preset("sec99")


@pytest.mark.parametrize("name", ["sec61", "sec62", "sec63", "nTrans(3)", "nTrans(4)"])
def test_expectations_hold(name):
    checks = check_expectations(preset(name))
    assert checks and all(c.passed for c in checks), [c for c in checks if not c.passed]


def test_nondefault_parameters_keep_their_facts():
    for p in (
        preset("sec61", p0="0.5", p1="0.3", p2="0.2"),
        preset("sec62", p0="0.35", p1="0.15", p2="0.05", p3="0.1"),
        preset("sec63", p0="0.3", p1="0.19", p2="0.01", p3="0.04", p4="0.03"),
    ):
        assert all(c.passed for c in check_expectations(p))
    # the crossing count is only promised for the default three-atom weights
    assert "transitions" not in preset("sec63", p0="0.3", p1="0.19", p2="0.01", p3="0.04", p4="0.03").expected
    assert preset("sec63").expected["transitions"] == 2


def test_sum_is_one_for_every_preset():
    for name in ("sec61", "sec62", "sec63"):
        assert math.fsum(preset(name).ws.weights) == 1.0


@pytest.mark.parametrize("name", ["sec61", "sec62", "sec63", "nTrans(3)"])
def test_weight_file_round_trip(tmp_path, name):
    ws = preset(name).ws
    path = tmp_path / "w.json"
    write_weights(ws, path, {"preset": name})
    back = read_weights(path)
    assert back == ws
    doc = json.loads(path.read_text())
    assert set(doc) == {"base", "weights", "meta"}
    assert weights_json(back, {"preset": name}) == path.read_text()
