import json
import math

import pytest

from wgse.numerics import DEFAULT_TOL
from wgse.scenario import (Scenario, ScenarioError, load_scenario,
                           parse_scenario, serialize_scenario)

CANONICAL = {
    "geometry": {"a": 1.0, "b": 0.5},
    "atom": {"omega_A": 1.5 * math.pi * math.sqrt(5.0),
             "rest_energy": 150 * math.pi * math.sqrt(5.0),
             "dipole": 0.1, "x0": 0.5, "y0": 0.25},
    "omega_max": 3 * math.pi,
}


def test_parse_canonical():
    sc = parse_scenario(json.dumps(CANONICAL))
    assert sc.geometry.a == 1.0
    assert sc.atom.p_z == 0.0
    assert sc.tolerances == DEFAULT_TOL
    assert sc.omega_max == pytest.approx(3 * math.pi)


def test_parse_with_tolerances():
    doc = dict(CANONICAL)
    doc["tolerances"] = {"rel": 1e-8, "abs": 1e-10, "max_evals": 10000}
    sc = parse_scenario(json.dumps(doc))
    assert sc.tolerances.rel == 1e-8
    assert sc.tolerances.max_evals == 10000


def test_round_trip_idempotent():
    sc = parse_scenario(json.dumps(CANONICAL))
    text = serialize_scenario(sc)
    sc2 = parse_scenario(text)
    assert sc2 == sc
    assert serialize_scenario(sc2) == text


def test_rejects_malformed_json():
    with pytest.raises(ScenarioError):
        parse_scenario("{not json")
    with pytest.raises(ScenarioError):
        parse_scenario("[1, 2]")


def test_rejects_missing_keys():
    doc = dict(CANONICAL)
    del doc["omega_max"]
    with pytest.raises(ScenarioError):
        parse_scenario(json.dumps(doc))
    doc = {"geometry": {"a": 1.0}, "atom": CANONICAL["atom"],
           "omega_max": 1.0}
    with pytest.raises(ScenarioError):
        parse_scenario(json.dumps(doc))


def test_rejects_non_numeric_values():
    doc = json.loads(json.dumps(CANONICAL))
    doc["atom"]["dipole"] = "big"
    with pytest.raises(ScenarioError):
        parse_scenario(json.dumps(doc))
    doc["atom"]["dipole"] = True
    with pytest.raises(ScenarioError):
        parse_scenario(json.dumps(doc))


def test_rejects_invariant_violations():
    doc = json.loads(json.dumps(CANONICAL))
    doc["atom"]["x0"] = 2.0  # outside the cross section
    with pytest.raises(ScenarioError):
        parse_scenario(json.dumps(doc))
    doc = json.loads(json.dumps(CANONICAL))
    doc["geometry"]["b"] = -1.0
    with pytest.raises(ScenarioError):
        parse_scenario(json.dumps(doc))
    doc = json.loads(json.dumps(CANONICAL))
    doc["omega_max"] = 0.0
    with pytest.raises(ScenarioError):
        parse_scenario(json.dumps(doc))


def test_load_from_file(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(CANONICAL), encoding="utf-8")
    sc = load_scenario(str(path))
    assert isinstance(sc, Scenario)
    assert sc.atom.omega_A == pytest.approx(CANONICAL["atom"]["omega_A"])
