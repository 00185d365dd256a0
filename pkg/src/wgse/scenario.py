"""Scenario files: one JSON document describing a full run.

Schema:

    {
      "geometry": {"a": ..., "b": ...},
      "atom": {"omega_A": ..., "rest_energy": ..., "dipole": ...,
               "x0": ..., "y0": ..., "p_z": ...},
      "omega_max": ...,
      "tolerances": {"rel": ..., "abs": ..., "max_evals": ...}   # optional
    }

p_z defaults to 0 and tolerances to the library defaults.  All module
invariants are validated on load; an invalid document raises ScenarioError
before any computation starts.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

from .coupling import AtomParams
from .geometry import WaveguideGeometry
from .numerics import DEFAULT_TOL, ToleranceSpec

__all__ = ["Scenario", "ScenarioError", "parse_scenario", "load_scenario",
           "serialize_scenario"]


class ScenarioError(ValueError):
    """The scenario document is malformed or violates an invariant."""


@dataclass(frozen=True)
class Scenario:
    geometry: WaveguideGeometry
    atom: AtomParams
    omega_max: float
    tolerances: ToleranceSpec = DEFAULT_TOL

    def __post_init__(self):
        if not self.omega_max > 0:
            raise ScenarioError("omega_max must be positive")
        self.atom.validate_position(self.geometry)


def _require_number(obj, key, section, default=None):
    if key not in obj:
        if default is not None:
            return default
        raise ScenarioError(f"missing key {section}.{key}")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(f"{section}.{key} must be a number, got {v!r}")
    return float(v)


def _require_section(doc, key):
    sec = doc.get(key)
    if not isinstance(sec, dict):
        raise ScenarioError(f"missing or malformed section {key!r}")
    return sec


def parse_scenario(text: str) -> Scenario:
    """Parse and validate a scenario JSON document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object")
    geo = _require_section(doc, "geometry")
    at = _require_section(doc, "atom")
    try:
        geometry = WaveguideGeometry(
            a=_require_number(geo, "a", "geometry"),
            b=_require_number(geo, "b", "geometry"))
        atom = AtomParams(
            omega_A=_require_number(at, "omega_A", "atom"),
            rest_energy=_require_number(at, "rest_energy", "atom"),
            dipole=_require_number(at, "dipole", "atom"),
            x0=_require_number(at, "x0", "atom"),
            y0=_require_number(at, "y0", "atom"),
            p_z=_require_number(at, "p_z", "atom", default=0.0))
        tolerances = DEFAULT_TOL
        if "tolerances" in doc:
            tl = _require_section(doc, "tolerances")
            tolerances = ToleranceSpec(
                rel=_require_number(tl, "rel", "tolerances",
                                    default=DEFAULT_TOL.rel),
                abs=_require_number(tl, "abs", "tolerances",
                                    default=DEFAULT_TOL.abs),
                max_evals=int(_require_number(tl, "max_evals", "tolerances",
                                              default=DEFAULT_TOL.max_evals)))
        return Scenario(
            geometry=geometry, atom=atom,
            omega_max=_require_number(doc, "omega_max", "<root>"),
            tolerances=tolerances)
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc


def load_scenario(path: str) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def serialize_scenario(scenario: Scenario) -> str:
    """Canonical JSON form; parse(serialize(s)) == s."""
    doc = {
        "geometry": asdict(scenario.geometry),
        "atom": asdict(scenario.atom),
        "omega_max": scenario.omega_max,
        "tolerances": asdict(scenario.tolerances),
    }
    return json.dumps(doc, indent=2) + "\n"
