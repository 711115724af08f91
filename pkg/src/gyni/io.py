"""JSON reading and writing for scenarios, priors, behaviours and inequalities.

Rationals are ``"num/den"`` strings.  Digit strings print party 1 first;
every file written here carries an ``indexing`` note saying so.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import jsonschema

from .exact import format_rational, parse_rational
from .scenario import Behavior, BellInequality, PriorDistribution, Scenario, ScenarioError

RATIONAL = {"type": "string", "pattern": r"^-?[0-9]+(/[0-9]+)?$"}

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["parties", "inputs", "outputs"],
    "properties": {
        "parties": {"type": "integer", "minimum": 1},
        "inputs": {"type": "integer", "minimum": 2},
        "outputs": {"type": "integer", "minimum": 2},
    },
}

_TABLE = {"type": "object", "additionalProperties": RATIONAL}

DISTRIBUTION_SCHEMA = {
    "type": "object",
    "required": ["scenario", "weights"],
    "properties": {"scenario": SCENARIO_SCHEMA, "weights": _TABLE, "indexing": {"type": "string"}},
}

BEHAVIOR_SCHEMA = {
    "type": "object",
    "required": ["scenario", "table"],
    "properties": {"scenario": SCENARIO_SCHEMA, "table": _TABLE, "indexing": {"type": "string"}},
}

INEQUALITY_SCHEMA = {
    "type": "object",
    "required": ["scenario", "coefficients", "bound"],
    "properties": {
        "scenario": SCENARIO_SCHEMA,
        "coefficients": _TABLE,
        "bound": RATIONAL,
        "bound_kind": {"enum": ["classical", "no-signalling"]},
        "indexing": {"type": "string"},
    },
}


class InputError(ValueError):
    """Malformed or unreadable input file."""


def _load(source: str | Path | dict, schema: dict) -> dict:
    if isinstance(source, dict):
        data = source
    else:
        try:
            data = json.loads(Path(source).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read {source}: {exc}") from exc
    try:
        jsonschema.validate(data, schema)
    except jsonschema.ValidationError as exc:
        raise InputError(f"invalid input: {exc.message}") from exc
    return data


def scenario_from_json(data: dict) -> Scenario:
    return Scenario(data["parties"], data["inputs"], data["outputs"])


def _dense(sc: Scenario, table: dict, size: int, key_to_index) -> list:
    values = [parse_rational("0")] * size
    for key, text in table.items():
        try:
            idx = key_to_index(key)
        except (ScenarioError, ValueError) as exc:
            raise InputError(f"bad key {key!r}: {exc}") from exc
        values[idx] = parse_rational(text)
    return values


def load_distribution(source) -> PriorDistribution:
    data = _load(source, DISTRIBUTION_SCHEMA)
    sc = scenario_from_json(data["scenario"])
    try:
        return PriorDistribution(sc, tuple(_dense(sc, data["weights"], sc.num_inputs, sc.input_index)))
    except ScenarioError as exc:
        raise InputError(str(exc)) from exc


def load_behavior(source) -> Behavior:
    data = _load(source, BEHAVIOR_SCHEMA)
    sc = scenario_from_json(data["scenario"])
    try:
        return Behavior(sc, tuple(_dense(sc, data["table"], sc.num_cells, sc.parse_cell_key)))
    except ScenarioError as exc:
        raise InputError(str(exc)) from exc


def load_inequality(source) -> BellInequality:
    data = _load(source, INEQUALITY_SCHEMA)
    sc = scenario_from_json(data["scenario"])
    coeffs = _dense(sc, data["coefficients"], sc.num_cells, sc.parse_cell_key)
    try:
        return BellInequality(sc, tuple(coeffs), parse_rational(data["bound"]), data.get("bound_kind", "classical"))
    except ScenarioError as exc:
        raise InputError(str(exc)) from exc


def dumps(obj: Any) -> str:
    """Deterministic JSON text (sorted keys, two-space indent, trailing newline)."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_json(path: str | Path, obj: Any):
    try:
        Path(path).write_text(dumps(obj))
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from exc


__all__ = [
    "BEHAVIOR_SCHEMA",
    "DISTRIBUTION_SCHEMA",
    "INEQUALITY_SCHEMA",
    "InputError",
    "dumps",
    "format_rational",
    "load_behavior",
    "load_distribution",
    "load_inequality",
    "write_json",
]
