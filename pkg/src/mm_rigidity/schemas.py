"""Versioned JSON schemas for spaces, measures and reports."""
from __future__ import annotations

import jsonschema

from .errors import SchemaError

_NUM = {"type": "number"}
_PAIR = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}

SCHEMAS = {
    "space": {
        "type": "object",
        "required": ["n", "dist", "weight"],
        "additionalProperties": False,
        "properties": {
            "schema": {"const": "mm-rigidity/space@1"},
            "n": {"type": "integer", "minimum": 1},
            "dist": {"type": "array", "items": {"type": "array", "items": _NUM}},
            "weight": {"type": "array", "items": _NUM},
        },
    },
    "measure": {
        "type": "object",
        "required": ["kind"],
        "properties": {
            "schema": {"const": "mm-rigidity/measure@1"},
            "kind": {"enum": ["gaussian", "uniform", "spherical", "atoms", "grid"]},
            "mean": _NUM,
            "sd": {"type": "number", "exclusiveMinimum": 0},
            "lo": _NUM,
            "hi": _NUM,
            "a": _NUM,
            "b": _NUM,
            "N": {"type": "number", "exclusiveMinimum": 1},
            "atoms": {"type": "array", "items": _PAIR},
            "nodes": {"type": "array", "items": _NUM, "minItems": 2},
            "density": {"type": "array", "items": _NUM, "minItems": 2},
        },
        "additionalProperties": False,
    },
    "config": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "seed": {"type": "integer", "minimum": 0},
            "threads": {"type": "integer", "minimum": 1},
            "tol": {"type": "number", "exclusiveMinimum": 0},
            "format": {"enum": ["json", "csv", "table"]},
            "restarts": {"type": "integer", "minimum": 1},
            "eps": {"type": "number", "exclusiveMinimum": 0},
        },
    },
}


def validate(obj, name: str) -> None:
    try:
        jsonschema.validate(obj, SCHEMAS[name])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"{name} JSON invalid at field '{where}': {exc.message}") from exc
