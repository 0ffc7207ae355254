"""Shared report plumbing: status constants and deterministic JSON encoding."""

from __future__ import annotations

import json
import math

CERTIFIED = "certified-up-to-horizon"
REFUTED = "refuted"
CONDITIONAL = "conditional"

CONSISTENT = "consistent-up-to-order-N"

#: exit codes used by the command line front end
EXIT_OK = 0
EXIT_REFUTED = 1
EXIT_CONDITIONAL = 2
EXIT_INPUT_ERROR = 3


def jsonable(value):
    """Recursively convert report values into JSON-encodable primitives."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    if isinstance(value, (bool, int, str)) or value is None:
        return value
    if hasattr(value, "as_dict"):
        return jsonable(value.as_dict())
    return str(value)


def canonical_json(obj) -> str:
    """Deterministic JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(jsonable(obj), sort_keys=True, indent=2) + "\n"
