"""Answer extraction and tolerant structural equality.

The output selector compares candidate answers after numeric
normalization so stream-formatting noise (42 vs "42.0") cannot break the
majority-preference rule.
"""

from __future__ import annotations

import json
import math
from typing import Any

REL_TOL = 1e-9
ABS_TOL = 1e-12


def extract_answer(stdout: str) -> Any:
    """Parse the last non-empty stdout line as the structured answer."""
    lines = [ln.strip() for ln in stdout.splitlines() if ln.strip()]
    if not lines:
        return None
    last = lines[-1]
    try:
        return json.loads(last)
    except json.JSONDecodeError:
        pass
    try:
        return float(last)
    except ValueError:
        return last


def normalize(value: Any) -> Any:
    """Numeric strings become floats; containers normalize recursively."""
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            return value.strip()
    if isinstance(value, (list, tuple)):
        return [normalize(v) for v in value]
    if isinstance(value, dict):
        return {str(k): normalize(v) for k, v in value.items()}
    return value


def answers_equal(a: Any, b: Any, rel_tol: float = REL_TOL) -> bool:
    return _equal(normalize(a), normalize(b), rel_tol)


def _equal(a: Any, b: Any, rel_tol: float) -> bool:
    if isinstance(a, float) and isinstance(b, float):
        return math.isclose(a, b, rel_tol=rel_tol, abs_tol=ABS_TOL)
    if isinstance(a, list) and isinstance(b, list):
        return len(a) == len(b) and all(
            _equal(x, y, rel_tol) for x, y in zip(a, b))
    if isinstance(a, dict) and isinstance(b, dict):
        return a.keys() == b.keys() and all(
            _equal(a[k], b[k], rel_tol) for k in a)
    return type(a) is type(b) and a == b
