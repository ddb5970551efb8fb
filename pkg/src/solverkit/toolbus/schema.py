"""Minimal structured-document schema validation.

Supports what the built-in tools (and the agents' typed hand-offs) need:
object/array/string/integer/number/boolean/null types, required fields,
enums, nested properties and array items. Deliberately not a full JSON
Schema implementation.
"""

from __future__ import annotations

from typing import Any

from ..errors import SchemaViolationError

_TYPES = {
    "object": dict,
    "array": list,
    "string": str,
    "boolean": bool,
    "null": type(None),
}


def _type_ok(value: Any, expected: str) -> bool:
    if expected == "integer":
        return isinstance(value, int) and not isinstance(value, bool)
    if expected == "number":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    py = _TYPES.get(expected)
    if py is None:
        raise SchemaViolationError(f"unknown schema type {expected!r}")
    if expected == "object":
        return isinstance(value, dict)
    return isinstance(value, py)


def validate(document: Any, schema: dict, path: str = "$") -> None:
    """Raise SchemaViolationError naming the offending path on mismatch."""
    expected = schema.get("type")
    if expected is not None and not _type_ok(document, expected):
        raise SchemaViolationError(
            f"{path}: expected {expected}, got {type(document).__name__}"
        )
    if "enum" in schema and document not in schema["enum"]:
        raise SchemaViolationError(f"{path}: {document!r} not in enum {schema['enum']}")
    if expected == "object" or "properties" in schema or "required" in schema:
        if not isinstance(document, dict):
            raise SchemaViolationError(f"{path}: expected object")
        for field in schema.get("required", ()):
            if field not in document:
                raise SchemaViolationError(f"{path}: missing required field {field!r}")
        props = schema.get("properties", {})
        for key, value in document.items():
            sub = props.get(key)
            if sub is not None:
                validate(value, sub, f"{path}.{key}")
            elif schema.get("additionalProperties") is False:
                raise SchemaViolationError(f"{path}: unexpected field {key!r}")
    if expected == "array" and "items" in schema:
        for i, item in enumerate(document):
            validate(item, schema["items"], f"{path}[{i}]")


def is_valid(document: Any, schema: dict) -> bool:
    try:
        validate(document, schema)
        return True
    except SchemaViolationError:
        return False
