"""Tolerance-based answer grading.

Pure function of its arguments. Numbers pass within the task's absolute
tolerance; strings compare exactly after whitespace normalization
(case-sensitive; identifiers like space groups are case-meaningful); lists
compare elementwise with matching lengths, optionally order-insensitive
via greedy matching of each truth element to an unused raw element.
"""

from __future__ import annotations

import json
import re
from typing import Any

_WS = re.compile(r"\s+")


def _norm_string(value: str) -> str:
    return _WS.sub(" ", value.strip())


def _coerce_number(value: Any) -> float | None:
    if isinstance(value, bool):
        return None
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value.strip())
        except ValueError:
            return None
    return None


def _coerce_list(value: Any) -> list | None:
    if isinstance(value, list):
        return value
    if isinstance(value, tuple):
        return list(value)
    if isinstance(value, str):
        try:
            parsed = json.loads(value)
        except json.JSONDecodeError:
            return None
        return parsed if isinstance(parsed, list) else None
    return None


def grade_answer(
    raw: Any,
    truth: Any,
    tolerance: float,
    output_type: str,
    order_insensitive: bool = False,
) -> tuple[bool, str | None]:
    """Grade one answer; returns (correct, reason-when-incorrect)."""
    if output_type == "number":
        value = _coerce_number(raw)
        if value is None:
            return False, f"type-mismatch: {raw!r} is not a number"
        return (abs(value - float(truth)) <= tolerance,
                None if abs(value - float(truth)) <= tolerance
                else f"|{value} - {truth}| > {tolerance}")
    if output_type == "string":
        if not isinstance(raw, str):
            return False, f"type-mismatch: {raw!r} is not a string"
        ok = _norm_string(raw) == _norm_string(truth)
        return ok, None if ok else "string mismatch"
    if output_type in ("list-of-numbers", "list-of-strings"):
        values = _coerce_list(raw)
        if values is None:
            return False, f"type-mismatch: {raw!r} is not a list"
        truths = list(truth)
        if len(values) != len(truths):
            return False, f"length mismatch: {len(values)} != {len(truths)}"
        elementwise = (
            _number_matcher(tolerance) if output_type == "list-of-numbers"
            else _string_matcher()
        )
        if order_insensitive:
            remaining = list(values)
            for want in truths:
                for i, got in enumerate(remaining):
                    if elementwise(got, want):
                        remaining.pop(i)
                        break
                else:
                    return False, f"no element matches {want!r}"
            return True, None
        for got, want in zip(values, truths):
            if not elementwise(got, want):
                return False, f"element {got!r} != {want!r}"
        return True, None
    return False, f"unknown output_type {output_type!r}"


def _number_matcher(tolerance: float):
    def match(got: Any, want: Any) -> bool:
        value = _coerce_number(got)
        return value is not None and abs(value - float(want)) <= tolerance
    return match


def _string_matcher():
    def match(got: Any, want: Any) -> bool:
        return isinstance(got, str) and _norm_string(got) == _norm_string(want)
    return match


def compare_answer(
    raw: Any,
    truth: Any,
    tolerance: float,
    output_type: str,
    order_insensitive: bool = False,
) -> bool:
    correct, _ = grade_answer(raw, truth, tolerance, output_type,
                              order_insensitive)
    return correct
