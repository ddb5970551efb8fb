"""Deterministic scripted model backend.

A script asset is a YAML (or JSON) document with a ``steps`` list; each step
is consumed in order *per agent role*. Steps either reply with text, request
a tool call, or raise a fault (for failure-injection tests):

    steps:
      - role: researcher
        match: "crystal"          # optional: prompt must contain this
        reply: '{"code": "..."}'
      - role: code-agent
        tool: execute_code
        args: {source: "print(1)"}
      - role: debugger-1
        raise: "poisoned"

Debug fan-out agents consume their own role streams (``debugger-0``,
``debugger-1``, ...) so concurrent scenarios stay deterministic.
Consumption is observable through ``consumed`` / ``remaining`` so scenario
tests can assert every step was used.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from ..errors import MalformedScriptError, ScriptExhaustedError


@dataclass
class ScriptStep:
    role_filter: str
    reply: str | None = None
    tool: str | None = None
    args: dict = field(default_factory=dict)
    fault: str | None = None
    match: str | None = None
    index: int = 0

    def describe(self) -> str:
        what = (
            f"tool {self.tool}" if self.tool
            else "fault" if self.fault
            else "reply"
        )
        clause = f" match={self.match!r}" if self.match else ""
        return f"step #{self.index} role={self.role_filter} {what}{clause}"


class ScriptedFault(RuntimeError):
    """Raised when a script step is a deliberate fault injection."""


def _parse_step(raw: Any, index: int) -> ScriptStep:
    if not isinstance(raw, dict) or "role" not in raw:
        raise MalformedScriptError(f"step #{index} must be a mapping with a role")
    kinds = [k for k in ("reply", "tool", "raise") if k in raw]
    if len(kinds) != 1:
        raise MalformedScriptError(
            f"step #{index} needs exactly one of reply/tool/raise, got {kinds}"
        )
    reply = raw.get("reply")
    if reply is not None and not isinstance(reply, str):
        # allow structured replies authored as YAML mappings
        reply = json.dumps(reply)
    return ScriptStep(
        role_filter=str(raw["role"]),
        reply=reply,
        tool=raw.get("tool"),
        args=raw.get("args") or {},
        fault=raw.get("raise"),
        match=raw.get("match"),
        index=index,
    )


class ScriptedBackend:
    """Replays scripted steps deterministically, serialized per handle."""

    def __init__(self, steps: list[ScriptStep]):
        self.steps = steps
        self._cursor: dict[str, int] = {}
        self._consumed: list[ScriptStep] = []
        self._lock = threading.Lock()

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedBackend":
        text = Path(path).read_text(encoding="utf-8")
        return cls.from_text(text)

    @classmethod
    def from_text(cls, text: str) -> "ScriptedBackend":
        try:
            doc = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise MalformedScriptError(f"unparseable script: {exc}") from exc
        if not isinstance(doc, dict) or not isinstance(doc.get("steps"), list):
            raise MalformedScriptError("script must be a mapping with a steps list")
        steps = [_parse_step(raw, i) for i, raw in enumerate(doc["steps"])]
        return cls(steps)

    def next_step(self, role: str, prompt_text: str) -> ScriptStep:
        """Consume the next step for ``role``.

        Raises ScriptExhaustedError when no steps remain for the role or the
        next step's match clause is not satisfied by the prompt.
        """
        with self._lock:
            per_role = [s for s in self.steps if s.role_filter == role]
            cursor = self._cursor.get(role, 0)
            if cursor >= len(per_role):
                raise ScriptExhaustedError(
                    f"no scripted steps left for role {role!r}"
                )
            step = per_role[cursor]
            if step.match and step.match not in prompt_text:
                raise ScriptExhaustedError(
                    f"unmatched {step.describe()}: prompt does not contain "
                    f"{step.match!r}"
                )
            self._cursor[role] = cursor + 1
            self._consumed.append(step)
            if step.fault is not None:
                raise ScriptedFault(step.fault)
            return step

    @property
    def consumed(self) -> list[ScriptStep]:
        with self._lock:
            return list(self._consumed)

    def remaining(self, role: str | None = None) -> int:
        with self._lock:
            if role is None:
                return len(self.steps) - len(self._consumed)
            per_role = [s for s in self.steps if s.role_filter == role]
            return len(per_role) - self._cursor.get(role, 0)


def load_script(path: str | Path) -> ScriptedBackend:
    return ScriptedBackend.from_file(path)
