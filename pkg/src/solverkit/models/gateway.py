"""Uniform access to chat-completion and embedding backends.

Two backends: an OpenAI-compatible HTTP endpoint and the deterministic
scripted backend used throughout the test suite. Structured output is
enforced here: when a response schema is requested, the reply must contain
a parseable document matching it, otherwise the call is classified as a
workflow failure.
"""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import (
    PreconditionError,
    TransportFailureError,
    WorkflowFailureError,
)
from ..toolbus.registry import AgentRole, ToolInvocation
from . import embedder
from .scripted import ScriptedBackend, load_script

logger = logging.getLogger(__name__)

DEFAULT_RETRIES = 2


@dataclass
class ModelConfig:
    backend: str = "scripted"  # "http-openai-compatible" | "scripted"
    model_name: str = "scripted"
    reasoning_effort: str | None = "medium"
    verbosity: str | None = "low"
    temperature: float | None = None
    base_url: str | None = None
    api_key_env: str = "MODEL_API_KEY"
    script_path: str | None = None
    retries: int = DEFAULT_RETRIES
    embed_dim: int = embedder.DEFAULT_DIM

    def __post_init__(self):
        if self.backend == "scripted" and not self.script_path:
            # a backend handle may still be injected directly; enforced in
            # ModelGateway when neither is present
            pass

    @classmethod
    def from_doc(cls, doc: dict) -> "ModelConfig":
        return cls(**{k: v for k, v in doc.items() if k in cls.__dataclass_fields__})

    def to_doc(self) -> dict:
        return {
            "backend": self.backend,
            "model_name": self.model_name,
            "reasoning_effort": self.reasoning_effort,
            "verbosity": self.verbosity,
            "temperature": self.temperature,
            "base_url": self.base_url,
            "script_path": self.script_path,
            "retries": self.retries,
        }


@dataclass
class ModelOutput:
    text: str
    structured: Any = None
    tool_calls: list[ToolInvocation] = field(default_factory=list)
    finish: str = "stop"  # "stop" | "tool-call" | "length" | "error"
    retries: int = 0


def first_document(text: str) -> Any:
    """Parse the first balanced JSON document embedded in the text."""
    decoder = json.JSONDecoder()
    for i, ch in enumerate(text):
        if ch in "{[":
            try:
                doc, _ = decoder.raw_decode(text[i:])
                return doc
            except json.JSONDecodeError:
                continue
    raise WorkflowFailureError("no parseable document in model reply")


def _messages_text(messages: list[dict]) -> str:
    return "\n".join(str(m.get("content", "")) for m in messages)


class ModelGateway:
    """One configured backend; safe for concurrent http calls, scripted
    step consumption is serialized by the backend itself."""

    def __init__(self, config: ModelConfig,
                 scripted: ScriptedBackend | None = None):
        self.config = config
        if scripted is not None:
            self.scripted = scripted
        elif config.backend == "scripted" and config.script_path:
            self.scripted = load_script(config.script_path)
        else:
            # embeddings stay usable; completions need a script asset
            self.scripted = None

    # -- completions --------------------------------------------------------

    def complete(
        self,
        messages: list[dict],
        response_schema: dict | None = None,
        tools: list[dict] | None = None,
        role: AgentRole | str = AgentRole.ORCHESTRATOR,
    ) -> ModelOutput:
        if not messages:
            raise PreconditionError("messages must be non-empty")
        role_value = role.value if isinstance(role, AgentRole) else str(role)
        if self.config.backend == "scripted":
            out = self._complete_scripted(messages, role_value)
        else:
            out = self._complete_http(messages, response_schema, tools)
        if response_schema is not None and out.finish == "stop":
            out.structured = self._enforce_schema(out.text, response_schema)
        return out

    def _complete_scripted(self, messages: list[dict], role: str) -> ModelOutput:
        if self.scripted is None:
            raise PreconditionError("scripted backend requires a script asset")
        step = self.scripted.next_step(role, _messages_text(messages))
        if step.tool is not None:
            invocation = ToolInvocation(
                tool_name=step.tool,
                arguments=step.args,
                caller=AgentRole(role) if role in AgentRole._value2member_map_
                else AgentRole.EXTERNAL,
            )
            return ModelOutput(text="", tool_calls=[invocation], finish="tool-call")
        return ModelOutput(text=step.reply or "", finish="stop")

    def _complete_http(
        self,
        messages: list[dict],
        response_schema: dict | None,
        tools: list[dict] | None,
    ) -> ModelOutput:
        import httpx

        if not self.config.base_url:
            raise PreconditionError("http backend requires base_url")
        body: dict[str, Any] = {
            "model": self.config.model_name,
            "messages": messages,
        }
        if self.config.temperature is not None:
            body["temperature"] = self.config.temperature
        if self.config.reasoning_effort:
            body["reasoning_effort"] = self.config.reasoning_effort
        if self.config.verbosity:
            body["verbosity"] = self.config.verbosity
        if tools:
            body["tools"] = [
                {
                    "type": "function",
                    "function": {
                        "name": t["name"],
                        "description": t.get("description", ""),
                        "parameters": t.get("input_schema", {"type": "object"}),
                    },
                }
                for t in tools
            ]
        if response_schema is not None:
            body["response_format"] = {
                "type": "json_schema",
                "json_schema": {"name": "reply", "schema": response_schema},
            }
        headers = {}
        key = os.environ.get(self.config.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        url = self.config.base_url.rstrip("/") + "/chat/completions"
        last_exc: Exception | None = None
        for attempt in range(self.config.retries + 1):
            try:
                resp = httpx.post(url, json=body, headers=headers, timeout=600.0)
                if resp.status_code >= 500:
                    raise TransportFailureError(f"server error {resp.status_code}")
                resp.raise_for_status()
                return self._parse_http_reply(resp.json(), retries=attempt)
            except (httpx.TransportError, TransportFailureError) as exc:
                last_exc = exc
                if attempt < self.config.retries:
                    time.sleep(min(2.0 ** attempt, 8.0))
                    continue
            except httpx.HTTPStatusError as exc:
                raise TransportFailureError(str(exc)) from exc
        raise TransportFailureError(
            f"transport failed after {self.config.retries} retries: {last_exc}"
        )

    def _parse_http_reply(self, doc: dict, retries: int) -> ModelOutput:
        try:
            choice = doc["choices"][0]
            message = choice["message"]
        except (KeyError, IndexError) as exc:
            raise WorkflowFailureError(f"malformed completion reply: {exc}") from exc
        calls = []
        for raw in message.get("tool_calls") or []:
            fn = raw.get("function", {})
            try:
                arguments = json.loads(fn.get("arguments") or "{}")
            except json.JSONDecodeError as exc:
                raise WorkflowFailureError(
                    f"invalid tool-call arguments: {exc}"
                ) from exc
            calls.append(ToolInvocation(tool_name=fn.get("name", ""),
                                        arguments=arguments))
        finish = choice.get("finish_reason", "stop")
        finish = {"tool_calls": "tool-call", "length": "length"}.get(finish, "stop")
        if calls:
            finish = "tool-call"
        return ModelOutput(
            text=message.get("content") or "",
            tool_calls=calls,
            finish=finish,
            retries=retries,
        )

    @staticmethod
    def _enforce_schema(text: str, response_schema: dict) -> Any:
        from ..toolbus import schema as schemadoc

        doc = first_document(text)
        try:
            schemadoc.validate(doc, response_schema)
        except Exception as exc:
            raise WorkflowFailureError(f"structured reply invalid: {exc}") from exc
        return doc

    # -- embeddings ----------------------------------------------------------

    def embed(self, texts: list[str]) -> list[np.ndarray]:
        if not texts:
            raise PreconditionError("texts must be non-empty")
        # The deterministic hash embedder is the local default for both
        # backends; a remote embedding endpoint can replace it per deployment.
        return [embedder.hash_embed(t, self.config.embed_dim) for t in texts]


def complete(
    config: ModelConfig,
    messages: list[dict],
    response_schema: dict | None = None,
    tools: list[dict] | None = None,
    role: AgentRole | str = AgentRole.ORCHESTRATOR,
) -> ModelOutput:
    return ModelGateway(config).complete(messages, response_schema, tools, role)


def embed(config: ModelConfig, texts: list[str]) -> list[np.ndarray]:
    return ModelGateway(config).embed(texts)
