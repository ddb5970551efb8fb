"""Tool registry and invocation layer.

Every tool speaks the same envelope whether it is called in-process or over
the wire: a ToolInvocation goes in, a ToolResult comes out. The bus never
lets a handler exception escape; failures map to status="error" envelopes.
"""

from __future__ import annotations

import concurrent.futures
import json
import logging
import threading
import time
import uuid
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable

from ..errors import (
    DuplicateNameError,
    SchemaViolationError,
    SolverkitError,
    UnknownToolError,
)
from . import schema as schemadoc

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT_S = 600.0

# The sixteen built-in tool names the assembled default registry must expose.
BUILTIN_TOOL_NAMES = (
    "save_to_memory",
    "search_memory",
    "tavily-search",
    "extract_code_from_url",
    "retrieve_extracted_code",
    "check_installed_packages",
    "check_package_version",
    "install_dependencies",
    "execute_code",
    "quick_introspect",
    "runtime_probe_snippet",
    "parse_local_package",
    "query_knowledge_graph",
    "execute_shell_command",
    "create_and_execute_script",
    "read_file",
)


class ServerKind(str, Enum):
    MEMORY = "memory"
    RESEARCH = "research"
    WORKSPACE = "workspace"
    SEARCH = "search"


class AgentRole(str, Enum):
    ORCHESTRATOR = "orchestrator"
    RESEARCHER = "researcher"
    CODE_AGENT = "code-agent"
    DEBUGGER = "debugger"
    OUTPUT_PROCESSOR = "output-processor"
    EXTERNAL = "external"  # CLI / API callers


@dataclass(frozen=True)
class ToolDescriptor:
    name: str
    description: str
    input_schema: dict
    server: ServerKind

    def to_doc(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "input_schema": self.input_schema,
            "server": self.server.value,
        }


@dataclass
class ToolInvocation:
    tool_name: str
    arguments: dict
    caller: AgentRole = AgentRole.EXTERNAL
    invocation_id: str = field(default_factory=lambda: uuid.uuid4().hex)

    def to_doc(self) -> dict:
        return {
            "tool_name": self.tool_name,
            "arguments": self.arguments,
            "caller": self.caller.value,
            "invocation_id": self.invocation_id,
        }


@dataclass
class ToolResult:
    invocation_id: str
    status: str  # "ok" | "error"
    payload: Any = None
    error_kind: str | None = None
    error_message: str | None = None
    elapsed_ms: int = 0

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_doc(self) -> dict:
        doc: dict[str, Any] = {
            "invocation_id": self.invocation_id,
            "status": self.status,
            "elapsed_ms": self.elapsed_ms,
        }
        if self.status == "ok":
            doc["payload"] = self.payload
        else:
            doc["error_kind"] = self.error_kind
            doc["error_message"] = self.error_message
        return doc

    @classmethod
    def from_doc(cls, doc: dict) -> "ToolResult":
        return cls(
            invocation_id=doc["invocation_id"],
            status=doc["status"],
            payload=doc.get("payload"),
            error_kind=doc.get("error_kind"),
            error_message=doc.get("error_message"),
            elapsed_ms=doc.get("elapsed_ms", 0),
        )


ToolHandler = Callable[[dict], Any]
InvocationRecorder = Callable[[ToolInvocation, ToolResult], None]


class ToolRegistry:
    """Name-unique tool registry, immutable once frozen."""

    def __init__(self):
        self._tools: dict[str, tuple[ToolDescriptor, ToolHandler]] = {}
        self._frozen = False
        self._lock = threading.Lock()

    def register(self, descriptor: ToolDescriptor, handler: ToolHandler) -> None:
        with self._lock:
            if self._frozen:
                raise SolverkitError("registry is frozen")
            if descriptor.name in self._tools:
                raise DuplicateNameError(
                    f"tool {descriptor.name!r} already registered"
                )
            self._tools[descriptor.name] = (descriptor, handler)

    def freeze(self) -> "ToolRegistry":
        self._frozen = True
        return self

    def list_tools(self) -> list[ToolDescriptor]:
        return [d for d, _ in self._tools.values()]

    def names(self) -> list[str]:
        return list(self._tools.keys())

    def get(self, name: str) -> tuple[ToolDescriptor, ToolHandler]:
        try:
            return self._tools[name]
        except KeyError:
            raise UnknownToolError(f"no tool named {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._tools

    def __len__(self) -> int:
        return len(self._tools)

    def descriptors_doc(self) -> list[dict]:
        return [d.to_doc() for d in self.list_tools()]


def _json_roundtrip(payload: Any) -> Any:
    # Normalizes tuples/sets and non-str keys so direct payloads are
    # structurally identical to what the wire path produces.
    return json.loads(json.dumps(payload, default=_json_default))


def _json_default(value: Any):
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    if hasattr(value, "to_doc"):
        return value.to_doc()
    return str(value)


def invoke_tool(
    registry: ToolRegistry,
    invocation: ToolInvocation,
    timeout_s: float | None = None,
    recorder: InvocationRecorder | None = None,
) -> ToolResult:
    """Dispatch one invocation; never raises past the envelope."""
    started = time.monotonic()

    def finish(result: ToolResult) -> ToolResult:
        result.elapsed_ms = max(0, int((time.monotonic() - started) * 1000))
        if recorder is not None:
            try:
                recorder(invocation, result)
            except Exception:  # recorder must never break the bus
                logger.exception("invocation recorder failed")
        return result

    try:
        descriptor, handler = registry.get(invocation.tool_name)
    except UnknownToolError as exc:
        return finish(
            ToolResult(invocation.invocation_id, "error", error_kind=exc.kind,
                       error_message=exc.message)
        )
    try:
        schemadoc.validate(invocation.arguments, descriptor.input_schema)
    except SchemaViolationError as exc:
        return finish(
            ToolResult(invocation.invocation_id, "error", error_kind=exc.kind,
                       error_message=exc.message)
        )

    timeout = DEFAULT_TIMEOUT_S if timeout_s is None else timeout_s
    try:
        with concurrent.futures.ThreadPoolExecutor(max_workers=1) as pool:
            future = pool.submit(handler, invocation.arguments)
            try:
                payload = future.result(timeout=timeout)
            except concurrent.futures.TimeoutError:
                future.cancel()
                return finish(
                    ToolResult(invocation.invocation_id, "error",
                               error_kind="timeout",
                               error_message=f"tool exceeded {timeout:g}s")
                )
    except SolverkitError as exc:
        return finish(
            ToolResult(invocation.invocation_id, "error", error_kind=exc.kind,
                       error_message=exc.message)
        )
    except BaseException as exc:  # bus totality: wrap handler panics
        logger.debug("handler failure in %s", invocation.tool_name, exc_info=True)
        return finish(
            ToolResult(invocation.invocation_id, "error",
                       error_kind="handler-failure",
                       error_message=f"{type(exc).__name__}: {exc}")
        )
    if isinstance(payload, SolverkitError):  # handlers may return typed errors
        return finish(
            ToolResult(invocation.invocation_id, "error",
                       error_kind=payload.kind, error_message=payload.message)
        )
    return finish(
        ToolResult(invocation.invocation_id, "ok", payload=_json_roundtrip(payload))
    )


class DirectInvoker:
    """In-process binding with wire-identical payload semantics."""

    def __init__(
        self,
        registry: ToolRegistry,
        timeout_s: float | None = None,
        recorder: InvocationRecorder | None = None,
    ):
        self.registry = registry
        self.timeout_s = timeout_s
        self.recorder = recorder

    def list_tools(self) -> list[dict]:
        return self.registry.descriptors_doc()

    def call(
        self,
        tool_name: str,
        arguments: dict,
        caller: AgentRole = AgentRole.EXTERNAL,
        timeout_s: float | None = None,
    ) -> ToolResult:
        invocation = ToolInvocation(tool_name=tool_name, arguments=arguments,
                                    caller=caller)
        return invoke_tool(
            self.registry,
            invocation,
            timeout_s=timeout_s if timeout_s is not None else self.timeout_s,
            recorder=self.recorder,
        )


def bind_direct(
    registry: ToolRegistry,
    timeout_s: float | None = None,
    recorder: InvocationRecorder | None = None,
) -> DirectInvoker:
    return DirectInvoker(registry, timeout_s=timeout_s, recorder=recorder)
