"""Hierarchical execution tracing.

A tracer maintains the current span through a contextvar, so nested
``with tracer.span(...)`` blocks form a tree rooted at the turn span.
Worker threads (the debug fan-out) attach to an explicit parent instead.
Tool invocations recorded through the bus hook become tool-call spans with
their inputs, outputs and execution times.
"""

from __future__ import annotations

import contextlib
import contextvars
import uuid
from typing import Iterator

from ..clockutil import Clock, iso
from ..toolbus.registry import AgentRole, ToolInvocation, ToolResult
from .store import SessionStore, TraceSpan

_current_span: contextvars.ContextVar[str | None] = contextvars.ContextVar(
    "solverkit_current_span", default=None)
_current_turn: contextvars.ContextVar[str | None] = contextvars.ContextVar(
    "solverkit_current_turn", default=None)


class Tracer:
    def __init__(self, store: SessionStore, clock: Clock | None = None):
        self.store = store
        self.clock = clock or Clock()

    @staticmethod
    def _new_id() -> str:
        return "sp-" + uuid.uuid4().hex[:10]

    def current_span_id(self) -> str | None:
        return _current_span.get()

    def current_turn_id(self) -> str | None:
        return _current_turn.get()

    @contextlib.contextmanager
    def turn(self, turn_id: str, name: str, inputs: dict | None = None) -> Iterator[TraceSpan]:
        span = TraceSpan(
            span_id=self._new_id(), kind="turn", name=name, turn_id=turn_id,
            inputs=inputs or {}, started_at=iso(self.clock.now()),
        )
        self.store.open_span(span)
        turn_token = _current_turn.set(turn_id)
        span_token = _current_span.set(span.span_id)
        start = self.clock.monotonic()
        try:
            yield span
            span.status = "ok"
        except BaseException:
            span.status = "error"
            raise
        finally:
            span.elapsed_ms = max(0, int((self.clock.monotonic() - start) * 1000))
            self.store.close_span(span)
            _current_span.reset(span_token)
            _current_turn.reset(turn_token)

    @contextlib.contextmanager
    def span(
        self,
        kind: str,
        name: str,
        inputs: dict | None = None,
        parent: str | None = None,
        turn_id: str | None = None,
    ) -> Iterator[TraceSpan]:
        span = TraceSpan(
            span_id=self._new_id(),
            kind=kind,
            name=name,
            turn_id=turn_id or _current_turn.get(),
            parent=parent or _current_span.get(),
            inputs=inputs or {},
            started_at=iso(self.clock.now()),
        )
        self.store.open_span(span)
        token = _current_span.set(span.span_id)
        start = self.clock.monotonic()
        try:
            yield span
            if span.status == "running":
                span.status = "ok"
        except BaseException:
            span.status = "error"
            raise
        finally:
            span.elapsed_ms = max(0, int((self.clock.monotonic() - start) * 1000))
            self.store.close_span(span)
            _current_span.reset(token)

    def attach(self, parent_span_id: str | None, turn_id: str | None):
        """Bind the calling thread's context to an explicit parent span.

        Worker-thread setup only (pool threads re-attach per task); scoped
        callers should use attached() so the context is restored.
        """
        _current_span.set(parent_span_id)
        _current_turn.set(turn_id)

    @contextlib.contextmanager
    def attached(self, parent_span_id: str | None, turn_id: str | None):
        span_token = _current_span.set(parent_span_id)
        turn_token = _current_turn.set(turn_id)
        try:
            yield
        finally:
            _current_span.reset(span_token)
            _current_turn.reset(turn_token)

    def record_tool_call(self, invocation: ToolInvocation,
                         result: ToolResult) -> None:
        span = TraceSpan(
            span_id=self._new_id(),
            kind="tool-call",
            name=invocation.tool_name,
            turn_id=_current_turn.get(),
            parent=_current_span.get(),
            inputs={"arguments": invocation.arguments,
                    "caller": invocation.caller.value},
            outputs=result.to_doc(),
            started_at=iso(self.clock.now()),
            elapsed_ms=result.elapsed_ms,
            status="ok" if result.ok else "error",
        )
        self.store.record_span(span)

    def recorder(self):
        """Bus-compatible invocation recorder callable."""
        def record(invocation: ToolInvocation, result: ToolResult) -> None:
            if _current_turn.get() is None:
                return  # outside any traced turn (e.g. CLI one-offs)
            self.record_tool_call(invocation, result)
        return record


class TracedInvoker:
    """Records a tool-call span for every invocation, regardless of whether
    the underlying binding is in-process or a wire client (wire servers
    cannot see the caller's turn context)."""

    def __init__(self, inner, tracer: Tracer):
        self.inner = inner
        self.tracer = tracer

    def list_tools(self) -> list[dict]:
        return self.inner.list_tools()

    def call(self, tool_name: str, arguments: dict, caller=None,
             timeout_s: float | None = None):
        kwargs = {}
        if caller is not None:
            kwargs["caller"] = caller
        if timeout_s is not None:
            kwargs["timeout_s"] = timeout_s
        result = self.inner.call(tool_name, arguments, **kwargs)
        if _current_turn.get() is not None:
            invocation = ToolInvocation(
                tool_name=tool_name,
                arguments=arguments,
                caller=caller or AgentRole.EXTERNAL,
                invocation_id=result.invocation_id,
            )
            self.tracer.record_tool_call(invocation, result)
        return result


class NullTracer(Tracer):
    """Tracer that records nothing; useful for bare tool invocations."""

    def __init__(self):  # noqa: D401 - no store on purpose
        self.store = None
        self.clock = Clock()

    @contextlib.contextmanager
    def turn(self, turn_id: str, name: str, inputs: dict | None = None):
        yield TraceSpan(span_id="null", kind="turn", name=name)

    @contextlib.contextmanager
    def span(self, kind: str, name: str, inputs: dict | None = None,
             parent: str | None = None, turn_id: str | None = None):
        yield TraceSpan(span_id="null", kind=kind, name=name)

    def record_tool_call(self, invocation, result) -> None:
        pass

    def recorder(self):
        return lambda invocation, result: None
