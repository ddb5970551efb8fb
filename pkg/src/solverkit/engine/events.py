"""Turn event stream plumbing (consumed by the session API and UI)."""

from __future__ import annotations

import threading
from typing import Callable

EVENT_TYPES = ("phase-started", "tool-call", "tool-result", "clarification",
               "final", "error", "feedback-effect")


class EventEmitter:
    """Ordered, thread-safe event sink with monotonically increasing ids."""

    def __init__(self, sink: Callable[[dict], None] | None = None):
        self._sink = sink
        self._events: list[dict] = []
        self._lock = threading.Lock()

    def emit(self, event_type: str, data: dict | None = None) -> dict:
        with self._lock:
            event = {"id": len(self._events), "event": event_type,
                     "data": data or {}}
            self._events.append(event)
        if self._sink is not None:
            self._sink(event)
        return event

    @property
    def events(self) -> list[dict]:
        with self._lock:
            return list(self._events)


class NullEmitter(EventEmitter):
    def emit(self, event_type: str, data: dict | None = None) -> dict:
        return {"event": event_type, "data": data or {}}
