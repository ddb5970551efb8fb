"""Injectable time source.

Stores and the workspace stamp filenames and records with clock values, so
tests (and the wire/direct parity fixtures) can pin time to get
byte-identical artifacts across runs.
"""

from __future__ import annotations

import itertools
import threading
import time
from datetime import datetime, timedelta, timezone


class Clock:
    def now(self) -> datetime:
        return datetime.now(timezone.utc)

    def monotonic(self) -> float:
        return time.monotonic()


class FixedClock(Clock):
    """Starts at a fixed instant and advances by ``step`` per now() call."""

    def __init__(self, start: datetime | None = None, step_ms: float = 1.0):
        self._start = start or datetime(2024, 1, 1, tzinfo=timezone.utc)
        self._step = timedelta(milliseconds=step_ms)
        self._ticks = itertools.count()
        self._mono = itertools.count()
        self._lock = threading.Lock()

    def now(self) -> datetime:
        with self._lock:
            return self._start + self._step * next(self._ticks)

    def monotonic(self) -> float:
        with self._lock:
            return next(self._mono) * 0.001


def utc_stamp(dt: datetime) -> str:
    """Sortable filesystem-safe UTC timestamp (microsecond resolution)."""
    return dt.strftime("%Y%m%dT%H%M%S%fZ")


def iso(dt: datetime) -> str:
    return dt.isoformat()
