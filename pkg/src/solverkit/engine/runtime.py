"""Wired runtime handed to the pipeline phases."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from ..models.gateway import ModelGateway
from ..sessions.tracing import NullTracer, Tracer
from .config import PipelineConfig
from .events import EventEmitter, NullEmitter


@dataclass
class Runtime:
    config: PipelineConfig
    gateway: ModelGateway
    invoker: Any  # DirectInvoker or WireClient
    tracer: Tracer = field(default_factory=NullTracer)
    emitter: EventEmitter = field(default_factory=NullEmitter)
    memory: Any = None  # MemoryStore when memory is enabled
    sessions: Any = None  # SessionStore for conversational turns
