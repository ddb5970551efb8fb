from .store import Session, SessionStore, TraceSpan, Turn
from .tracing import NullTracer, Tracer

__all__ = ["Session", "SessionStore", "TraceSpan", "Turn", "NullTracer", "Tracer"]
