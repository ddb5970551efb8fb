from .distill import DistillOp, DistillOutcome, model_distiller
from .store import EntityEdge, MemoryRecord, MemoryStore
from .tools import memory_tools, register_memory_tools

__all__ = [
    "DistillOp",
    "DistillOutcome",
    "model_distiller",
    "EntityEdge",
    "MemoryRecord",
    "MemoryStore",
    "memory_tools",
    "register_memory_tools",
]
