"""Tool descriptors and handlers for the memory server."""

from __future__ import annotations

from ..toolbus.registry import ServerKind, ToolDescriptor, ToolHandler, ToolRegistry
from .store import MemoryStore


def memory_tools(store: MemoryStore) -> list[tuple[ToolDescriptor, ToolHandler]]:
    def _save(args: dict) -> dict:
        return store.save(args["user_id"], args["content"],
                          source_session=args.get("source_session"))

    def _search(args: dict) -> dict:
        return store.search(args["user_id"], args["query"],
                            limit=args.get("limit", 5))

    return [
        (
            ToolDescriptor(
                name="save_to_memory",
                description="Persist content to the user's memory: distilled "
                            "facts and entity edges via the model, plus an "
                            "unconditional verbatim copy.",
                input_schema={
                    "type": "object",
                    "properties": {
                        "user_id": {"type": "string"},
                        "content": {"type": "string"},
                        "source_session": {"type": "string"},
                    },
                    "required": ["user_id", "content"],
                },
                server=ServerKind.MEMORY,
            ),
            _save,
        ),
        (
            ToolDescriptor(
                name="search_memory",
                description="Retrieve the user's memories: semantic matches "
                            "from the vector side plus entity edges touching "
                            "the query.",
                input_schema={
                    "type": "object",
                    "properties": {
                        "user_id": {"type": "string"},
                        "query": {"type": "string"},
                        "limit": {"type": "integer"},
                    },
                    "required": ["user_id", "query"],
                },
                server=ServerKind.MEMORY,
            ),
            _search,
        ),
    ]


def register_memory_tools(registry: ToolRegistry, store: MemoryStore) -> None:
    for descriptor, handler in memory_tools(store):
        registry.register(descriptor, handler)
