"""Model-backed memory distillation.

Two fixed prompt templates drive the distiller: one extracts durable facts
for the vector side, one extracts entity relationships for the graph side.
The model replies with a JSON document of operations; anything unparseable
degrades to a no-op (the verbatim path has already preserved the content).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from ..errors import ModelUnavailableError, SolverkitError
from ..models.gateway import ModelGateway
from ..prompts import load_prompt

logger = logging.getLogger(__name__)

# scripted scenarios address distillation steps through this role
DISTILLER_ROLE = "memory-distiller"

_OPS_SCHEMA = {
    "type": "object",
    "properties": {
        "memory_ops": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "action": {"type": "string",
                               "enum": ["add", "update", "delete"]},
                    "text": {"type": "string"},
                    "record_id": {"type": "string"},
                },
                "required": ["action"],
            },
        },
        "edges": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "subject": {"type": "string"},
                    "relation": {"type": "string"},
                    "object": {"type": "string"},
                },
                "required": ["subject", "object"],
            },
        },
    },
    "required": ["memory_ops", "edges"],
}


@dataclass
class DistillOp:
    action: str  # add | update | delete
    text: str = ""
    record_id: str | None = None


@dataclass
class DistillOutcome:
    ops: list[DistillOp] = field(default_factory=list)
    edges: list[dict] = field(default_factory=list)


def model_distiller(gateway: ModelGateway):
    """Build a distiller callable backed by the model gateway."""
    facts_prompt = load_prompt("memory_facts")
    entities_prompt = load_prompt("memory_entities")

    def distill(user_id: str, content: str) -> DistillOutcome:
        messages = [
            {"role": "system",
             "content": facts_prompt + "\n\n" + entities_prompt},
            {"role": "user", "content": content},
        ]
        try:
            output = gateway.complete(messages, response_schema=_OPS_SCHEMA,
                                      role=DISTILLER_ROLE)
        except SolverkitError as exc:
            raise ModelUnavailableError(
                f"distillation model unavailable: {exc.message}") from exc
        doc = output.structured or {}
        ops = [
            DistillOp(action=o["action"], text=o.get("text", ""),
                      record_id=o.get("record_id"))
            for o in doc.get("memory_ops", [])
        ]
        return DistillOutcome(ops=ops, edges=list(doc.get("edges", [])))

    return distill
