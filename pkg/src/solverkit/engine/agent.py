"""The agent loop shared by every pipeline role.

One loop iteration is a model call; the model either requests tool calls
(which are dispatched through the bus, with results appended back as tool
messages) or returns its final structured reply. Tools not offered to the
role, and calls beyond a per-run invocation budget (the "execute exactly
once" contract), come back as error envelopes instead of executing, so a
misbehaving model can self-correct without breaking the phase.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Any

from ..errors import WorkflowFailureError
from ..models.gateway import ModelGateway
from ..toolbus.registry import AgentRole, ToolResult
from .events import EventEmitter, NullEmitter

logger = logging.getLogger(__name__)


@dataclass
class AgentRun:
    structured: Any
    tool_calls: list[tuple[str, dict, ToolResult]] = field(default_factory=list)
    model_calls: int = 0

    def last_result(self, tool_name: str) -> ToolResult | None:
        for name, _, result in reversed(self.tool_calls):
            if name == tool_name:
                return result
        return None

    def count(self, tool_name: str) -> int:
        return sum(1 for name, _, _ in self.tool_calls if name == tool_name)


def run_agent(
    runtime,
    role: AgentRole,
    system_prompt: str,
    user_content: str,
    response_schema: dict | None,
    budgets: dict[str, int] | None = None,
    span_name: str | None = None,
    script_role: str | None = None,
) -> AgentRun:
    """Drive one agent to its structured reply. Raises WorkflowFailureError
    when the model output cannot be parsed or the step limit is hit."""
    config = runtime.config
    gateway: ModelGateway = runtime.gateway
    emitter: EventEmitter = getattr(runtime, "emitter", None) or NullEmitter()
    offered = config.toolset(role)
    descriptor_docs = [d for d in runtime.invoker.list_tools()
                       if d["name"] in offered]
    remaining = dict(budgets or {})
    run = AgentRun(structured=None)
    messages = [
        {"role": "system", "content": system_prompt},
        {"role": "user", "content": user_content},
    ]
    for _ in range(config.max_agent_steps):
        with runtime.tracer.span("model-call", span_name or role.value,
                                 inputs={"messages": len(messages)}) as span:
            output = gateway.complete(
                messages,
                response_schema=response_schema,
                tools=descriptor_docs or None,
                role=script_role or role,
            )
            span.outputs = {"finish": output.finish, "retries": output.retries}
        run.model_calls += 1
        if output.finish == "tool-call":
            for invocation in output.tool_calls:
                name = invocation.tool_name
                emitter.emit("tool-call", {"tool": name, "role": role.value})
                if name not in offered:
                    result = ToolResult(
                        invocation.invocation_id, "error",
                        error_kind="unknown-tool",
                        error_message=f"{name} is not available to {role.value}",
                    )
                elif remaining.get(name, None) == 0:
                    result = ToolResult(
                        invocation.invocation_id, "error",
                        error_kind="budget-exhausted",
                        error_message=f"{name} budget for this phase is used up",
                    )
                else:
                    if name in remaining:
                        remaining[name] -= 1
                    result = runtime.invoker.call(
                        name, invocation.arguments, caller=role)
                run.tool_calls.append((name, invocation.arguments, result))
                emitter.emit("tool-result",
                             {"tool": name, "status": result.status})
                messages.append({
                    "role": "tool",
                    "name": name,
                    "content": json.dumps(result.to_doc()),
                })
            continue
        if response_schema is not None:
            run.structured = output.structured
        else:
            run.structured = output.text
        return run
    raise WorkflowFailureError(
        f"{role.value} agent did not finish within "
        f"{config.max_agent_steps} steps")
