"""The orchestrator turn loop, quick solution path and feedback cycle.

A turn runs as: memory retrieval (when enabled) -> routing decision ->
clarification, quick path, or the deep pipeline. The quick path writes and
runs code once; failure escalates to the deep pipeline within the same
turn. Feedback closes the loop: satisfaction preserves the solution to
memory, an improvement request seeds another deep round with the critique.
"""

from __future__ import annotations

import json
import logging
import uuid
from dataclasses import dataclass

from ..errors import PreconditionError, SolverkitError
from ..prompts import load_prompt
from ..sessions.store import Session, Turn
from ..toolbus.registry import AgentRole
from . import answers
from .agent import run_agent
from .deepsolver import run_deep_solver
from .outputs import (
    DECISION_SCHEMA,
    SIMPLE_SCHEMA,
    FinalOutput,
    OrchestratorDecision,
)

logger = logging.getLogger(__name__)

FEEDBACK_ACTIONS = ("satisfied", "improve", "continue", "terminate")


@dataclass
class EscalationSignal:
    failed_code: str
    execution_output: dict
    reason: str


def _search_memory(runtime, user_id: str, query: str) -> list[dict]:
    result = runtime.invoker.call(
        "search_memory",
        {"user_id": user_id, "query": query, "limit": 5},
        caller=AgentRole.ORCHESTRATOR,
    )
    if not result.ok:
        return []
    hits = result.payload.get("semantic", [])
    threshold = runtime.config.simple_memory_threshold
    for hit in hits:
        hit["high_confidence"] = hit.get("score", 0.0) >= threshold
    return hits


def _decide(runtime, user_message: str, memory_hits: list[dict]) -> OrchestratorDecision:
    prompt = load_prompt("orchestrator")
    hits_text = json.dumps(
        [{k: h.get(k) for k in ("text", "score", "high_confidence")}
         for h in memory_hits]
    )
    with runtime.tracer.span("model-call", "orchestrator-decision") as span:
        output = runtime.gateway.complete(
            [
                {"role": "system", "content": prompt},
                {"role": "user",
                 "content": f"memory hits: {hits_text}\n\nuser message: {user_message}"},
            ],
            response_schema=DECISION_SCHEMA,
            role=AgentRole.ORCHESTRATOR,
        )
        doc = output.structured
        span.outputs = {"route": doc.get("route")}
    return OrchestratorDecision(
        route=doc["route"],
        rationale=doc.get("rationale", ""),
        memory_hits_used=[h.get("record_id") for h in memory_hits
                          if h.get("high_confidence")],
        question=doc.get("question"),
    )


def run_simple_solver(runtime, query: str, memory_hits: list[dict],
                      user_id: str) -> FinalOutput | EscalationSignal:
    """Quick path: write, install, execute once; escalate on failure."""
    with runtime.tracer.span("agent-phase", "simple",
                             inputs={"query": query}) as span:
        runtime.emitter.emit("phase-started", {"phase": "simple"})
        hits_text = json.dumps([h.get("text") for h in memory_hits])
        run = run_agent(
            runtime,
            AgentRole.ORCHESTRATOR,
            load_prompt("simple_solver"),
            f"user_id: {user_id}\nmemory matches: {hits_text}\nquery: {query}",
            SIMPLE_SCHEMA,
            budgets={"execute_code": 1},
        )
        doc = run.structured
        last_exec = run.last_result("execute_code")
        streams = (last_exec.payload if last_exec is not None and last_exec.ok
                   else {}) or {}
        code = ""
        for name, arguments, _ in run.tool_calls:
            if name == "execute_code":
                code = arguments.get("source", "")
        if doc.get("escalate"):
            span.outputs = {"escalated": True}
            return EscalationSignal(
                failed_code=code,
                execution_output=streams,
                reason=doc.get("reason", "quick path failed"),
            )
        answer = doc.get("answer")
        if answer is None and streams.get("stdout"):
            answer = answers.extract_answer(streams["stdout"])
        span.outputs = {"escalated": False}
        return FinalOutput(
            original_query=query,
            success=True,
            final_code=code,
            execution_results=streams,
            processed_output={"answer": answer,
                              "analysis": doc.get("analysis", "")},
        )


def orchestrate_turn(runtime, session: Session, user_message: str):
    """Run one conversational turn; returns (decision, payload).

    The payload is a clarification question (route=clarify) or the
    FinalOutput of whichever solver handled the request. The turn, its
    decision and its trace are persisted on the session before returning.
    """
    if session.closed:
        raise PreconditionError("session is closed")
    turn_id = "t-" + uuid.uuid4().hex[:10]
    turn = Turn(turn_id=turn_id, user_message=user_message)
    store = runtime.sessions
    with runtime.tracer.turn(turn_id, "turn",
                             {"user_message": user_message}) as root:
        turn.trace_root = root.span_id
        memory_hits: list[dict] = []
        if runtime.config.memory_enabled and runtime.memory is not None:
            memory_hits = _search_memory(runtime, session.user_id, user_message)
        try:
            decision = _decide(runtime, user_message, memory_hits)
        except SolverkitError as exc:
            turn.decision = {"route": "failed", "rationale": exc.message}
            turn.outputs = {"finals": [], "failed": True, "error": exc.kind}
            if store is not None:
                store.append_turn(session, turn)
            runtime.emitter.emit("error", {"kind": exc.kind,
                                           "message": exc.message})
            return OrchestratorDecision(route="failed",
                                        rationale=exc.message), None
        turn.decision = decision.to_doc()

        payload: FinalOutput | str | None
        if decision.route == "clarify":
            payload = decision.question or "Could you clarify the request?"
            runtime.emitter.emit("clarification", {"question": payload})
            turn.outputs = {"finals": [], "clarification": payload}
        else:
            final: FinalOutput
            if decision.route == "simple":
                outcome = run_simple_solver(runtime, user_message,
                                            memory_hits, session.user_id)
                if isinstance(outcome, EscalationSignal):
                    runtime.emitter.emit(
                        "phase-started",
                        {"phase": "escalate", "reason": outcome.reason})
                    final = run_deep_solver(runtime, user_message,
                                            user_id=session.user_id)
                else:
                    final = outcome
                    runtime.emitter.emit("final", final.to_doc())
            else:
                final = run_deep_solver(runtime, user_message,
                                        user_id=session.user_id)
            payload = final
            turn.outputs = {"finals": [final.to_doc()]}
    if store is not None:
        store.append_turn(session, turn)
    return decision, payload


def apply_feedback(runtime, session: Session, action: str,
                   critique: str = "") -> dict:
    """Apply user feedback to the session's latest completed turn."""
    if action not in FEEDBACK_ACTIONS:
        raise PreconditionError(f"action must be one of {FEEDBACK_ACTIONS}")
    completed = [t for t in session.turns
                 if t.outputs is not None and t.outputs.get("finals")]
    if not completed:
        raise PreconditionError("no completed turn to apply feedback to")
    turn = completed[-1]
    store = runtime.sessions
    effect: dict = {"action": action, "turn_id": turn.turn_id}

    if action == "satisfied":
        final = turn.outputs["finals"][-1]
        summary = (
            f"Task: {turn.user_message}\n"
            f"Solution code:\n{final.get('final_code', '')}\n"
            f"Answer: {json.dumps(final.get('processed_output', {}).get('answer'))}"
        )
        with runtime.tracer.attached(turn.trace_root, turn.turn_id):
            result = runtime.invoker.call(
                "save_to_memory",
                {"user_id": session.user_id, "content": summary,
                 "source_session": session.session_id},
                caller=AgentRole.ORCHESTRATOR,
            )
        effect["memory_saved"] = result.ok
        if result.ok:
            effect["verbatim_record_id"] = result.payload.get(
                "verbatim_record_id")
    elif action == "improve":
        with runtime.tracer.attached(turn.trace_root, turn.turn_id):
            with runtime.tracer.span("agent-phase", "improve-round",
                                     inputs={"critique": critique}):
                prior = turn.outputs["finals"][-1]
                seeded_query = (
                    f"{turn.user_message}\n\nPrevious attempt:\n"
                    f"{prior.get('final_code', '')}\n"
                    f"Critique: {critique or 'please improve the solution'}"
                )
                final = run_deep_solver(runtime, seeded_query,
                                        user_id=session.user_id)
        turn.outputs["finals"].append(final.to_doc())
        effect["new_output"] = final.to_doc()
    elif action == "terminate":
        effect["cycle_closed"] = True
    else:  # continue
        effect["awaiting_followup"] = True

    turn.feedback = action
    if store is not None:
        store.update_turn(turn)
    runtime.emitter.emit("feedback-effect", effect)
    return effect
