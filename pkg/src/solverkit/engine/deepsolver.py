"""The deep solving pipeline.

Four phases run in sequence: research produces an initial code solution;
the code agent executes it exactly once; when that run needs debugging,
a fan-out of debug agents works concurrently and independently; finally
the output selector scores candidates and formats the answer. The debug
phase exists only in configurations that keep self-reflection enabled.
"""

from __future__ import annotations

import json
import logging
import uuid
from concurrent.futures import ThreadPoolExecutor

from ..errors import SolverkitError, WorkflowFailureError
from ..prompts import load_prompt
from ..toolbus.registry import AgentRole
from . import answers
from .agent import AgentRun, run_agent
from .outputs import (
    DEBUG_SCHEMA,
    EXECUTION_SCHEMA,
    RESEARCH_SCHEMA,
    DebugOutput,
    ExecutionOutput,
    FinalOutput,
    ResearchOutput,
)

logger = logging.getLogger(__name__)

STRATEGY_HINTS = ("local", "exploratory", "research")

_HINT_GUIDANCE = {
    "local": "Favor local approaches first: direct fixes, static "
             "introspection, probe snippets and diagnostic code.",
    "exploratory": "Favor global exploration: package versions, parsing the "
                   "package into the knowledge graph and querying its "
                   "structure, and reading local sources.",
    "research": "Favor research: web search, extracting and retrieving code "
                "examples and documentation, then result processing.",
}


def _streams_from_result(result) -> dict:
    if result is not None and result.ok and isinstance(result.payload, dict):
        return dict(result.payload)
    return {}


def phase_research(runtime, query: str, user_id: str) -> ResearchOutput:
    with runtime.tracer.span("agent-phase", "research",
                             inputs={"query": query}) as span:
        runtime.emitter.emit("phase-started", {"phase": "research"})
        run = run_agent(
            runtime,
            AgentRole.RESEARCHER,
            load_prompt("researcher"),
            f"user_id: {user_id}\nquery: {query}",
            RESEARCH_SCHEMA,
        )
        research = ResearchOutput.from_doc(run.structured)
        span.outputs = {"required_packages": research.required_packages}
    return research


def phase_execute(runtime, research: ResearchOutput) -> ExecutionOutput:
    config = runtime.config
    if config.iterative_execute:
        prompt = load_prompt("code_agent_sd")
        budget = {"execute_code": config.sd_max_debug_iters}
    else:
        prompt = load_prompt("code_agent")
        budget = {"execute_code": 1}
    with runtime.tracer.span("agent-phase", "execute",
                             inputs={"packages": research.required_packages}) as span:
        runtime.emitter.emit("phase-started", {"phase": "execute"})
        run = run_agent(
            runtime,
            AgentRole.CODE_AGENT,
            prompt,
            "solution to run:\n" + json.dumps(research.to_doc()),
            EXECUTION_SCHEMA,
            budgets=budget,
        )
        doc = run.structured
        streams = _streams_from_result(run.last_result("execute_code"))
        if not streams:
            streams = doc.get("execution_output") or {}
        execution = ExecutionOutput(
            user_id=doc.get("user_id", research.user_id),
            original_query=doc.get("original_query", research.original_query),
            executed_code=doc.get("executed_code", research.code),
            execution_output=streams,
            needs_debug=bool(doc["needs_debug"]),
        )
        span.outputs = {"needs_debug": execution.needs_debug,
                        "executions": run.count("execute_code")}
    return execution


def _debug_one(runtime, execution: ExecutionOutput, index: int,
               parent_span: str | None, turn_id: str | None) -> DebugOutput:
    hint = STRATEGY_HINTS[index % len(STRATEGY_HINTS)]
    runtime.tracer.attach(parent_span, turn_id)
    try:
        with runtime.tracer.span("agent-phase", f"debug-{index}",
                                 inputs={"strategy_emphasis": hint}) as span:
            run = run_agent(
                runtime,
                AgentRole.DEBUGGER,
                load_prompt("debugger") + "\n\n" + _HINT_GUIDANCE[hint],
                "strategy emphasis: " + hint + "\n"
                "query: " + execution.original_query + "\n"
                "failed code:\n" + execution.executed_code + "\n"
                "execution output:\n" + json.dumps(execution.execution_output),
                DEBUG_SCHEMA,
                span_name=f"debugger-{index}",
                script_role=f"debugger-{index}",
            )
            doc = run.structured
            last_exec = run.last_result("execute_code")
            streams = _streams_from_result(last_exec)
            clean_run = bool(streams) and streams.get("exit_status") == 0
            succeeded = bool(doc.get("succeeded")) and clean_run
            answer = doc.get("extracted_answer")
            if answer is None and streams.get("stdout"):
                answer = answers.extract_answer(streams["stdout"])
            out = DebugOutput(
                agent_index=index,
                strategy_emphasis=hint,
                final_code=doc.get("final_code", ""),
                execution_output=streams or (doc.get("execution_output") or {}),
                succeeded=succeeded,
                extracted_answer=answer,
                analysis=doc.get("analysis", ""),
            )
            span.outputs = {"succeeded": out.succeeded}
            return out
    except SolverkitError as exc:
        return DebugOutput(
            agent_index=index,
            strategy_emphasis=hint,
            final_code="",
            execution_output={},
            succeeded=False,
            analysis=f"debug agent failed: {exc.message}",
        )
    except Exception as exc:  # a poisoned agent never aborts its siblings
        logger.debug("debug agent %d crashed", index, exc_info=True)
        return DebugOutput(
            agent_index=index,
            strategy_emphasis=hint,
            final_code="",
            execution_output={},
            succeeded=False,
            analysis=f"debug agent crashed: {type(exc).__name__}: {exc}",
        )


def phase_debug(runtime, execution: ExecutionOutput) -> list[DebugOutput]:
    """Fan out debug agents concurrently; one result per agent, always."""
    fanout = runtime.config.debug_fanout
    parent = runtime.tracer.current_span_id()
    turn_id = runtime.tracer.current_turn_id()
    runtime.emitter.emit("phase-started", {"phase": "debug", "fanout": fanout})
    with ThreadPoolExecutor(max_workers=fanout,
                            thread_name_prefix="debugger") as pool:
        futures = [
            pool.submit(_debug_one, runtime, execution, i, parent, turn_id)
            for i in range(fanout)
        ]
        results = [f.result() for f in futures]
    return sorted(results, key=lambda d: d.agent_index)


def select_output(
    execution: ExecutionOutput,
    debug: list[DebugOutput] | None,
    query: str,
) -> FinalOutput:
    """Pick the final result.

    Without debugging the execution passes straight through. With debug
    candidates, successful ones are grouped by answer equality; the largest
    group wins (preference to identical outputs), ties broken by the lowest
    agent index.
    """
    if not execution.needs_debug:
        stdout = execution.execution_output.get("stdout", "")
        answer = answers.extract_answer(stdout)
        if answer is None:
            answer = stdout.strip()  # success implies an answer is present
        return FinalOutput(
            original_query=query,
            success=True,
            final_code=execution.executed_code,
            execution_results=execution.execution_output,
            processed_output={
                "answer": answer,
                "analysis": "initial execution succeeded",
            },
        )
    debug = debug or []
    successes = [d for d in debug if d.succeeded]
    if not successes:
        diagnostic = _best_diagnostic(debug)
        return FinalOutput(
            original_query=query,
            success=False,
            final_code=execution.executed_code,
            execution_results=execution.execution_output,
            processed_output={"answer": None, "analysis": diagnostic},
        )
    groups: list[list[DebugOutput]] = []
    for candidate in successes:
        for group in groups:
            if answers.answers_equal(group[0].extracted_answer,
                                     candidate.extracted_answer):
                group.append(candidate)
                break
        else:
            groups.append([candidate])
    groups.sort(key=lambda g: (-len(g), g[0].agent_index))
    winner = groups[0][0]
    agreement = len(groups[0])
    answer = winner.extracted_answer
    if answer is None:
        answer = winner.execution_output.get("stdout", "").strip()
    return FinalOutput(
        original_query=query,
        success=True,
        final_code=winner.final_code,
        execution_results=winner.execution_output,
        processed_output={
            "answer": answer,
            "analysis": (
                f"selected debug agent {winner.agent_index} "
                f"({winner.strategy_emphasis}); {agreement} of "
                f"{len(successes)} successful agents agreed"
            ),
        },
    )


def _best_diagnostic(debug: list[DebugOutput]) -> str:
    informative = [
        d for d in debug if d.execution_output.get("stderr")
    ]
    if informative:
        best = max(informative,
                   key=lambda d: (len(d.execution_output.get("stderr", "")),
                                  -d.agent_index))
        stderr = best.execution_output["stderr"].strip().splitlines()
        tail = stderr[-1] if stderr else ""
        return (f"all debug agents failed; best diagnostic from agent "
                f"{best.agent_index}: {tail}")
    notes = "; ".join(f"agent {d.agent_index}: {d.analysis or 'no result'}"
                      for d in debug)
    return f"all debug agents failed; {notes or 'no diagnostics captured'}"


def run_deep_solver(runtime, query: str, user_id: str = "user") -> FinalOutput:
    """Research -> execute -> (debug when needed) -> select."""
    owns_turn = runtime.tracer.current_turn_id() is None

    def _pipeline() -> FinalOutput:
        try:
            research = phase_research(runtime, query, user_id)
            execution = phase_execute(runtime, research)
            debug_results = None
            if execution.needs_debug and runtime.config.debug_enabled:
                debug_results = phase_debug(runtime, execution)
            with runtime.tracer.span("agent-phase", "select"):
                runtime.emitter.emit("phase-started", {"phase": "select"})
                final = select_output(execution, debug_results, query)
            runtime.emitter.emit("final", final.to_doc())
            return final
        except SolverkitError as exc:
            runtime.emitter.emit("error", {"kind": exc.kind,
                                           "message": exc.message})
            return FinalOutput(
                original_query=query,
                success=False,
                final_code="",
                execution_results={},
                processed_output={
                    "answer": None,
                    "analysis": f"pipeline failed: {exc.kind}: {exc.message}",
                    "workflow_failure": isinstance(exc, WorkflowFailureError)
                    or exc.kind in ("workflow-failure", "script-exhausted",
                                    "transport-failure"),
                },
            )

    if owns_turn:
        turn_id = "t-" + uuid.uuid4().hex[:10]
        with runtime.tracer.turn(turn_id, "deep-solve", {"query": query}):
            return _pipeline()
    return _pipeline()
