from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solverkit.engine.config import configure_pipeline
from solverkit.engine.deepsolver import (
    phase_debug,
    run_deep_solver,
    select_output,
)
from solverkit.engine.outputs import DebugOutput, ExecutionOutput
from solverkit.engine.runtime import Runtime
from solverkit.engine.events import EventEmitter

from conftest import (
    debug_reply,
    execution_reply,
    make_stack,
    research_reply,
    scripted_gateway,
)

PASS_CODE = 'print(42)'
FAIL_CODE = 'raise ValueError("boom")'


@pytest.fixture(scope="module")
def shared_stack(tmp_path_factory):
    stack = make_stack(tmp_path_factory.mktemp("deeproot"))
    yield stack
    stack.shutdown()


def make_runtime(stack, steps, mode="deepsolver", **cfg) -> Runtime:
    pipeline = configure_pipeline(mode, **cfg)
    return Runtime(
        config=pipeline,
        gateway=scripted_gateway(steps),
        invoker=stack.direct_invoker(),
        tracer=stack.tracer,
        emitter=EventEmitter(),
        memory=stack.memory,
        sessions=stack.sessions,
    )


_COUNTER = iter(range(10_000))


def run_scenario(stack, steps, query="solve it", mode="deepsolver", **cfg):
    runtime = make_runtime(stack, steps, mode=mode, **cfg)
    turn_id = f"t-scn-{next(_COUNTER)}"
    with stack.tracer.turn(turn_id, "deep-solve", {"query": query}):
        final = run_deep_solver(runtime, query, user_id="u1")
    trace = stack.sessions.fetch_trace(turn_id)
    return final, trace, runtime


def phase_spans(trace) -> list[dict]:
    found = []

    def walk(node):
        for child in node.get("children", []):
            if child["kind"] == "agent-phase":
                found.append(child)
            walk(child)

    walk(trace)
    return found


def tool_spans(node, name=None) -> list[dict]:
    found = []

    def walk(n):
        for child in n.get("children", []):
            if child["kind"] == "tool-call" and (name is None
                                                 or child["name"] == name):
                found.append(child)
            walk(child)

    walk(node)
    return found


def happy_steps(query="solve it"):
    return [
        {"role": "researcher", "reply": research_reply(PASS_CODE, query=query)},
        {"role": "code-agent", "tool": "execute_code",
         "args": {"source": PASS_CODE}},
        {"role": "code-agent", "reply": execution_reply(PASS_CODE, False,
                                                        query=query)},
    ]


def failing_exec_steps(query="solve it"):
    return [
        {"role": "researcher", "reply": research_reply(FAIL_CODE, query=query)},
        {"role": "code-agent", "tool": "execute_code",
         "args": {"source": FAIL_CODE}},
        {"role": "code-agent", "reply": execution_reply(FAIL_CODE, True,
                                                        query=query)},
    ]


def fixer_steps(index: int, answer=42):
    return [
        {"role": f"debugger-{index}", "tool": "execute_code",
         "args": {"source": PASS_CODE}},
        {"role": f"debugger-{index}",
         "reply": debug_reply(PASS_CODE, True, answer=answer)},
    ]


def failer_steps(index: int):
    return [{"role": f"debugger-{index}", "reply": debug_reply("", False)}]


# -- scenarios -----------------------------------------------------------------------


def test_happy_path_skips_debug(shared_stack):
    final, trace, _ = run_scenario(shared_stack, happy_steps())
    assert final.success
    names = [s["name"] for s in phase_spans(trace)]
    assert names == ["research", "execute", "select"]
    assert final.processed_output["answer"] == 42.0
    assert final.execution_results["exit_status"] == 0


def test_exec_failure_debugger_fixes(shared_stack):
    steps = (failing_exec_steps()
             + failer_steps(0) + fixer_steps(1) + failer_steps(2))
    final, trace, _ = run_scenario(shared_stack, steps)
    assert final.success
    names = sorted(s["name"] for s in phase_spans(trace))
    assert names == ["debug-0", "debug-1", "debug-2", "execute", "research",
                     "select"]
    assert final.processed_output["answer"] == 42
    assert "agent 1" in final.processed_output["analysis"]


def test_all_debuggers_fail_best_diagnostic(shared_stack):
    debug_fail_with_exec = [
        {"role": "debugger-2", "tool": "execute_code",
         "args": {"source": 'raise KeyError("missing_field")'}},
        {"role": "debugger-2", "reply": debug_reply(FAIL_CODE, False)},
    ]
    steps = (failing_exec_steps()
             + failer_steps(0) + failer_steps(1) + debug_fail_with_exec)
    final, _, _ = run_scenario(shared_stack, steps)
    assert not final.success
    analysis = final.processed_output["analysis"]
    assert "KeyError" in analysis  # the most informative stderr surfaced
    assert final.processed_output["answer"] is None


def test_fanout_always_yields_exactly_that_many_outputs(shared_stack):
    execution = ExecutionOutput(
        user_id="u1", original_query="q", executed_code=FAIL_CODE,
        execution_output={"stdout": "", "stderr": "boom", "exit_status": 1},
        needs_debug=True,
    )
    runtime = make_runtime(
        shared_stack,
        failer_steps(0) + fixer_steps(1) + [{"role": "debugger-2",
                                             "raise": "dead"}],
    )
    with shared_stack.tracer.turn(f"t-fan-{next(_COUNTER)}", "deep-solve"):
        outputs = phase_debug(runtime, execution)
    assert [o.agent_index for o in outputs] == [0, 1, 2]
    assert [o.succeeded for o in outputs] == [False, True, False]
    assert [o.strategy_emphasis for o in outputs] == [
        "local", "exploratory", "research"]


def test_claimed_success_without_clean_run_is_rejected(shared_stack):
    execution = ExecutionOutput(
        user_id="u1", original_query="q", executed_code=FAIL_CODE,
        execution_output={"exit_status": 1}, needs_debug=True,
    )
    liar = [
        # claims success but never executed anything
        {"role": "debugger-0", "reply": debug_reply(PASS_CODE, True, 7)},
        # claims success but its run failed
        {"role": "debugger-1", "tool": "execute_code",
         "args": {"source": FAIL_CODE}},
        {"role": "debugger-1", "reply": debug_reply(FAIL_CODE, True, 7)},
    ] + failer_steps(2)
    runtime = make_runtime(shared_stack, liar)
    with shared_stack.tracer.turn(f"t-liar-{next(_COUNTER)}", "deep-solve"):
        outputs = phase_debug(runtime, execution)
    assert [o.succeeded for o in outputs] == [False, False, False]


def test_poisoned_debugger_never_changes_siblings(shared_stack):
    execution = ExecutionOutput(
        user_id="u1", original_query="q", executed_code=FAIL_CODE,
        execution_output={"stdout": "", "stderr": "boom", "exit_status": 1},
        needs_debug=True,
    )

    def run(poison_zero: bool):
        zero = ([{"role": "debugger-0", "raise": "poisoned"}]
                if poison_zero else failer_steps(0))
        runtime = make_runtime(shared_stack,
                               zero + fixer_steps(1) + failer_steps(2))
        with shared_stack.tracer.turn(f"t-poison-{next(_COUNTER)}", "x"):
            return phase_debug(runtime, execution)

    def stable(doc: dict) -> dict:
        # drop per-run volatility (file timestamps, wall clock); the
        # semantic outcome must be identical
        doc = dict(doc)
        doc["execution_output"] = {
            k: v for k, v in doc["execution_output"].items()
            if k not in ("code_path", "elapsed_ms")
        }
        return doc

    healthy = run(poison_zero=False)
    poisoned = run(poison_zero=True)
    for i in (1, 2):
        assert stable(healthy[i].to_doc()) == stable(poisoned[i].to_doc())
    assert not poisoned[0].succeeded
    assert "poisoned" in poisoned[0].analysis or "crashed" in poisoned[0].analysis


def test_single_execution_contract_randomized(shared_stack):
    rng = random.Random(7)
    for i in range(100):
        passes = rng.random() < 0.5
        code = PASS_CODE if passes else FAIL_CODE
        steps = [
            {"role": "researcher",
             "reply": research_reply(code, query=f"scenario {i}")},
        ]
        # random pre-execution tool usage by the code agent
        if rng.random() < 0.4:
            steps.append({"role": "code-agent",
                          "tool": "check_installed_packages", "args": {}})
        steps.append({"role": "code-agent", "tool": "execute_code",
                      "args": {"source": code}})
        if rng.random() < 0.3:
            # a second attempt must be blocked by the budget, not executed
            steps.append({"role": "code-agent", "tool": "execute_code",
                          "args": {"source": code}})
        steps.append({"role": "code-agent",
                      "reply": execution_reply(code, not passes,
                                               query=f"scenario {i}")})
        if not passes:
            steps += failer_steps(0) + fixer_steps(1) + failer_steps(2)
        final, trace, _ = run_scenario(shared_stack, steps,
                                       query=f"scenario {i}")
        execute_phase = next(s for s in phase_spans(trace)
                             if s["name"] == "execute")
        assert len(tool_spans(execute_phase, "execute_code")) == 1, i


def test_workflow_failure_marked(shared_stack):
    steps = [{"role": "researcher", "reply": "absolute nonsense"}]
    final, _, _ = run_scenario(shared_stack, steps)
    assert not final.success
    assert final.processed_output["workflow_failure"] is True


# -- modes ---------------------------------------------------------------------------


def test_nsr_mode_never_debugs(shared_stack):
    steps = failing_exec_steps()
    final, trace, _ = run_scenario(shared_stack, steps, mode="nsr")
    names = [s["name"] for s in phase_spans(trace)]
    assert names == ["research", "execute", "select"]
    assert not final.success  # failed execution, nobody repaired it


def test_native_mode_blocks_researcher_tools(shared_stack):
    steps = [
        # the researcher tries a search it does not have; the error envelope
        # comes back and it answers from knowledge
        {"role": "researcher", "tool": "tavily-search",
         "args": {"query": "docs"}},
        {"role": "researcher", "reply": research_reply(PASS_CODE)},
        {"role": "code-agent", "tool": "execute_code",
         "args": {"source": PASS_CODE}},
        {"role": "code-agent", "reply": execution_reply(PASS_CODE, False)},
    ]
    final, trace, _ = run_scenario(shared_stack, steps, mode="native")
    assert final.success
    assert tool_spans(trace, "tavily-search") == []  # never reached the bus
    assert len(tool_spans(trace, "execute_code")) == 1


def test_ncl_mode_no_continuous_learning_calls(shared_stack):
    steps = [
        {"role": "researcher", "tool": "quick_introspect",
         "args": {"package": "nosuchpkg"}},
        {"role": "researcher", "reply": research_reply(FAIL_CODE)},
        {"role": "code-agent", "tool": "execute_code",
         "args": {"source": FAIL_CODE}},
        {"role": "code-agent", "reply": execution_reply(FAIL_CODE, True)},
    ] + failer_steps(0) + fixer_steps(1) + failer_steps(2)
    final, trace, _ = run_scenario(shared_stack, steps, mode="ncl")
    assert final.success  # debug phase still exists in ncl
    for banned in ("tavily-search", "extract_code_from_url",
                   "retrieve_extracted_code"):
        assert tool_spans(trace, banned) == []
    assert [s["name"] for s in phase_spans(trace)] == [
        "research", "execute", "debug-0", "debug-1", "debug-2", "select"]


def test_search_and_debug_iterates_within_cap(shared_stack):
    steps = [
        {"role": "researcher", "reply": research_reply(FAIL_CODE)},
        {"role": "code-agent", "tool": "execute_code",
         "args": {"source": FAIL_CODE}},
        {"role": "code-agent", "tool": "execute_code",
         "args": {"source": PASS_CODE}},
        {"role": "code-agent", "reply": execution_reply(PASS_CODE, False)},
    ]
    final, trace, _ = run_scenario(shared_stack, steps,
                                   mode="search-and-debug")
    assert final.success
    execute_phase = next(s for s in phase_spans(trace)
                         if s["name"] == "execute")
    assert len(tool_spans(execute_phase, "execute_code")) == 2
    assert [s["name"] for s in phase_spans(trace)] == [
        "research", "execute", "select"]


def test_search_and_debug_budget_blocks_beyond_cap(shared_stack):
    steps = [
        {"role": "researcher", "reply": research_reply(FAIL_CODE)},
    ]
    for _ in range(5):  # tries five times; only the cap may reach the bus
        steps.append({"role": "code-agent", "tool": "execute_code",
                      "args": {"source": FAIL_CODE}})
    steps.append({"role": "code-agent",
                  "reply": execution_reply(FAIL_CODE, True)})
    final, trace, _ = run_scenario(shared_stack, steps,
                                   mode="search-and-debug",
                                   sd_max_debug_iters=3)
    execute_phase = next(s for s in phase_spans(trace)
                         if s["name"] == "execute")
    assert len(tool_spans(execute_phase, "execute_code")) == 3


# -- select_output ----------------------------------------------------------------


def make_debug(index: int, succeeded: bool, answer) -> DebugOutput:
    return DebugOutput(
        agent_index=index,
        strategy_emphasis=("local", "exploratory", "research")[index % 3],
        final_code=f"code-{index}",
        execution_output={"stdout": "", "stderr": "", "exit_status": 0}
        if succeeded else {"stdout": "", "stderr": "err", "exit_status": 1},
        succeeded=succeeded,
        extracted_answer=answer,
    )


def passthrough_execution(stdout="42\n"):
    return ExecutionOutput(
        user_id="u", original_query="q", executed_code="c",
        execution_output={"stdout": stdout, "stderr": "", "exit_status": 0},
        needs_debug=False,
    )


def test_no_debug_passthrough():
    final = select_output(passthrough_execution(), None, "q")
    assert final.success
    assert final.final_code == "c"
    assert final.processed_output["answer"] == 42.0


def test_majority_preference_example():
    debug = [make_debug(0, True, 42), make_debug(1, True, 42),
             make_debug(2, True, 41)]
    execution = passthrough_execution()
    execution.needs_debug = True
    final = select_output(execution, debug, "q")
    assert final.processed_output["answer"] == 42


def test_single_success_selected():
    debug = [make_debug(0, False, None), make_debug(1, True, 7),
             make_debug(2, False, None)]
    execution = passthrough_execution()
    execution.needs_debug = True
    final = select_output(execution, debug, "q")
    assert final.success
    assert final.processed_output["answer"] == 7
    assert final.final_code == "code-1"


# answers drawn as (canonical_key, variant) so the oracle can group without
# reusing the engine's equality helper
_ANSWER_POOL = [
    ("42", 42), ("42", 42.0), ("42", "42.0"),
    ("41", 41), ("foo", "foo"), ("none", None),
]


@settings(max_examples=200, deadline=None)
@given(st.lists(
    st.tuples(st.booleans(), st.sampled_from(_ANSWER_POOL)),
    min_size=1, max_size=6))
def test_majority_rule_matches_bruteforce_oracle(candidates):
    debug = [make_debug(i, ok, variant)
             for i, (ok, (_, variant)) in enumerate(candidates)]
    execution = passthrough_execution()
    execution.needs_debug = True
    final = select_output(execution, debug, "q")

    # oracle: explicit grouping by canonical key over successful candidates
    successes = [(i, key) for i, (ok, (key, _)) in enumerate(candidates) if ok]
    if not successes:
        assert not final.success
        return
    groups: dict[str, list[int]] = {}
    for i, key in successes:
        groups.setdefault(key, []).append(i)
    best = sorted(groups.values(), key=lambda idxs: (-len(idxs), idxs[0]))[0]
    winner_index = best[0]
    assert final.success
    assert final.final_code == f"code-{winner_index}"
    # majority preference: if any group has >= 2 members, the winner is in the
    # largest group
    largest = max(len(g) for g in groups.values())
    if largest >= 2:
        assert winner_index in [i for g in groups.values()
                                if len(g) == largest for i in g]
