"""Acceptance criteria suite.

Each test implements one acceptance criterion at its stated tolerance and
prints one PASS line on success (run with ``pytest tests/test_acceptance.py
-v -s`` to see them); a failing criterion fails its test. Everything runs
with the scripted model backend and no network credentials.
"""

from __future__ import annotations

import json
import random
import shutil
import string
import time

import pytest

from solverkit.bench import (
    AttemptRecord,
    BenchConfig,
    compute_difficulty,
    compute_metrics,
    expected_record_count,
    load_tasks,
    run_benchmark,
)
from solverkit.codeintel import parse_local_package
from solverkit.codeintel.extract import CodeExtractor, ExtractionCache, UrlFetcher
from solverkit.codeintel.kg import KnowledgeGraph
from solverkit.engine.config import configure_pipeline
from solverkit.engine.deepsolver import run_deep_solver
from solverkit.engine.events import EventEmitter
from solverkit.engine.orchestrator import apply_feedback, orchestrate_turn
from solverkit.engine.runtime import Runtime
from solverkit.errors import DeniedSubtreeError, PathEscapeError
from solverkit.memory import MemoryStore
from solverkit.toolbus.registry import BUILTIN_TOOL_NAMES
from solverkit.toolbus.wire import WireClient, serve_wire
from solverkit.workspace import PathPolicy

from conftest import (
    debug_reply,
    execution_reply,
    make_stack,
    research_reply,
    scripted_gateway,
    write_fixture_package,
    write_micro_suite,
    write_web_fixtures,
)
from test_engine_config import EXPECTED_DEBUG_ENABLED, EXPECTED_MATRIX
from test_parity import PARITY_CALLS, build_seeded_stack, resolve_args
from test_policy_fuzz import build_attack_paths, snapshot

pytestmark = pytest.mark.acceptance

PASS_CODE = "print(42)"
FAIL_CODE = 'raise ValueError("boom")'


def announce(name: str) -> None:
    print(f"\nACCEPTANCE PASS: {name}")


# ---------------------------------------------------------------------------


def test_criterion_end_to_end_scripted_pipeline(tmp_path):
    """Research code fails once; debug agent #1 repairs it; the trace holds
    exactly research, execute, 3x debug, select; wall time < 5 s."""
    stack = make_stack(tmp_path / "root")
    steps = [
        {"role": "researcher", "reply": research_reply(FAIL_CODE)},
        {"role": "code-agent", "tool": "execute_code",
         "args": {"source": FAIL_CODE}},
        {"role": "code-agent", "reply": execution_reply(FAIL_CODE, True)},
        {"role": "debugger-0", "reply": debug_reply("", False)},
        {"role": "debugger-1", "tool": "execute_code",
         "args": {"source": PASS_CODE}},
        {"role": "debugger-1", "reply": debug_reply(PASS_CODE, True,
                                                    answer=42)},
        {"role": "debugger-2", "reply": debug_reply("", False)},
    ]
    runtime = Runtime(
        config=configure_pipeline("deepsolver"),
        gateway=scripted_gateway(steps),
        invoker=stack.direct_invoker(),
        tracer=stack.tracer,
        emitter=EventEmitter(),
        memory=stack.memory,
        sessions=stack.sessions,
    )
    started = time.monotonic()
    with stack.tracer.turn("t-accept-e2e", "deep-solve"):
        final = run_deep_solver(runtime, "repair me", user_id="u1")
    wall = time.monotonic() - started

    assert final.success is True
    assert final.processed_output["answer"] == 42
    trace = stack.sessions.fetch_trace("t-accept-e2e")
    phases = []

    def walk(node):
        for child in node.get("children", []):
            if child["kind"] == "agent-phase":
                phases.append(child["name"])
            walk(child)

    walk(trace)
    assert sorted(phases) == ["debug-0", "debug-1", "debug-2", "execute",
                              "research", "select"]
    assert wall < 5.0, f"pipeline took {wall:.2f}s"
    stack.shutdown()
    announce("end-to-end scripted pipeline (debug agent #1 repairs, <5s)")


def test_criterion_metric_oracle_equivalence():
    """success rate, pass@1/2/3 and difficulty classification match
    brute-force oracles exactly over >= 1000 random grids."""
    rng = random.Random(424242)
    mismatches = 0
    grids = 0
    while grids < 1000:
        n_tasks = rng.randint(1, 5)
        n_configs = rng.randint(1, 3)
        reps = rng.randint(1, 4)
        records = []
        for t in range(n_tasks):
            level = rng.randint(0, 1)
            for c in range(n_configs):
                for r in range(1, reps + 1):
                    records.append(AttemptRecord(
                        task_id=f"t{t}", level=level, config_id=f"c{c}",
                        repetition=r, correct=rng.random() < 0.5,
                        workflow_failure=rng.random() < 0.08,
                        elapsed_s=1.0, category="simulation",
                    ))
        included = [r for r in records if not r.workflow_failure]
        if not included:
            continue
        grids += 1
        table = compute_metrics(records)
        for (config_id, level, category), cell in table.cells.items():
            subset = [r for r in included
                      if r.config_id == config_id
                      and (level is None or r.level == level)
                      and (category is None or r.category == category)]
            correct = sum(1 for r in subset if r.correct)
            if abs(cell.success_rate - correct / len(subset)) > 1e-12:
                mismatches += 1
            tasks = sorted({r.task_id for r in subset})
            pass_at = {}
            for k in (1, 2, 3):
                hit = 0
                for task in tasks:
                    ordered = sorted((r for r in subset if r.task_id == task),
                                     key=lambda r: r.repetition)[:k]
                    if any(r.correct for r in ordered):
                        hit += 1
                pass_at[k] = hit / len(tasks)
                if abs(cell.pass_at[k] - pass_at[k]) > 1e-12:
                    mismatches += 1
            if not (cell.pass_at[1] <= cell.pass_at[2] + 1e-12
                    <= cell.pass_at[3] + 2e-12):
                mismatches += 1

        level1 = [r for r in included if r.level == 1]
        rows = {row.task_id: row for row in compute_difficulty(records)}
        configs = sorted({r.config_id for r in level1})
        for task in sorted({r.task_id for r in level1}):
            solving = 0
            for config in configs:
                first3 = sorted(
                    (r for r in level1
                     if r.task_id == task and r.config_id == config),
                    key=lambda r: r.repetition)[:3]
                if any(r.correct for r in first3):
                    solving += 1
            p = solving / len(configs)
            row = rows[task]
            if abs(row.p_value - p) > 1e-12:
                mismatches += 1
            if row.klass != ("simple" if p >= 0.5 else "difficult"):
                mismatches += 1
    assert grids >= 1000
    assert mismatches == 0
    announce(f"metric oracle equivalence ({grids} grids, 0 mismatches)")


@pytest.mark.slow
def test_criterion_benchmark_bookkeeping(tmp_path):
    """4-task micro-suite x 3 reps x 2 configs = exactly 24 records; an
    injected child crash marks only its own record; the count formula
    reproduces 16,008 for the 116x3x46 shape."""
    tasks_dir, template = write_micro_suite(tmp_path)
    tasks = load_tasks(tasks_dir)
    configs = [
        BenchConfig(config_id=f"scripted-{i}", mode="deepsolver",
                    model={"backend": "scripted", "script_path": template})
        for i in range(2)
    ]
    records = run_benchmark(tasks, configs, repetitions=3,
                            work_dir=tmp_path / "work", levels=(0,),
                            attempt_timeout_s=120)
    assert len(records) == 24
    assert not any(r.workflow_failure for r in records)

    poison_dir, poison_template = write_micro_suite(tmp_path / "poison",
                                                    poison=True)
    poison_tasks = [t for t in load_tasks(poison_dir)
                    if t.task_id in ("micro-poison", "micro-number")]
    poison_records = run_benchmark(
        poison_tasks,
        [BenchConfig(config_id="scripted-0", mode="deepsolver",
                     model={"backend": "scripted",
                            "script_path": poison_template})],
        repetitions=1, work_dir=tmp_path / "poison-work", levels=(0,),
        attempt_timeout_s=120)
    by_task = {r.task_id: r for r in poison_records}
    assert by_task["micro-poison"].workflow_failure is True
    assert by_task["micro-number"].workflow_failure is False
    assert by_task["micro-number"].correct is True

    assert expected_record_count(116, 3, 46) == 16008
    announce("benchmark bookkeeping (24 records, crash isolation, 16008)")


def test_criterion_tool_parity(tmp_path_factory):
    """All 16 tools return structurally identical payloads via wire and
    direct invocation on the parity fixture set."""
    env = {"base": tmp_path_factory.mktemp("accept-parity")}
    env["urls"] = write_web_fixtures(env["base"])
    env["root"] = env["base"] / "stack-root"
    matched = 0
    assert sorted(n for n, _ in PARITY_CALLS) == sorted(BUILTIN_TOOL_NAMES)
    for tool_name, args in PARITY_CALLS:
        arguments = resolve_args(args, env)
        stack = build_seeded_stack(env)
        direct = stack.direct_invoker(traced=False).call(tool_name, arguments)
        stack.shutdown()
        stack = build_seeded_stack(env)
        with serve_wire(stack.registry) as server:
            wired = WireClient(server.url).call(tool_name, arguments)
        stack.shutdown()
        assert direct.ok and wired.ok, (tool_name, direct, wired)
        assert direct.payload == wired.payload, tool_name
        matched += 1
    assert matched == 16
    announce("tool parity (16/16 tools, 100% payload match)")


def test_criterion_sandbox_policy_fuzz(tmp_path):
    """>= 100 generated escape attempts all rejected; zero out-of-root
    filesystem effects."""
    root = tmp_path / "project"
    root.mkdir()
    outside = tmp_path / "outside"
    (outside / "nested").mkdir(parents=True)
    policy = PathPolicy(root)
    attacks = build_attack_paths(root, outside, random.Random(99))
    before = snapshot(outside)
    rejected = 0
    for attack in attacks:
        with pytest.raises((PathEscapeError, DeniedSubtreeError)):
            policy.resolve(attack)
        rejected += 1
    assert rejected == len(attacks) >= 100
    assert snapshot(outside) == before
    announce(f"sandbox policy fuzz ({rejected} attempts rejected, 0 effects)")


def test_criterion_code_intel_fixtures(tmp_path):
    """Extraction counts exact and byte-stable; second extraction is a
    cache hit with zero fetches; KG counts equal the AST oracle; re-parse
    idempotent."""
    urls = write_web_fixtures(tmp_path)
    cache = ExtractionCache(tmp_path / "cache.db")
    extractor = CodeExtractor(cache, fetcher=UrlFetcher(), crawl_delay_s=0.0)

    expected_counts = {"tutorial.ipynb": 5, "docs.html": 2, "guide.md": 2,
                       "snippet.py": 1}
    first_pass = {}
    for name, count in expected_counts.items():
        report = extractor.extract(urls[name])
        assert len(report.blocks) == count, name
        first_pass[name] = [(b.ordinal, b.code.encode(), b.context_before,
                             b.context_after, b.content_kind)
                            for b in report.blocks]

    # byte-stable across runs (fresh cache)
    cache2 = ExtractionCache(tmp_path / "cache2.db")
    extractor2 = CodeExtractor(cache2, fetcher=UrlFetcher(), crawl_delay_s=0.0)
    for name in expected_counts:
        report = extractor2.extract(urls[name])
        again = [(b.ordinal, b.code.encode(), b.context_before,
                  b.context_after, b.content_kind) for b in report.blocks]
        assert again == first_pass[name], name

    # cache hit: zero fetches
    fetches_before = extractor.fetcher.fetch_count
    hit = extractor.extract(urls["tutorial.ipynb"])
    assert hit.cache_hit and hit.fetch_count == 0
    assert extractor.fetcher.fetch_count == fetches_before
    assert [(b.ordinal, b.code.encode(), b.context_before, b.context_after,
             b.content_kind) for b in hit.blocks] == \
        first_pass["tutorial.ipynb"]

    # knowledge graph vs independent AST-walk oracle
    package = write_fixture_package(tmp_path)
    graph = KnowledgeGraph(tmp_path / "kg.json")
    report = parse_local_package(graph, package)
    from test_codeintel_kg import oracle_counts

    oracle = oracle_counts(package)
    assert report["nodes"]["module"] == oracle["module"]
    own_classes = [n for n in graph.nodes.values()
                   if n.kind == "class" and not n.detail.get("external")]
    assert len(own_classes) == oracle["class"]
    assert report["nodes"]["function"] == oracle["function"]
    assert report["nodes"]["method"] == oracle["method"]

    nodes_before = sorted(graph.nodes)
    edges_before = sorted((e.from_id, e.to_id, e.relation)
                          for e in graph.edges)
    parse_local_package(graph, package)
    assert sorted(graph.nodes) == nodes_before
    assert sorted((e.from_id, e.to_id, e.relation)
                  for e in graph.edges) == edges_before
    announce("code-intel fixtures (counts, byte-stable, cache, KG oracle)")


def test_criterion_pipeline_mode_matrix(tmp_path):
    """Offered-tool sets match the documented matrix for every mode, and
    mode-specific behavior holds in traces."""
    for mode, matrix in EXPECTED_MATRIX.items():
        dump = configure_pipeline(mode).dump()
        for role, tools in matrix.items():
            assert dump["toolsets"][role] == tools, (mode, role)
        assert dump["debug_enabled"] is EXPECTED_DEBUG_ENABLED[mode]

    stack = make_stack(tmp_path / "root")

    def run(mode, steps, **cfg):
        runtime = Runtime(
            config=configure_pipeline(mode, **cfg),
            gateway=scripted_gateway(steps),
            invoker=stack.direct_invoker(),
            tracer=stack.tracer,
            emitter=EventEmitter(),
            memory=stack.memory,
            sessions=stack.sessions,
        )
        turn_id = f"t-matrix-{mode}"
        with stack.tracer.turn(turn_id, "deep-solve"):
            final = run_deep_solver(runtime, f"{mode} scenario", user_id="u")
        return final, stack.sessions.fetch_trace(turn_id)

    def spans_of(trace, kind, name=None):
        out = []

        def walk(node):
            for child in node.get("children", []):
                if child["kind"] == kind and (name is None
                                              or child["name"] == name):
                    out.append(child)
                walk(child)

        walk(trace)
        return out

    # native: no researcher tools reach the bus, exactly one execution
    final, trace = run("native", [
        {"role": "researcher", "tool": "tavily-search", "args": {"query": "x"}},
        {"role": "researcher", "reply": research_reply(PASS_CODE)},
        {"role": "code-agent", "tool": "execute_code",
         "args": {"source": PASS_CODE}},
        {"role": "code-agent", "reply": execution_reply(PASS_CODE, False)},
    ])
    assert final.success
    assert spans_of(trace, "tool-call", "tavily-search") == []
    assert len(spans_of(trace, "tool-call", "execute_code")) == 1

    # nsr: failing execution, no debug phase ever
    final, trace = run("nsr", [
        {"role": "researcher", "reply": research_reply(FAIL_CODE)},
        {"role": "code-agent", "tool": "execute_code",
         "args": {"source": FAIL_CODE}},
        {"role": "code-agent", "reply": execution_reply(FAIL_CODE, True)},
    ])
    assert not final.success
    assert [s["name"] for s in spans_of(trace, "agent-phase")] == [
        "research", "execute", "select"]

    # ncl: debug runs, but no continuous-learning calls appear in the trace
    final, trace = run("ncl", [
        {"role": "researcher", "reply": research_reply(FAIL_CODE)},
        {"role": "code-agent", "tool": "execute_code",
         "args": {"source": FAIL_CODE}},
        {"role": "code-agent", "reply": execution_reply(FAIL_CODE, True)},
        {"role": "debugger-0", "reply": debug_reply("", False)},
        {"role": "debugger-1", "tool": "execute_code",
         "args": {"source": PASS_CODE}},
        {"role": "debugger-1", "reply": debug_reply(PASS_CODE, True, 42)},
        {"role": "debugger-2", "reply": debug_reply("", False)},
    ])
    assert final.success
    for banned in ("tavily-search", "extract_code_from_url",
                   "retrieve_extracted_code"):
        assert spans_of(trace, "tool-call", banned) == []
    assert len(spans_of(trace, "agent-phase", "debug-1")) == 1

    # search-and-debug: iterative executions stay within the cap
    steps = [{"role": "researcher", "reply": research_reply(FAIL_CODE)}]
    for _ in range(5):
        steps.append({"role": "code-agent", "tool": "execute_code",
                      "args": {"source": FAIL_CODE}})
    steps.append({"role": "code-agent",
                  "reply": execution_reply(FAIL_CODE, True)})
    final, trace = run("search-and-debug", steps, sd_max_debug_iters=3)
    execute_phase = spans_of(trace, "agent-phase", "execute")[0]
    assert len(spans_of(execute_phase, "tool-call", "execute_code")) <= 3

    stack.shutdown()
    announce("pipeline-mode matrix (toolsets + mode behaviors)")


def test_criterion_memory_contracts(tmp_path):
    """Verbatim round-trip on random corpora, strict two-user isolation,
    and 'satisfied' feedback producing exactly one memory-write span."""
    store = MemoryStore(tmp_path / "memory.db")
    rng = random.Random(1234)
    alphabet = string.ascii_letters + string.digits + " .,;:!?/-_()[]{}\n"
    corpus = ["".join(rng.choice(alphabet) for _ in range(rng.randint(1, 400)))
              for _ in range(50)]
    for text in corpus:
        report = store.save("round", text)
        assert store.fetch("round", report["verbatim_record_id"]).text == text

    # interleaved two-user workload
    saved = {"alice": [], "bob": []}
    for i in range(40):
        user = "alice" if i % 3 else "bob"
        text = f"{user} note {i} " + "".join(
            rng.choice(string.ascii_lowercase) for _ in range(12))
        store.save(user, text)
        saved[user].append(text)
    for user, other in (("alice", "bob"), ("bob", "alice")):
        hits = store.search(user, "note", limit=1000)["semantic"]
        texts = {h["text"] for h in hits}
        assert texts == set(saved[user])
        assert not texts & set(saved[other])

    # satisfied feedback -> exactly one save_to_memory span
    stack = make_stack(tmp_path / "root")
    steps = [
        {"role": "orchestrator",
         "reply": json.dumps({"route": "simple", "rationale": "easy"})},
        {"role": "orchestrator", "tool": "execute_code",
         "args": {"source": PASS_CODE}},
        {"role": "orchestrator",
         "reply": json.dumps({"answer": 42, "analysis": "done"})},
    ]
    runtime = Runtime(
        config=configure_pipeline("deepsolver"),
        gateway=scripted_gateway(steps),
        invoker=stack.direct_invoker(),
        tracer=stack.tracer,
        emitter=EventEmitter(),
        memory=stack.memory,
        sessions=stack.sessions,
    )
    session = stack.sessions.create_session("u1")
    orchestrate_turn(runtime, session, "solve and remember")
    effect = apply_feedback(runtime, session, "satisfied")
    assert effect["memory_saved"]
    trace = stack.sessions.fetch_trace(session.turns[-1].turn_id)
    saves = []

    def walk(node):
        for child in node.get("children", []):
            if child["kind"] == "tool-call" and child["name"] == "save_to_memory":
                saves.append(child)
            walk(child)

    walk(trace)
    assert len(saves) == 1
    stack.shutdown()
    announce("memory contracts (round-trip, isolation, one write span)")
