"""One isolated benchmark attempt, run as a fresh child process.

Reads a job document, builds an entirely private stack under the attempt
sandbox, runs the pipeline on the task query at the requested level,
grades the answer and prints the attempt record as the last stdout line.
Memory tools are forced off in benchmark mode.
"""

from __future__ import annotations

import json
import sys
import time

RECORD_MARKER = "ATTEMPT_RECORD:"


def run_attempt(job: dict) -> dict:
    from ..assembly import build_stack
    from ..engine.config import configure_pipeline
    from ..engine.deepsolver import run_deep_solver
    from ..models.gateway import ModelConfig
    from .grading import grade_answer
    from .tasks import parse_task

    task = parse_task(job["task"], source=job.get("task_source", "<job>"))
    level = int(job["level"])
    model_doc = dict(job.get("model") or {})
    script = model_doc.get("script_path")
    if script and "{task_id}" in script:
        model_doc["script_path"] = script.replace("{task_id}", task.task_id)
    overrides = dict(job.get("pipeline") or {})
    overrides.pop("memory_enabled", None)
    pipeline = configure_pipeline(
        job.get("mode", "deepsolver"),
        model=ModelConfig.from_doc(model_doc),
        memory_enabled=False,
        **overrides,
    )
    stack = build_stack(job["sandbox_root"], pipeline,
                        crawl_delay_s=0.0, honor_robots=False,
                        distill_memory=False)
    runtime = stack.runtime()
    started = time.monotonic()
    final = run_deep_solver(runtime, task.query(level), user_id="bench")
    elapsed_s = time.monotonic() - started
    stack.shutdown()

    workflow_failure = bool(final.processed_output.get("workflow_failure"))
    raw_answer = final.processed_output.get("answer")
    correct, reason = False, None
    if final.success and not workflow_failure:
        correct, reason = grade_answer(
            raw_answer, task.answer, task.absolute_tolerance,
            task.output_type, task.order_insensitive,
        )
    code_ref = (final.execution_results or {}).get("code_path") or ""
    return {
        "task_id": task.task_id,
        "level": level,
        "config_id": job["config_id"],
        "repetition": int(job["repetition"]),
        "correct": correct,
        "workflow_failure": workflow_failure,
        "elapsed_s": round(elapsed_s, 6),
        "raw_answer": raw_answer,
        "final_code": code_ref or final.final_code[:2000],
        "category": task.category,
        "reason": reason,
    }


def main(argv: list[str]) -> int:
    with open(argv[0], encoding="utf-8") as fh:
        job = json.load(fh)
    record = run_attempt(job)
    print(RECORD_MARKER + json.dumps(record))
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
