"""Benchmark execution with per-attempt child-process isolation.

Every attempt gets a fresh Python subprocess and a fresh sandbox
directory; between attempts the shared extraction cache is cleared and
leftover agent temp files removed. A crashing child becomes a
workflow-failure record for that attempt only; siblings continue.
"""

from __future__ import annotations

import json
import logging
import shutil
import subprocess
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

from ..errors import PreconditionError
from .child import RECORD_MARKER
from .metrics import AttemptRecord
from .tasks import TaskSpec

logger = logging.getLogger(__name__)

DEFAULT_ATTEMPT_TIMEOUT_S = 900.0


@dataclass
class BenchConfig:
    """One system configuration to evaluate."""

    config_id: str
    mode: str = "deepsolver"
    model: dict = field(default_factory=dict)
    pipeline: dict = field(default_factory=dict)  # extra configure overrides

    def to_doc(self) -> dict:
        return {"config_id": self.config_id, "mode": self.mode,
                "model": self.model, "pipeline": self.pipeline}

    @classmethod
    def from_doc(cls, doc: dict) -> "BenchConfig":
        return cls(
            config_id=doc["config_id"],
            mode=doc.get("mode", "deepsolver"),
            model=dict(doc.get("model") or {}),
            pipeline=dict(doc.get("pipeline") or {}),
        )


def _failure_record(task: TaskSpec, level: int, config_id: str,
                    repetition: int, elapsed_s: float,
                    reason: str) -> AttemptRecord:
    return AttemptRecord(
        task_id=task.task_id,
        level=level,
        config_id=config_id,
        repetition=repetition,
        correct=False,
        workflow_failure=True,
        elapsed_s=round(elapsed_s, 6),
        category=task.category,
        reason=reason,
    )


def run_attempt_in_child(
    task: TaskSpec,
    level: int,
    config: BenchConfig,
    repetition: int,
    work_dir: Path,
    timeout_s: float = DEFAULT_ATTEMPT_TIMEOUT_S,
) -> AttemptRecord:
    sandbox = Path(tempfile.mkdtemp(
        prefix=f"{config.config_id}-{task.task_id}-l{level}-r{repetition}-",
        dir=work_dir,
    ))
    job = {
        "task": task.to_doc(),
        "task_source": f"{task.task_id}.json",
        "level": level,
        "config_id": config.config_id,
        "mode": config.mode,
        "model": config.model,
        "pipeline": config.pipeline,
        "repetition": repetition,
        "sandbox_root": str(sandbox),
    }
    job_path = sandbox / "job.json"
    job_path.write_text(json.dumps(job), encoding="utf-8")
    started = time.monotonic()
    try:
        proc = subprocess.run(
            [sys.executable, "-m", "solverkit.bench.child", str(job_path)],
            capture_output=True, text=True, timeout=timeout_s,
        )
    except subprocess.TimeoutExpired:
        return _failure_record(task, level, config.config_id, repetition,
                               time.monotonic() - started, "attempt timed out")
    elapsed = time.monotonic() - started
    if proc.returncode != 0:
        tail = (proc.stderr or "").strip().splitlines()
        return _failure_record(
            task, level, config.config_id, repetition, elapsed,
            f"child exited {proc.returncode}: {tail[-1] if tail else 'no stderr'}",
        )
    for line in reversed((proc.stdout or "").splitlines()):
        if line.startswith(RECORD_MARKER):
            doc = json.loads(line[len(RECORD_MARKER):])
            return AttemptRecord.from_doc(doc)
    return _failure_record(task, level, config.config_id, repetition, elapsed,
                           "child produced no attempt record")


def run_benchmark(
    tasks: list[TaskSpec],
    configs: list[BenchConfig],
    repetitions: int,
    work_dir: str | Path,
    levels: tuple[int, ...] = (0, 1),
    attempt_timeout_s: float = DEFAULT_ATTEMPT_TIMEOUT_S,
    shared_cache=None,
    on_attempt_start: Callable[[dict], None] | None = None,
    records_path: str | Path | None = None,
    parallel_configs: int = 1,
) -> list[AttemptRecord]:
    """Run tasks x levels x repetitions for every configuration.

    Produces exactly len(tasks) * len(levels) * repetitions * len(configs)
    records; crashes become workflow-failure records. Records are appended
    to ``records_path`` (newline-delimited JSON) as they complete.
    """
    if repetitions < 1:
        raise PreconditionError("repetitions must be >= 1")
    if not tasks or not configs:
        raise PreconditionError("tasks and configs must be non-empty")
    work_dir = Path(work_dir)
    work_dir.mkdir(parents=True, exist_ok=True)
    ndjson = Path(records_path) if records_path else work_dir / "records.ndjson"
    write_lock = __import__("threading").Lock()

    def isolate() -> None:
        # complete isolation between attempts: empty extraction cache and
        # no temp files left behind by prior agents
        if shared_cache is not None:
            shared_cache.clear()
        tmp = work_dir / "tmp"
        if tmp.exists():
            shutil.rmtree(tmp, ignore_errors=True)
        tmp.mkdir(exist_ok=True)

    def run_config(config: BenchConfig) -> list[AttemptRecord]:
        records = []
        for task in tasks:
            for level in levels:
                for repetition in range(1, repetitions + 1):
                    isolate()
                    if on_attempt_start is not None:
                        on_attempt_start({
                            "task_id": task.task_id, "level": level,
                            "config_id": config.config_id,
                            "repetition": repetition,
                        })
                    record = run_attempt_in_child(
                        task, level, config, repetition, work_dir,
                        timeout_s=attempt_timeout_s,
                    )
                    records.append(record)
                    with write_lock, ndjson.open("a", encoding="utf-8") as fh:
                        fh.write(json.dumps(record.to_doc()) + "\n")
        return records

    all_records: list[AttemptRecord] = []
    if parallel_configs > 1:
        with ThreadPoolExecutor(max_workers=parallel_configs) as pool:
            for batch in pool.map(run_config, configs):
                all_records.extend(batch)
    else:
        for config in configs:
            all_records.extend(run_config(config))
    return all_records


def load_records(path: str | Path) -> list[AttemptRecord]:
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line:
            records.append(AttemptRecord.from_doc(json.loads(line)))
    return records
