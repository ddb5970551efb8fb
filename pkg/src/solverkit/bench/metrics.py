"""Benchmark metrics: success rate, pass@k and difficulty classification.

Workflow failures (the pipeline broke, not the solution) are excluded
before anything is computed. Pass@k counts a task as passed when at least
one of its first k remaining repetitions is correct. Difficulty follows
the item-difficulty convention: the fraction of configurations solving a
level-1 task under the pass@3 criterion, with 0.5 splitting simple from
difficult.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Any, Iterable

from ..errors import PreconditionError

PASS_KS = (1, 2, 3)
DIFFICULTY_THRESHOLD = 0.5


@dataclass
class AttemptRecord:
    task_id: str
    level: int  # 0 | 1
    config_id: str
    repetition: int  # 1..R
    correct: bool
    workflow_failure: bool = False
    elapsed_s: float = 0.0
    raw_answer: Any = None
    final_code: str = ""
    category: str = ""
    reason: str | None = None

    def to_doc(self) -> dict:
        return asdict(self)

    @classmethod
    def from_doc(cls, doc: dict) -> "AttemptRecord":
        known = {k: v for k, v in doc.items() if k in cls.__dataclass_fields__}
        return cls(**known)


@dataclass
class MetricsCell:
    n: int
    tasks: int
    success_rate: float
    pass_at: dict[int, float]
    mean_elapsed_s: float

    def to_doc(self) -> dict:
        return {
            "n": self.n,
            "tasks": self.tasks,
            "success_rate": self.success_rate,
            **{f"pass@{k}": v for k, v in self.pass_at.items()},
            "mean_elapsed_s": self.mean_elapsed_s,
        }


@dataclass
class MetricsTable:
    # key: (config_id, level or None, category or None); None = rollup
    cells: dict[tuple, MetricsCell] = field(default_factory=dict)

    def cell(self, config_id: str, level: int | None = None,
             category: str | None = None) -> MetricsCell | None:
        return self.cells.get((config_id, level, category))

    def configs(self) -> list[str]:
        return sorted({key[0] for key in self.cells})


@dataclass
class DifficultyRow:
    task_id: str
    p_value: float
    klass: str  # "simple" | "difficult"

    def to_doc(self) -> dict:
        return {"task_id": self.task_id, "p_value": self.p_value,
                "class": self.klass}


def exclude_workflow_failures(records: Iterable[AttemptRecord]) -> list[AttemptRecord]:
    return [r for r in records if not r.workflow_failure]


def _cell_metrics(records: list[AttemptRecord]) -> MetricsCell:
    by_task: dict[str, list[AttemptRecord]] = {}
    for record in records:
        by_task.setdefault(record.task_id, []).append(record)
    pass_at: dict[int, float] = {}
    for k in PASS_KS:
        passed = 0
        for reps in by_task.values():
            ordered = sorted(reps, key=lambda r: r.repetition)
            if any(r.correct for r in ordered[:k]):
                passed += 1
        pass_at[k] = passed / len(by_task)
    return MetricsCell(
        n=len(records),
        tasks=len(by_task),
        success_rate=sum(r.correct for r in records) / len(records),
        pass_at=pass_at,
        mean_elapsed_s=sum(r.elapsed_s for r in records) / len(records),
    )


def compute_metrics(records: Iterable[AttemptRecord]) -> MetricsTable:
    """Aggregate per (config, level, category) with level/all rollups."""
    included = exclude_workflow_failures(records)
    if not included:
        raise PreconditionError("no records remain after workflow-failure exclusion")
    groups: dict[tuple, list[AttemptRecord]] = {}
    for record in included:
        keys = [
            (record.config_id, record.level, record.category or None),
            (record.config_id, record.level, None),
            (record.config_id, None, None),
        ]
        for key in dict.fromkeys(keys):
            groups.setdefault(key, []).append(record)
    table = MetricsTable()
    for key, cell_records in groups.items():
        table.cells[key] = _cell_metrics(cell_records)
    return table


def compute_difficulty(
    records: Iterable[AttemptRecord],
    threshold: float = DIFFICULTY_THRESHOLD,
) -> list[DifficultyRow]:
    """Item difficulty over level-1 records: P = solving configs / configs."""
    level1 = [r for r in exclude_workflow_failures(records) if r.level == 1]
    if not level1:
        return []
    all_configs = sorted({r.config_id for r in level1})
    by_task: dict[str, dict[str, list[AttemptRecord]]] = {}
    for record in level1:
        by_task.setdefault(record.task_id, {}).setdefault(
            record.config_id, []).append(record)
    rows = []
    for task_id in sorted(by_task):
        solving = 0
        for config_id in all_configs:
            reps = sorted(by_task[task_id].get(config_id, []),
                          key=lambda r: r.repetition)
            if any(r.correct for r in reps[:3]):  # pass@3 criterion
                solving += 1
        p_value = solving / len(all_configs)
        rows.append(DifficultyRow(
            task_id=task_id,
            p_value=p_value,
            klass="simple" if p_value >= threshold else "difficult",
        ))
    return rows


def expected_record_count(questions: int, repetitions: int, configs: int) -> int:
    """Bookkeeping identity: one record per question x repetition x config."""
    return questions * repetitions * configs
