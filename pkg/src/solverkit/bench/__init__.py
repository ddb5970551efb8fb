from .grading import compare_answer, grade_answer
from .metrics import (
    AttemptRecord,
    DifficultyRow,
    MetricsCell,
    MetricsTable,
    compute_difficulty,
    compute_metrics,
    expected_record_count,
)
from .report import emit_report
from .runner import BenchConfig, load_records, run_attempt_in_child, run_benchmark
from .tasks import CATEGORIES, OUTPUT_TYPES, TaskSpec, load_tasks, parse_task

__all__ = [
    "compare_answer",
    "grade_answer",
    "AttemptRecord",
    "DifficultyRow",
    "MetricsCell",
    "MetricsTable",
    "compute_difficulty",
    "compute_metrics",
    "expected_record_count",
    "emit_report",
    "BenchConfig",
    "load_records",
    "run_attempt_in_child",
    "run_benchmark",
    "CATEGORIES",
    "OUTPUT_TYPES",
    "TaskSpec",
    "load_tasks",
    "parse_task",
]
