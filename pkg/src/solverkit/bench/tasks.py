"""Benchmark task loading and validation.

One JSON file per task. Each file carries both query phrasings: level "0"
with procedural hints and level "1" with only the high-level objective, so
a directory of N files yields 2N level-tagged questions when both levels
are evaluated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..errors import TaskSchemaError

OUTPUT_TYPES = ("number", "string", "list-of-numbers", "list-of-strings")
CATEGORIES = ("data-retrieval", "data-analysis", "data-management",
              "data-processing", "simulation", "specialized-models")


@dataclass
class TaskSpec:
    task_id: str
    user_query: dict[str, str]  # {"0": ..., "1": ...}
    output_type: str
    answer: Any
    absolute_tolerance: float
    category: str
    sources: Any = None
    input_type: str | None = None
    unit: str = ""
    solution_code_or_process: str = ""
    reference_link: str = ""
    official_documentation: str = ""
    notes: str = ""
    order_insensitive: bool = False
    extras: dict = field(default_factory=dict)

    def query(self, level: int) -> str:
        return self.user_query[str(level)]

    def to_doc(self) -> dict:
        return {
            "task_id": self.task_id,
            "user_query": self.user_query,
            "sources": self.sources,
            "input_type": self.input_type,
            "output_type": self.output_type,
            "answer": self.answer,
            "absolute_tolerance": self.absolute_tolerance,
            "unit": self.unit,
            "solution_code_or_process": self.solution_code_or_process,
            "reference_link": self.reference_link,
            "official_documentation": self.official_documentation,
            "notes": self.notes,
            "category": self.category,
            "order_insensitive": self.order_insensitive,
        }


def _fail(file: str, field_name: str, message: str) -> TaskSchemaError:
    return TaskSchemaError(f"{file}: field {field_name!r} {message}")


def _answer_type_ok(answer: Any, output_type: str) -> bool:
    if output_type == "number":
        return isinstance(answer, (int, float)) and not isinstance(answer, bool)
    if output_type == "string":
        return isinstance(answer, str)
    if output_type == "list-of-numbers":
        return isinstance(answer, list) and all(
            isinstance(x, (int, float)) and not isinstance(x, bool)
            for x in answer)
    if output_type == "list-of-strings":
        return isinstance(answer, list) and all(isinstance(x, str)
                                                for x in answer)
    return False


def parse_task(doc: dict, source: str = "<doc>") -> TaskSpec:
    query = doc.get("user_query")
    if not isinstance(query, dict):
        raise _fail(source, "user_query", "must be a mapping of levels")
    for level in ("0", "1"):
        if level not in query or not isinstance(query[level], str):
            raise _fail(source, "user_query",
                        f"missing level {level!r} phrasing")
    output_type = doc.get("output_type")
    if output_type not in OUTPUT_TYPES:
        raise _fail(source, "output_type", f"must be one of {OUTPUT_TYPES}")
    if "answer" not in doc:
        raise _fail(source, "answer", "is required")
    answer = doc["answer"]
    if not _answer_type_ok(answer, output_type):
        raise _fail(source, "answer", f"does not match output_type {output_type}")
    tolerance = doc.get("absolute_tolerance", 0)
    if not isinstance(tolerance, (int, float)) or tolerance < 0:
        raise _fail(source, "absolute_tolerance", "must be >= 0")
    category = doc.get("category")
    if category not in CATEGORIES:
        raise _fail(source, "category", f"must be one of {CATEGORIES}")
    task_id = doc.get("task_id") or Path(source).stem
    known = {"task_id", "user_query", "sources", "input_type", "output_type",
             "answer", "absolute_tolerance", "unit",
             "solution_code_or_process", "reference_link",
             "official_documentation", "notes", "category",
             "order_insensitive"}
    return TaskSpec(
        task_id=task_id,
        user_query={"0": query["0"], "1": query["1"]},
        output_type=output_type,
        answer=answer,
        absolute_tolerance=float(tolerance),
        category=category,
        sources=doc.get("sources"),
        input_type=doc.get("input_type"),
        unit=doc.get("unit", ""),
        solution_code_or_process=doc.get("solution_code_or_process", ""),
        reference_link=doc.get("reference_link", ""),
        official_documentation=doc.get("official_documentation", ""),
        notes=doc.get("notes", ""),
        order_insensitive=bool(doc.get("order_insensitive", False)),
        extras={k: v for k, v in doc.items() if k not in known},
    )


def load_tasks(directory: str | Path) -> list[TaskSpec]:
    """Load and validate every task file in the directory (sorted)."""
    directory = Path(directory)
    if not directory.is_dir():
        raise TaskSchemaError(f"{directory} is not a readable directory")
    tasks = []
    for path in sorted(directory.glob("*.json")):
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise TaskSchemaError(f"{path.name}: unparseable JSON: {exc}") from exc
        tasks.append(parse_task(doc, source=path.name))
    return tasks
