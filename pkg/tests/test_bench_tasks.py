from __future__ import annotations

import json

import pytest

from solverkit.bench import load_tasks, parse_task
from solverkit.errors import TaskSchemaError

from conftest import MICRO_TASKS, write_micro_suite


def test_load_micro_suite(tmp_path):
    tasks_dir, _ = write_micro_suite(tmp_path)
    tasks = load_tasks(tasks_dir)
    assert len(tasks) == 4
    assert {t.task_id for t in tasks} == {
        "micro-number", "micro-string", "micro-list", "micro-ids"}
    number = next(t for t in tasks if t.task_id == "micro-number")
    assert number.answer == 42.0
    assert number.query(0).startswith("Print")
    assert number.query(1).startswith("Give me")


def test_empty_dir_yields_empty_list(tmp_path):
    empty = tmp_path / "none"
    empty.mkdir()
    assert load_tasks(empty) == []


def test_missing_answer_names_field(tmp_path):
    doc = dict(MICRO_TASKS[0])
    del doc["answer"]
    (tmp_path / "broken.json").write_text(json.dumps(doc))
    with pytest.raises(TaskSchemaError, match=r"broken\.json.*'answer'"):
        load_tasks(tmp_path)


def test_missing_level_rejected():
    doc = dict(MICRO_TASKS[0])
    doc["user_query"] = {"0": "only level zero"}
    with pytest.raises(TaskSchemaError, match="user_query"):
        parse_task(doc, source="t.json")


def test_answer_type_must_match_output_type():
    doc = dict(MICRO_TASKS[0])
    doc["answer"] = "forty-two"
    with pytest.raises(TaskSchemaError, match="answer"):
        parse_task(doc, source="t.json")


def test_negative_tolerance_rejected():
    doc = dict(MICRO_TASKS[0])
    doc["absolute_tolerance"] = -0.5
    with pytest.raises(TaskSchemaError, match="absolute_tolerance"):
        parse_task(doc, source="t.json")


def test_unknown_category_rejected():
    doc = dict(MICRO_TASKS[0])
    doc["category"] = "wizardry"
    with pytest.raises(TaskSchemaError, match="category"):
        parse_task(doc, source="t.json")


def test_unparseable_json_reported_with_filename(tmp_path):
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(TaskSchemaError, match="bad.json"):
        load_tasks(tmp_path)


def test_task_id_defaults_to_filename():
    doc = dict(MICRO_TASKS[0])
    del doc["task_id"]
    task = parse_task(doc, source="from-filename.json")
    assert task.task_id == "from-filename"
