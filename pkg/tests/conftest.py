from __future__ import annotations

import json
import textwrap
from pathlib import Path

import pytest
import yaml

from solverkit.assembly import Stack, StackConfig
from solverkit.clockutil import FixedClock
from solverkit.engine.config import PipelineConfig, configure_pipeline
from solverkit.models.gateway import ModelConfig, ModelGateway
from solverkit.models.scripted import ScriptedBackend
from solverkit.search.backend import FixtureSearchBackend

FIXTURES = Path(__file__).parent / "fixtures"


# ---------------------------------------------------------------------------
# fixture target-runtime package: 2 modules, 3 classes, 7 functions


FIXTURE_PACKAGE_FILES = {
    "__init__.py": '"""Fixture package for introspection tests."""\n'
                   "from .core import Structure\n",
    "core.py": textwrap.dedent(
        '''
        """Structures and lattices."""

        import math
        import json


        class Structure:
            """A crystal structure."""

            species: list = []
            charge = 0.0

            def __init__(self, sites, lattice):
                self.sites = sites
                self.lattice = lattice

            def volume(self) -> float:
                return self.lattice ** 3

            def density(self, mass: float = 1.0) -> float:
                return mass / self.volume()

            def from_dict(self, data: dict):
                return Structure(data["sites"], data["lattice"])


        class Lattice(Structure):
            def scale(self, factor: float = 2.0):
                return Lattice(self.sites, self.lattice * factor)


        def make_structure(x: int = 3):
            return Structure([], x)


        def parse_cif(text: str) -> dict:
            return json.loads(text)
        '''
    ).lstrip(),
    "utils.py": textwrap.dedent(
        '''
        """Numeric helpers."""

        import math


        class Helper:
            def clampit(self, v, lo: float = 0.0, hi: float = 1.0):
                return max(lo, min(hi, v))


        def norm(values):
            return math.sqrt(sum(v * v for v in values))


        def scale(values, factor=1.0):
            return [v * factor for v in values]


        def shift(values, offset):
            return [v + offset for v in values]


        def clamp(v, lo, hi):
            return max(lo, min(hi, v))


        def average(values):
            return sum(values) / len(values)
        '''
    ).lstrip(),
}


def write_fixture_package(base: Path, name: str = "fixturepkg") -> Path:
    pkg = base / name
    pkg.mkdir(parents=True, exist_ok=True)
    for rel, content in FIXTURE_PACKAGE_FILES.items():
        (pkg / rel).write_text(content)
    return pkg


@pytest.fixture
def fixture_package(tmp_path):
    return write_fixture_package(tmp_path)


# ---------------------------------------------------------------------------
# web extraction fixtures


def write_web_fixtures(base: Path) -> dict[str, str]:
    """Write the extraction corpus; returns name -> file:// URL."""
    web = base / "web"
    web.mkdir(parents=True, exist_ok=True)

    notebook = {
        "cells": [
            {"cell_type": "markdown", "source": ["# Intro\n", "\n",
                                                 "Setup paragraph.\n"]},
            {"cell_type": "code", "source": ["import numpy as np\n"]},
            {"cell_type": "code", "source": ["x = np.arange(4)\n"]},
            {"cell_type": "markdown", "source": ["Now plot it.\n"]},
            {"cell_type": "code", "source": ["print(x.sum())\n"]},
            {"cell_type": "code", "source": ["y = x * 2\n"]},
            {"cell_type": "code", "source": ["print(y)\n"]},
        ],
        "metadata": {},
        "nbformat": 4,
        "nbformat_minor": 5,
    }
    (web / "tutorial.ipynb").write_text(json.dumps(notebook))

    (web / "docs.html").write_text(
        "<!doctype html>\n<html><body>\n"
        "<h1>Usage</h1>\n"
        "<p>First import the library.</p>\n"
        "<pre>import fixturepkg\ns = fixturepkg.Structure([], 2)</pre>\n"
        "<p>Then compute the volume.</p>\n"
        "<pre>print(s.volume())</pre>\n"
        "<p>That is all.</p>\n"
        "</body></html>\n"
    )

    (web / "guide.md").write_text(
        "# Guide\n\n"
        "Install the package first.\n\n"
        "```bash\npip install fixturepkg\n```\n\n"
        "Then use it from code.\n\n"
        "```python\nfrom fixturepkg import Structure\nprint(Structure([], 1))\n```\n\n"
        "Closing remarks.\n"
    )

    (web / "snippet.py").write_text(
        "def answer():\n    return 42\n\nprint(answer())\n"
    )

    (web / "empty.html").write_text(
        "<!doctype html>\n<html><body><p>No code here at all.</p></body></html>\n"
    )

    (web / "index.html").write_text(
        "<!doctype html>\n<html><body>\n"
        "<p>Start page.</p>\n"
        "<pre>print('index')</pre>\n"
        "<a href='page1.html'>one</a>\n"
        "<a href='page2.html'>two</a>\n"
        "<a href='https://elsewhere.example/off.html'>offsite</a>\n"
        "</body></html>\n"
    )
    (web / "page1.html").write_text(
        "<!doctype html><html><body><pre>print('page1')</pre>"
        "<a href='index.html'>back</a></body></html>\n"
    )
    (web / "page2.html").write_text(
        "<!doctype html><html><body><p>no code</p></body></html>\n"
    )

    return {p.stem + p.suffix: p.resolve().as_uri() for p in web.iterdir()}


@pytest.fixture
def web_fixtures(tmp_path):
    return write_web_fixtures(tmp_path)


# ---------------------------------------------------------------------------
# scripted scenarios


def script_text(steps: list[dict]) -> str:
    return yaml.safe_dump({"steps": steps}, sort_keys=False)


def write_script(path: Path, steps: list[dict]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(script_text(steps))
    return path


def scripted_gateway(steps: list[dict], **config_kwargs) -> ModelGateway:
    config = ModelConfig(backend="scripted", **config_kwargs)
    return ModelGateway(config, scripted=ScriptedBackend.from_text(
        script_text(steps)))


def research_reply(code: str, user_id: str = "u1", query: str = "q",
                   packages: list[str] | None = None) -> str:
    return json.dumps({
        "user_id": user_id,
        "original_query": query,
        "required_packages": packages or [],
        "code": code,
    })


def execution_reply(code: str, needs_debug: bool, user_id: str = "u1",
                    query: str = "q") -> str:
    return json.dumps({
        "user_id": user_id,
        "original_query": query,
        "executed_code": code,
        "execution_output": {},
        "needs_debug": needs_debug,
    })


def debug_reply(code: str, succeeded: bool, answer=None) -> str:
    return json.dumps({
        "final_code": code,
        "execution_output": {},
        "succeeded": succeeded,
        "extracted_answer": answer,
    })


# ---------------------------------------------------------------------------
# stacks


def make_stack(root: Path, pipeline: PipelineConfig | None = None,
               gateway: ModelGateway | None = None,
               fixed_clock: bool = False, **overrides) -> Stack:
    config = StackConfig(
        root=root,
        crawl_delay_s=0.0,
        honor_robots=False,
        **overrides,
    )
    search = FixtureSearchBackend([
        {"title": "fixturepkg docs", "url": "https://docs.example/fixturepkg",
         "text": "fixturepkg Structure volume density lattice"},
        {"title": "numpy guide", "url": "https://docs.example/numpy",
         "text": "numpy arrays arange sum"},
    ])
    return Stack(
        config,
        pipeline or PipelineConfig(),
        clock=FixedClock() if fixed_clock else None,
        search_backend=search,
        gateway=gateway,
    )


@pytest.fixture
def stack(tmp_path):
    s = make_stack(tmp_path / "stackroot")
    yield s
    s.shutdown()


def deep_pipeline(**overrides) -> PipelineConfig:
    return configure_pipeline("deepsolver", **overrides)


# ---------------------------------------------------------------------------
# benchmark micro-suite: four tasks with scripted per-task scenarios


MICRO_TASKS = [
    {
        "task_id": "micro-number",
        "user_query": {
            "0": "Print the float 42.0 using python's print function.",
            "1": "Give me the number forty-two as a float.",
        },
        "sources": "none",
        "input_type": "none",
        "output_type": "number",
        "answer": 42.0,
        "absolute_tolerance": 1e-6,
        "unit": "dimensionless",
        "solution_code_or_process": "print(42.0)",
        "reference_link": "",
        "official_documentation": "",
        "notes": "fixture task",
        "category": "simulation",
    },
    {
        "task_id": "micro-string",
        "user_query": {
            "0": "Print the space group symbol I4/mmm verbatim.",
            "1": "What is the space group symbol of the tetragonal fixture?",
        },
        "sources": "none",
        "input_type": "none",
        "output_type": "string",
        "answer": "I4/mmm",
        "absolute_tolerance": 0,
        "unit": "",
        "solution_code_or_process": "print('I4/mmm')",
        "reference_link": "",
        "official_documentation": "",
        "notes": "fixture task",
        "category": "data-retrieval",
    },
    {
        "task_id": "micro-list",
        "user_query": {
            "0": "Print the list [71, 12] as JSON.",
            "1": "Return the two magic numbers in order.",
        },
        "sources": "none",
        "input_type": "none",
        "output_type": "list-of-numbers",
        "answer": [71, 12],
        "absolute_tolerance": 1e-3,
        "unit": "",
        "solution_code_or_process": "print([71, 12])",
        "reference_link": "",
        "official_documentation": "",
        "notes": "fixture task",
        "category": "data-analysis",
    },
    {
        "task_id": "micro-ids",
        "user_query": {
            "0": "Print the two icsd identifiers as a JSON list.",
            "1": "Which icsd entries match the fixture material?",
        },
        "sources": "none",
        "input_type": "none",
        "output_type": "list-of-strings",
        "answer": ["icsd-56789", "icsd-11111"],
        "absolute_tolerance": 0,
        "unit": "",
        "solution_code_or_process": "print(json.dumps(ids))",
        "reference_link": "",
        "official_documentation": "",
        "notes": "fixture task",
        "category": "data-processing",
        "order_insensitive": True,
    },
]

MICRO_ANSWER_CODE = {
    "micro-number": "print(42.0)",
    "micro-string": "print('I4/mmm')",
    "micro-list": "print([71, 12])",
    "micro-ids": 'import json\nprint(json.dumps(["icsd-11111", "icsd-56789"]))',
}


def micro_scenario_steps(task_id: str) -> list[dict]:
    code = MICRO_ANSWER_CODE[task_id]
    return [
        {"role": "researcher", "reply": research_reply(code, user_id="bench",
                                                       query=task_id)},
        {"role": "code-agent", "tool": "execute_code",
         "args": {"source": code}},
        {"role": "code-agent", "reply": execution_reply(code, False,
                                                        user_id="bench",
                                                        query=task_id)},
    ]


def write_micro_suite(base: Path, poison: bool = False) -> tuple[Path, str]:
    """Write tasks + per-task scenario scripts; returns (tasks_dir,
    script path template)."""
    tasks_dir = base / "tasks"
    tasks_dir.mkdir(parents=True, exist_ok=True)
    scripts_dir = base / "scripts"
    scripts_dir.mkdir(parents=True, exist_ok=True)
    for task in MICRO_TASKS:
        (tasks_dir / f"{task['task_id']}.json").write_text(json.dumps(task))
        write_script(scripts_dir / f"{task['task_id']}.yaml",
                     micro_scenario_steps(task["task_id"]))
    if poison:
        bad = dict(MICRO_TASKS[0])
        bad["task_id"] = "micro-poison"
        (tasks_dir / "micro-poison.json").write_text(json.dumps(bad))
        # no scenario script for micro-poison: the child process dies at
        # startup, which is exactly the injected-crash case
    return tasks_dir, str(scripts_dir / "{task_id}.yaml")
