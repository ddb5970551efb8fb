"""Typed hand-offs between pipeline phases."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from ..errors import WorkflowFailureError

STREAMS_SCHEMA = {
    "type": "object",
    "properties": {
        "stdout": {"type": "string"},
        "stderr": {"type": "string"},
        "exit_status": {"type": "integer"},
    },
}

RESEARCH_SCHEMA = {
    "type": "object",
    "properties": {
        "user_id": {"type": "string"},
        "original_query": {"type": "string"},
        "required_packages": {"type": "array", "items": {"type": "string"}},
        "code": {"type": "string"},
    },
    "required": ["user_id", "original_query", "required_packages", "code"],
}

EXECUTION_SCHEMA = {
    "type": "object",
    "properties": {
        "user_id": {"type": "string"},
        "original_query": {"type": "string"},
        "executed_code": {"type": "string"},
        "execution_output": STREAMS_SCHEMA,
        "needs_debug": {"type": "boolean"},
    },
    "required": ["needs_debug"],
}

DEBUG_SCHEMA = {
    "type": "object",
    "properties": {
        "final_code": {"type": "string"},
        "execution_output": STREAMS_SCHEMA,
        "succeeded": {"type": "boolean"},
    },
    "required": ["succeeded"],
}

DECISION_SCHEMA = {
    "type": "object",
    "properties": {
        "route": {"type": "string", "enum": ["clarify", "simple", "deep"]},
        "rationale": {"type": "string"},
        "question": {"type": "string"},
    },
    "required": ["route"],
}

SIMPLE_SCHEMA = {
    "type": "object",
    "properties": {
        "answer": {},
        "analysis": {"type": "string"},
        "escalate": {"type": "boolean"},
        "reason": {"type": "string"},
    },
}


@dataclass
class ResearchOutput:
    user_id: str
    original_query: str
    required_packages: list[str]
    code: str

    @classmethod
    def from_doc(cls, doc: dict) -> "ResearchOutput":
        try:
            return cls(
                user_id=doc["user_id"],
                original_query=doc["original_query"],
                required_packages=list(doc["required_packages"]),
                code=doc["code"],
            )
        except KeyError as exc:
            raise WorkflowFailureError(f"research output missing {exc}") from exc

    def to_doc(self) -> dict:
        return {
            "user_id": self.user_id,
            "original_query": self.original_query,
            "required_packages": self.required_packages,
            "code": self.code,
        }


@dataclass
class ExecutionOutput:
    user_id: str
    original_query: str
    executed_code: str
    execution_output: dict
    needs_debug: bool

    def to_doc(self) -> dict:
        return {
            "user_id": self.user_id,
            "original_query": self.original_query,
            "executed_code": self.executed_code,
            "execution_output": self.execution_output,
            "needs_debug": self.needs_debug,
        }


@dataclass
class DebugOutput:
    agent_index: int
    strategy_emphasis: str  # local | exploratory | research
    final_code: str
    execution_output: dict
    succeeded: bool
    extracted_answer: Any = None
    analysis: str = ""

    def to_doc(self) -> dict:
        return {
            "agent_index": self.agent_index,
            "strategy_emphasis": self.strategy_emphasis,
            "final_code": self.final_code,
            "execution_output": self.execution_output,
            "succeeded": self.succeeded,
            "extracted_answer": self.extracted_answer,
            "analysis": self.analysis,
        }


@dataclass
class FinalOutput:
    original_query: str
    success: bool
    final_code: str
    execution_results: dict
    processed_output: dict = field(default_factory=dict)  # {answer, analysis}

    @property
    def answer(self) -> Any:
        return self.processed_output.get("answer")

    def to_doc(self) -> dict:
        return {
            "original_query": self.original_query,
            "success": self.success,
            "final_code": self.final_code,
            "execution_results": self.execution_results,
            "processed_output": self.processed_output,
        }


@dataclass
class OrchestratorDecision:
    route: str  # clarify | simple | deep
    rationale: str = ""
    memory_hits_used: list = field(default_factory=list)
    question: str | None = None

    def to_doc(self) -> dict:
        return {
            "route": self.route,
            "rationale": self.rationale,
            "memory_hits_used": self.memory_hits_used,
            "question": self.question,
        }
