from .agent import AgentRun, run_agent
from .answers import answers_equal, extract_answer, normalize
from .config import MODES, PipelineConfig, configure_pipeline
from .deepsolver import (
    phase_debug,
    phase_execute,
    phase_research,
    run_deep_solver,
    select_output,
)
from .events import EventEmitter, NullEmitter
from .orchestrator import (
    EscalationSignal,
    apply_feedback,
    orchestrate_turn,
    run_simple_solver,
)
from .outputs import (
    DebugOutput,
    ExecutionOutput,
    FinalOutput,
    OrchestratorDecision,
    ResearchOutput,
)
from .runtime import Runtime

__all__ = [
    "AgentRun",
    "run_agent",
    "answers_equal",
    "extract_answer",
    "normalize",
    "MODES",
    "PipelineConfig",
    "configure_pipeline",
    "phase_debug",
    "phase_execute",
    "phase_research",
    "run_deep_solver",
    "select_output",
    "EventEmitter",
    "NullEmitter",
    "EscalationSignal",
    "apply_feedback",
    "orchestrate_turn",
    "run_simple_solver",
    "DebugOutput",
    "ExecutionOutput",
    "FinalOutput",
    "OrchestratorDecision",
    "ResearchOutput",
    "Runtime",
]
