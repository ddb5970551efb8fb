"""Pipeline configurations.

Modes map 1:1 onto the evaluated system variants:

======================  ==========================================================
mode                    toolsets per role (memory tools excluded, see below)
======================  ==========================================================
deepsolver              researcher: tavily-search, extract_code_from_url,
                        retrieve_extracted_code, quick_introspect
                        code-agent: tavily-search, extract_code_from_url,
                        retrieve_extracted_code, check_installed_packages,
                        install_dependencies, execute_code
                        debugger: every tool except save_to_memory
                        output-processor: none; debug phase enabled (fanout 3)
native                  researcher: none
                        code-agent: execute_code, check_installed_packages,
                        install_dependencies; debug disabled
search-and-debug        researcher: tavily-search
                        code-agent: execute_code, check_installed_packages,
                        install_dependencies (iterative self-debug loop);
                        debug disabled
nsr                     deepsolver minus quick_introspect on the researcher;
                        debug phase disabled (code agent executes once)
ncl                     deepsolver minus tavily-search, extract_code_from_url
                        and retrieve_extracted_code on every role;
                        debug phase stays enabled
simple-only             orchestrator quick path only; pipeline roles unused
======================  ==========================================================

With memory enabled, search_memory is added to each non-empty role toolset
and the orchestrator additionally gets save_to_memory. Benchmark runs force
memory off.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..errors import InvalidOverrideError
from ..models.gateway import ModelConfig
from ..toolbus.registry import AgentRole

MODES = ("deepsolver", "native", "search-and-debug", "nsr", "ncl", "simple-only")

CONTINUOUS_LEARNING_TOOLS = frozenset({
    "tavily-search", "extract_code_from_url", "retrieve_extracted_code",
})

_RESEARCHER_FULL = [
    "tavily-search", "extract_code_from_url", "retrieve_extracted_code",
    "quick_introspect",
]
_CODE_AGENT_FULL = [
    "tavily-search", "extract_code_from_url", "retrieve_extracted_code",
    "check_installed_packages", "install_dependencies", "execute_code",
]
_CODE_AGENT_MIN = [
    "execute_code", "check_installed_packages", "install_dependencies",
]
_DEBUGGER_FULL = [
    "quick_introspect", "runtime_probe_snippet", "check_package_version",
    "parse_local_package", "query_knowledge_graph", "execute_shell_command",
    "create_and_execute_script", "read_file",
    "tavily-search", "extract_code_from_url", "retrieve_extracted_code",
    "execute_code", "check_installed_packages", "install_dependencies",
]
_ORCHESTRATOR_BASE = [
    "check_installed_packages", "install_dependencies", "execute_code",
]


def _strip(tools: list[str], removed: frozenset[str]) -> list[str]:
    return [t for t in tools if t not in removed]


_MODE_TOOLSETS: dict[str, dict[str, list[str]]] = {
    "deepsolver": {
        "researcher": _RESEARCHER_FULL,
        "code-agent": _CODE_AGENT_FULL,
        "debugger": _DEBUGGER_FULL,
        "output-processor": [],
    },
    "native": {
        "researcher": [],
        "code-agent": _CODE_AGENT_MIN,
        "debugger": [],
        "output-processor": [],
    },
    "search-and-debug": {
        "researcher": ["tavily-search"],
        "code-agent": _CODE_AGENT_MIN,
        "debugger": [],
        "output-processor": [],
    },
    "nsr": {
        "researcher": _strip(_RESEARCHER_FULL, frozenset({"quick_introspect"})),
        "code-agent": _CODE_AGENT_FULL,
        "debugger": [],
        "output-processor": [],
    },
    "ncl": {
        "researcher": _strip(_RESEARCHER_FULL, CONTINUOUS_LEARNING_TOOLS),
        "code-agent": _strip(_CODE_AGENT_FULL, CONTINUOUS_LEARNING_TOOLS),
        "debugger": _strip(_DEBUGGER_FULL, CONTINUOUS_LEARNING_TOOLS),
        "output-processor": [],
    },
    "simple-only": {
        "researcher": [],
        "code-agent": [],
        "debugger": [],
        "output-processor": [],
    },
}

_DEBUG_ENABLED = {"deepsolver": True, "ncl": True}


@dataclass
class PipelineConfig:
    mode: str = "deepsolver"
    model: ModelConfig = field(default_factory=ModelConfig)
    debug_fanout: int = 3
    sd_max_debug_iters: int = 3
    memory_enabled: bool = False
    toolset_overrides: dict[str, list[str]] = field(default_factory=dict)
    use_wire: bool = False
    simple_memory_threshold: float = 0.85
    max_agent_steps: int = 24
    config_id: str = ""

    @property
    def debug_enabled(self) -> bool:
        return _DEBUG_ENABLED.get(self.mode, False)

    @property
    def iterative_execute(self) -> bool:
        return self.mode == "search-and-debug"

    def toolset(self, role: AgentRole | str) -> list[str]:
        role_value = role.value if isinstance(role, AgentRole) else role
        if role_value == "orchestrator":
            tools = list(_ORCHESTRATOR_BASE)
            if self.memory_enabled:
                tools = ["save_to_memory", "search_memory", *tools]
            return tools
        if role_value in self.toolset_overrides:
            return list(self.toolset_overrides[role_value])
        tools = list(_MODE_TOOLSETS[self.mode].get(role_value, []))
        if self.memory_enabled and tools:
            tools = ["search_memory", *tools]
        return tools

    def dump(self) -> dict:
        roles = ["orchestrator", "researcher", "code-agent", "debugger",
                 "output-processor"]
        return {
            "mode": self.mode,
            "config_id": self.config_id or self.mode,
            "model": self.model.to_doc(),
            "debug_enabled": self.debug_enabled,
            "debug_fanout": self.debug_fanout if self.debug_enabled else 0,
            "sd_max_debug_iters": self.sd_max_debug_iters,
            "memory_enabled": self.memory_enabled,
            "use_wire": self.use_wire,
            "toolsets": {role: self.toolset(role) for role in roles},
        }


def configure_pipeline(mode: str, **overrides) -> PipelineConfig:
    """Build and validate a pipeline config for one of the known modes."""
    if mode not in MODES:
        raise InvalidOverrideError(f"unknown mode {mode!r}; expected one of {MODES}")
    config = PipelineConfig(mode=mode)
    model = overrides.pop("model", None)
    if model is not None:
        if isinstance(model, dict):
            model = ModelConfig.from_doc(model)
        config = replace(config, model=model)
    unknown = set(overrides) - set(PipelineConfig.__dataclass_fields__)
    if unknown:
        raise InvalidOverrideError(f"unknown overrides: {sorted(unknown)}")
    config = replace(config, **overrides)
    _validate(config)
    return config


def _validate(config: PipelineConfig) -> None:
    if config.debug_enabled and config.debug_fanout < 1:
        raise InvalidOverrideError(
            f"debug_fanout must be >= 1 in {config.mode} mode")
    if config.sd_max_debug_iters < 1:
        raise InvalidOverrideError("sd_max_debug_iters must be >= 1")
    researcher = set(config.toolset("researcher"))
    if config.mode == "native" and researcher:
        raise InvalidOverrideError("native mode requires an empty researcher toolset")
    if config.mode == "nsr" and "quick_introspect" in researcher:
        raise InvalidOverrideError("nsr mode removes quick_introspect")
    if config.mode == "ncl":
        for role in ("researcher", "code-agent", "debugger"):
            banned = set(config.toolset(role)) & CONTINUOUS_LEARNING_TOOLS
            if banned:
                raise InvalidOverrideError(
                    f"ncl mode removes {sorted(banned)} from {role}")
    if config.mode in ("native", "nsr", "search-and-debug", "simple-only"):
        if config.toolset("debugger"):
            raise InvalidOverrideError(
                f"{config.mode} mode disables the debug phase")
