"""Stack assembly: wire the servers, registry and runtime together.

One Stack owns every subsystem for a deployment root: path policy,
execution environment, extraction cache, knowledge graph, memory store,
search backend, model gateway, session store and the frozen default tool
registry (exactly the sixteen built-in tools). Runtimes for pipeline runs
are derived from the stack per turn.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .clockutil import Clock
from .codeintel.extract import CodeExtractor, ExtractionCache, UrlFetcher
from .codeintel.kg import KnowledgeGraph
from .codeintel.tools import register_research_tools
from .engine.config import PipelineConfig, configure_pipeline
from .engine.events import EventEmitter, NullEmitter
from .engine.runtime import Runtime
from .memory.distill import model_distiller
from .memory.store import MemoryStore
from .memory.tools import register_memory_tools
from .models.gateway import ModelConfig, ModelGateway
from .search.backend import FixtureSearchBackend, SearchBackend, search_tool
from .sessions.store import SessionStore
from .sessions.tracing import TracedInvoker, Tracer
from .toolbus.registry import ToolRegistry, bind_direct
from .toolbus.wire import WireClient, serve_wire
from .workspace.environment import (
    Environment,
    SiteDirEnvironment,
    SystemEnvironment,
)
from .workspace.execution import Workspace
from .workspace.policy import PathPolicy
from .workspace.tools import register_workspace_tools

ENV_ROOT = "WORKSPACE_ROOT"
ENV_SITE = "WORKSPACE_ENV"
ENV_TIMEOUT = "WORKSPACE_TIMEOUT_S"


@dataclass
class StackConfig:
    root: Path
    denied_subtrees: list[str] = field(default_factory=list)
    environment_kind: str = "site-dir"  # "site-dir" | "system"
    environment_dir: Path | None = None
    include_base: bool = True
    timeout_s: float = 600.0
    crawl_delay_s: float = 0.2
    honor_robots: bool = True
    search_corpus: Any = None  # path or list of docs
    distill_memory: bool | None = None  # default: pipeline.memory_enabled
    tokens: dict[str, str] = field(default_factory=dict)  # bearer -> user_id
    data_dir: Path | None = None  # cache/graph/memory/session files live here

    @classmethod
    def from_file(cls, path: str | Path) -> tuple["StackConfig", PipelineConfig]:
        doc = yaml.safe_load(Path(path).read_text()) or {}
        pipeline_doc = doc.get("pipeline", {})
        mode = pipeline_doc.pop("mode", "deepsolver")
        if "model" in doc:
            pipeline_doc["model"] = doc["model"]
        pipeline = configure_pipeline(mode, **pipeline_doc)
        stack = cls(
            root=Path(doc.get("root", ".")),
            denied_subtrees=list(doc.get("denied_subtrees", [])),
            environment_kind=doc.get("environment", {}).get("kind", "site-dir"),
            environment_dir=(Path(doc["environment"]["dir"])
                             if doc.get("environment", {}).get("dir") else None),
            include_base=doc.get("environment", {}).get("include_base", True),
            timeout_s=float(doc.get("timeout_s", 600.0)),
            crawl_delay_s=float(doc.get("crawl_delay_s", 0.2)),
            search_corpus=doc.get("search_corpus"),
            tokens=dict(doc.get("server", {}).get("tokens", {})),
        )
        if "data_dir" in doc:
            stack.data_dir = Path(doc["data_dir"])
        stack.apply_env_overrides()
        return stack, pipeline

    def apply_env_overrides(self) -> "StackConfig":
        if os.environ.get(ENV_ROOT):
            self.root = Path(os.environ[ENV_ROOT])
        if os.environ.get(ENV_SITE):
            self.environment_dir = Path(os.environ[ENV_SITE])
        if os.environ.get(ENV_TIMEOUT):
            self.timeout_s = float(os.environ[ENV_TIMEOUT])
        return self


class Stack:
    def __init__(self, config: StackConfig, pipeline: PipelineConfig,
                 clock: Clock | None = None,
                 search_backend: SearchBackend | None = None,
                 gateway: ModelGateway | None = None):
        self.config = config
        self.pipeline = pipeline
        self.clock = clock or Clock()
        root = Path(config.root).resolve()
        root.mkdir(parents=True, exist_ok=True)
        self.data_dir = Path(config.data_dir) if config.data_dir else root / "data"
        self.data_dir.mkdir(parents=True, exist_ok=True)

        self.policy = PathPolicy(root, list(config.denied_subtrees))
        self.environment = self._build_environment(config, root)
        self.workspace = Workspace(self.policy, self.environment,
                                   clock=self.clock,
                                   timeout_s=config.timeout_s)
        self.gateway = gateway or ModelGateway(pipeline.model)

        self.cache = ExtractionCache(self.data_dir / "extraction.db")
        self.fetcher = UrlFetcher()
        self.extractor = CodeExtractor(
            self.cache,
            fetcher=self.fetcher,
            embed=self.gateway.embed,
            summarize=self._summarize_block,
            crawl_delay_s=config.crawl_delay_s,
            honor_robots=config.honor_robots,
        )
        self.graph = KnowledgeGraph(self.data_dir / "knowledge_graph.json")

        distill = (pipeline.memory_enabled if config.distill_memory is None
                   else config.distill_memory)
        self.memory = MemoryStore(
            self.data_dir / "memory.db",
            embed=self.gateway.embed,
            distiller=model_distiller(self.gateway) if distill else None,
            clock=self.clock,
        )

        if search_backend is not None:
            self.search_backend = search_backend
        elif isinstance(config.search_corpus, list):
            self.search_backend = FixtureSearchBackend(config.search_corpus)
        elif config.search_corpus:
            self.search_backend = FixtureSearchBackend.from_path(
                config.search_corpus)
        else:
            self.search_backend = FixtureSearchBackend()

        self.registry = self._assemble_registry()
        self.sessions = SessionStore(self.data_dir / "sessions.db",
                                     clock=self.clock)
        self.tracer = Tracer(self.sessions, clock=self.clock)
        self._wire_server = None

    def _summarize_block(self, block) -> str:
        # only runs when extraction is asked for summaries explicitly
        output = self.gateway.complete(
            [{"role": "system",
              "content": "Summarize what this code block does in one line."},
             {"role": "user", "content": block.code}],
            role="summarizer",
        )
        return output.text.strip()

    @staticmethod
    def _build_environment(config: StackConfig, root: Path) -> Environment:
        if config.environment_kind == "system":
            return SystemEnvironment()
        site = config.environment_dir or (root / "env" / "site")
        site.mkdir(parents=True, exist_ok=True)
        return SiteDirEnvironment(site, include_base=config.include_base)

    def _assemble_registry(self) -> ToolRegistry:
        registry = ToolRegistry()
        register_memory_tools(registry, self.memory)
        registry.register(*search_tool(self.search_backend))
        register_research_tools(
            registry, self.extractor, self.graph, self.policy,
            introspect_paths=self.environment.metadata_paths(),
        )
        register_workspace_tools(registry, self.workspace)
        return registry.freeze()

    # -- runtime derivation ----------------------------------------------------

    def direct_invoker(self, traced: bool = True):
        recorder = self.tracer.recorder() if traced else None
        return bind_direct(self.registry, timeout_s=self.config.timeout_s,
                           recorder=recorder)

    def wire_server(self):
        if self._wire_server is None:
            self._wire_server = serve_wire(self.registry,
                                           timeout_s=self.config.timeout_s)
        return self._wire_server

    def wire_invoker(self) -> WireClient:
        return WireClient(self.wire_server().url)

    def runtime(self, emitter: EventEmitter | None = None,
                traced: bool = True) -> Runtime:
        inner = (self.wire_invoker() if self.pipeline.use_wire
                 else self.direct_invoker(traced=False))
        invoker = TracedInvoker(inner, self.tracer) if traced else inner
        return Runtime(
            config=self.pipeline,
            gateway=self.gateway,
            invoker=invoker,
            tracer=self.tracer,
            emitter=emitter or NullEmitter(),
            memory=self.memory,
            sessions=self.sessions,
        )

    def shutdown(self) -> None:
        if self._wire_server is not None:
            self._wire_server.shutdown()
            self._wire_server = None


def build_stack(
    root: str | Path,
    pipeline: PipelineConfig | None = None,
    clock: Clock | None = None,
    **config_overrides,
) -> Stack:
    config = StackConfig(root=Path(root), **config_overrides)
    return Stack(config, pipeline or PipelineConfig(), clock=clock)
