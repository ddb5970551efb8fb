"""Tool descriptors and handlers for the research server."""

from __future__ import annotations

from ..toolbus.registry import ServerKind, ToolDescriptor, ToolHandler, ToolRegistry
from ..workspace.policy import PathPolicy
from .extract import CodeExtractor
from .introspect import quick_introspect
from .kg import KnowledgeGraph, parse_local_package, query_knowledge_graph
from .probes import runtime_probe_snippet
from .retrieval import retrieve_extracted_code


def research_tools(
    extractor: CodeExtractor,
    graph: KnowledgeGraph,
    policy: PathPolicy,
    introspect_paths: list[str] | None = None,
) -> list[tuple[ToolDescriptor, ToolHandler]]:
    def _extract(args: dict) -> dict:
        report = extractor.extract(
            args["url"],
            strategy=args.get("strategy", "single-page"),
            max_pages=args.get("max_pages", 20),
            with_summaries=args.get("with_summaries", False),
        )
        return report.to_doc(with_embeddings=False)

    def _retrieve(args: dict) -> dict:
        hits = retrieve_extracted_code(
            extractor.cache, args["query"], args["match_count"],
            embed=extractor.embed,
        )
        rows = []
        for block, score in hits:
            doc = block.to_doc()
            doc.pop("embedding", None)
            doc["score"] = round(score, 6)
            rows.append(doc)
        return {"matches": rows}

    def _introspect(args: dict) -> dict:
        report = quick_introspect(
            args["package"], args.get("symbol", ""), search_paths=introspect_paths,
        )
        return report.to_doc()

    def _probe(args: dict) -> dict:
        snippet = runtime_probe_snippet(
            args["error_kind"], args["variable_name"], args.get("key_or_attr"),
        )
        return {"snippet": snippet}

    def _parse(args: dict) -> dict:
        path = policy.resolve(args["package_path"])
        return parse_local_package(graph, path)

    def _query(args: dict) -> dict:
        return {"rows": query_knowledge_graph(graph, args["query"])}

    return [
        (
            ToolDescriptor(
                name="extract_code_from_url",
                description="Fetch a URL, autodetect its content kind "
                            "(notebook, docs page, raw file, markdown) and "
                            "extract code blocks with surrounding context; "
                            "results are cached per (url, strategy).",
                input_schema={
                    "type": "object",
                    "properties": {
                        "url": {"type": "string"},
                        "strategy": {"type": "string",
                                     "enum": ["single-page", "smart-crawl"]},
                        "max_pages": {"type": "integer"},
                        "with_summaries": {"type": "boolean"},
                    },
                    "required": ["url"],
                },
                server=ServerKind.RESEARCH,
            ),
            _extract,
        ),
        (
            ToolDescriptor(
                name="retrieve_extracted_code",
                description="Vector-similarity search over previously "
                            "extracted code blocks.",
                input_schema={
                    "type": "object",
                    "properties": {
                        "query": {"type": "string"},
                        "match_count": {"type": "integer"},
                    },
                    "required": ["query", "match_count"],
                },
                server=ServerKind.RESEARCH,
            ),
            _retrieve,
        ),
        (
            ToolDescriptor(
                name="quick_introspect",
                description="Static symbol discovery over a package: exact "
                            "and fuzzy matches for classes, methods and "
                            "functions, without executing any target code.",
                input_schema={
                    "type": "object",
                    "properties": {
                        "package": {"type": "string"},
                        "symbol": {"type": "string"},
                    },
                    "required": ["package"],
                },
                server=ServerKind.RESEARCH,
            ),
            _introspect,
        ),
        (
            ToolDescriptor(
                name="runtime_probe_snippet",
                description="Produce a paste-ready snippet that prints the "
                            "available keys or attributes, type, and closest "
                            "name suggestions at a KeyError or AttributeError "
                            "site.",
                input_schema={
                    "type": "object",
                    "properties": {
                        "error_kind": {"type": "string",
                                       "enum": ["key-error", "attribute-error"]},
                        "variable_name": {"type": "string"},
                        "key_or_attr": {"type": "string"},
                    },
                    "required": ["error_kind", "variable_name"],
                },
                server=ServerKind.RESEARCH,
            ),
            _probe,
        ),
        (
            ToolDescriptor(
                name="parse_local_package",
                description="Build (or rebuild) the code knowledge graph for "
                            "a local package via AST analysis: classes, "
                            "methods, functions, attributes, parameters with "
                            "type hints and defaults, imports and inheritance.",
                input_schema={
                    "type": "object",
                    "properties": {"package_path": {"type": "string"}},
                    "required": ["package_path"],
                },
                server=ServerKind.RESEARCH,
            ),
            _parse,
        ),
        (
            ToolDescriptor(
                name="query_knowledge_graph",
                description="Query the code knowledge graph: children-of, "
                            "methods-of-class, signature-of, inherits-chain, "
                            "imports-of, or match <kind> <pattern>.",
                input_schema={
                    "type": "object",
                    "properties": {"query": {"type": "string"}},
                    "required": ["query"],
                },
                server=ServerKind.RESEARCH,
            ),
            _query,
        ),
    ]


def register_research_tools(
    registry: ToolRegistry,
    extractor: CodeExtractor,
    graph: KnowledgeGraph,
    policy: PathPolicy,
    introspect_paths: list[str] | None = None,
) -> None:
    for descriptor, handler in research_tools(extractor, graph, policy,
                                              introspect_paths):
        registry.register(descriptor, handler)
