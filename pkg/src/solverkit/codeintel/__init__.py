from .extract import (
    CodeBlock,
    CodeExtractor,
    ExtractionCache,
    ExtractionReport,
    UrlFetcher,
)
from .introspect import (
    SymbolMatch,
    SymbolReport,
    damerau_levenshtein,
    quick_introspect,
    similarity,
)
from .kg import KGEdge, KGNode, KnowledgeGraph, parse_local_package, query_knowledge_graph
from .probes import runtime_probe_snippet
from .retrieval import retrieve_extracted_code
from .tools import register_research_tools, research_tools

__all__ = [
    "CodeBlock",
    "CodeExtractor",
    "ExtractionCache",
    "ExtractionReport",
    "UrlFetcher",
    "SymbolMatch",
    "SymbolReport",
    "damerau_levenshtein",
    "quick_introspect",
    "similarity",
    "KGEdge",
    "KGNode",
    "KnowledgeGraph",
    "parse_local_package",
    "query_knowledge_graph",
    "runtime_probe_snippet",
    "retrieve_extracted_code",
    "register_research_tools",
    "research_tools",
]
