"""Web-search server.

The search tool keeps its wire name for compatibility with existing agent
prompts, but the engine behind it is pluggable. The bundled backend ranks a
local document corpus with the deterministic embedder, which keeps tests and
desk-scale use fully offline; an HTTP search service can be swapped in by
implementing ``SearchBackend``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from ..models import embedder
from ..toolbus.registry import ServerKind, ToolDescriptor, ToolHandler


@dataclass
class SearchHit:
    title: str
    url: str
    snippet: str
    score: float

    def to_doc(self) -> dict:
        return {"title": self.title, "url": self.url, "snippet": self.snippet,
                "score": round(self.score, 6)}


class SearchBackend(Protocol):
    def search(self, query: str, max_results: int = 5) -> list[SearchHit]: ...


class FixtureSearchBackend:
    """Ranks a local corpus of {title, url, text} documents by embedding
    similarity. Corpus files are JSON lists or directories of .json files."""

    def __init__(self, corpus: list[dict] | None = None):
        self.docs = list(corpus or [])
        self._vecs = [embedder.hash_embed(self._doc_text(d)) for d in self.docs]

    @staticmethod
    def _doc_text(doc: dict) -> str:
        return f"{doc.get('title', '')}\n{doc.get('text', '')}"

    @classmethod
    def from_path(cls, path: str | Path) -> "FixtureSearchBackend":
        path = Path(path)
        docs: list[dict] = []
        if path.is_dir():
            for p in sorted(path.glob("*.json")):
                loaded = json.loads(p.read_text())
                docs.extend(loaded if isinstance(loaded, list) else [loaded])
        elif path.exists():
            loaded = json.loads(path.read_text())
            docs = loaded if isinstance(loaded, list) else [loaded]
        return cls(docs)

    def add(self, title: str, url: str, text: str) -> None:
        doc = {"title": title, "url": url, "text": text}
        self.docs.append(doc)
        self._vecs.append(embedder.hash_embed(self._doc_text(doc)))

    def search(self, query: str, max_results: int = 5) -> list[SearchHit]:
        qv = embedder.hash_embed(query)
        scored = []
        for doc, vec in zip(self.docs, self._vecs):
            score = embedder.cosine(qv, vec)
            snippet = (doc.get("text") or "")[:300]
            scored.append(SearchHit(doc.get("title", ""), doc.get("url", ""),
                                    snippet, score))
        scored.sort(key=lambda h: (-h.score, h.url))
        return scored[:max_results]


def search_tool(backend: SearchBackend) -> tuple[ToolDescriptor, ToolHandler]:
    def _search(args: dict) -> dict:
        hits = backend.search(args["query"], max_results=args.get("max_results", 5))
        return {"results": [h.to_doc() for h in hits]}

    return (
        ToolDescriptor(
            name="tavily-search",
            description="Real-time web search returning ranked documentation "
                        "and resource hits for the query.",
            input_schema={
                "type": "object",
                "properties": {
                    "query": {"type": "string"},
                    "max_results": {"type": "integer"},
                },
                "required": ["query"],
            },
            server=ServerKind.SEARCH,
        ),
        _search,
    )
