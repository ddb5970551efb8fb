"""Web code extraction with caching.

Content kinds are autodetected and routed to a per-kind extractor:
notebook cells in order, documentation-page code blocks, raw repository
files verbatim, and markdown fences (with command examples tagged
separately). Around each block up to two paragraphs of surrounding prose
are captured as context. Results are cached keyed by (url, strategy); a
cache hit performs zero network fetches.
"""

from __future__ import annotations

import json
import logging
import re
import sqlite3
import threading
import time
import urllib.parse
import urllib.request
import urllib.robotparser
from dataclasses import dataclass, field
from html.parser import HTMLParser
from pathlib import Path
from typing import Callable

from ..errors import FetchFailureError, PreconditionError

logger = logging.getLogger(__name__)

CONTENT_KINDS = (
    "notebook-cell",
    "docs-block",
    "raw-file",
    "markdown-fence",
    "command-example",
)

_COMMAND_LANGS = {"bash", "sh", "shell", "console", "zsh"}
_RAW_CODE_SUFFIXES = {".py", ".txt", ".cfg", ".toml", ".yaml", ".yml", ".json",
                      ".sh", ".c", ".cpp", ".rs", ".jl", ".r"}

DEFAULT_CRAWL_DELAY_S = 0.2
DEFAULT_MAX_PAGES = 20


@dataclass
class CodeBlock:
    source_url: str
    ordinal: int
    code: str
    context_before: str = ""
    context_after: str = ""
    content_kind: str = "raw-file"
    summary: str | None = None
    embedding: list[float] | None = None

    def to_doc(self) -> dict:
        return {
            "source_url": self.source_url,
            "ordinal": self.ordinal,
            "code": self.code,
            "context_before": self.context_before,
            "context_after": self.context_after,
            "content_kind": self.content_kind,
            "summary": self.summary,
            "embedding": self.embedding,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "CodeBlock":
        return cls(**doc)


@dataclass
class ExtractionReport:
    root_url: str
    strategy: str  # "single-page" | "smart-crawl"
    pages_visited: int
    blocks: list[CodeBlock]
    cache_hit: bool = False
    fetch_count: int = 0
    note: str | None = None

    def to_doc(self, with_embeddings: bool = True) -> dict:
        blocks = [b.to_doc() for b in self.blocks]
        if not with_embeddings:
            for b in blocks:
                b.pop("embedding", None)
        return {
            "root_url": self.root_url,
            "strategy": self.strategy,
            "pages_visited": self.pages_visited,
            "blocks": blocks,
            "cache_hit": self.cache_hit,
            "fetch_count": self.fetch_count,
            "note": self.note,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "ExtractionReport":
        doc = dict(doc)
        doc["blocks"] = [CodeBlock.from_doc(b) for b in doc.get("blocks", [])]
        return cls(**doc)


# --------------------------------------------------------------------------
# fetching


@dataclass
class Fetched:
    url: str
    data: bytes
    content_type: str | None


class UrlFetcher:
    """urllib-backed fetcher with an observable fetch counter."""

    def __init__(self, user_agent: str = "solverkit-extractor/0.1"):
        self.user_agent = user_agent
        self.fetch_count = 0
        self._lock = threading.Lock()

    def fetch(self, url: str) -> Fetched:
        with self._lock:
            self.fetch_count += 1
        req = urllib.request.Request(url, headers={"User-Agent": self.user_agent})
        try:
            with urllib.request.urlopen(req, timeout=30) as resp:
                data = resp.read()
                ctype = resp.headers.get("Content-Type") if resp.headers else None
        except Exception as exc:
            raise FetchFailureError(f"fetch of {url} failed: {exc}") from exc
        return Fetched(url=url, data=data, content_type=ctype)


# --------------------------------------------------------------------------
# paragraph-context helpers


def paragraphs(text: str) -> list[str]:
    parts = re.split(r"\n\s*\n", text.strip())
    return [p.strip() for p in parts if p.strip()]


def tail_paragraphs(text: str, n: int = 2) -> str:
    return "\n\n".join(paragraphs(text)[-n:])


def head_paragraphs(text: str, n: int = 2) -> str:
    return "\n\n".join(paragraphs(text)[:n])


# --------------------------------------------------------------------------
# per-kind extractors


def extract_notebook(url: str, data: bytes) -> list[CodeBlock]:
    nb = json.loads(data.decode("utf-8"))
    cells = nb.get("cells", [])
    blocks: list[CodeBlock] = []
    last_markdown = ""
    pending: CodeBlock | None = None
    for cell in cells:
        source = cell.get("source", "")
        if isinstance(source, list):
            source = "".join(source)
        if cell.get("cell_type") == "markdown":
            if pending is not None:
                pending.context_after = head_paragraphs(source)
                pending = None
            last_markdown = source
        elif cell.get("cell_type") == "code":
            if not source.strip():
                continue
            block = CodeBlock(
                source_url=url,
                ordinal=len(blocks),
                code=source,
                context_before=tail_paragraphs(last_markdown),
                content_kind="notebook-cell",
            )
            blocks.append(block)
            pending = block
            last_markdown = ""
    return blocks


_FENCE_RE = re.compile(r"^```([^\n`]*)\n(.*?)^```\s*$", re.MULTILINE | re.DOTALL)


def extract_markdown(url: str, text: str) -> list[CodeBlock]:
    blocks: list[CodeBlock] = []
    for match in _FENCE_RE.finditer(text):
        lang = match.group(1).strip().lower()
        code = match.group(2)
        if not code.strip():
            continue
        before = text[: match.start()]
        after = text[match.end():]
        kind = "command-example" if lang in _COMMAND_LANGS else "markdown-fence"
        blocks.append(CodeBlock(
            source_url=url,
            ordinal=len(blocks),
            code=code,
            context_before=tail_paragraphs(before),
            context_after=head_paragraphs(after),
            content_kind=kind,
        ))
    return blocks


class _DocPageParser(HTMLParser):
    """Flattens a documentation page into ordered text/code segments and
    collects hyperlinks for crawling."""

    _BLOCK_TAGS = {"p", "div", "section", "article", "li", "h1", "h2", "h3",
                   "h4", "br", "tr"}

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.segments: list[tuple[str, str]] = []  # ("text"|"code", content)
        self.links: list[str] = []
        self._pre_depth = 0
        self._skip_depth = 0
        self._buf: list[str] = []
        self._code_buf: list[str] = []

    def handle_starttag(self, tag, attrs):
        if tag in ("script", "style"):
            self._skip_depth += 1
            return
        if tag == "a":
            href = dict(attrs).get("href")
            if href:
                self.links.append(href)
        if tag == "pre":
            self._flush_text()
            self._pre_depth += 1
        elif tag in self._BLOCK_TAGS and self._pre_depth == 0:
            self._buf.append("\n\n")

    def handle_endtag(self, tag):
        if tag in ("script", "style"):
            self._skip_depth = max(0, self._skip_depth - 1)
            return
        if tag == "pre":
            self._pre_depth = max(0, self._pre_depth - 1)
            if self._pre_depth == 0:
                code = "".join(self._code_buf)
                self._code_buf.clear()
                if code.strip():
                    self.segments.append(("code", code))
        elif tag in self._BLOCK_TAGS and self._pre_depth == 0:
            self._buf.append("\n\n")

    def handle_data(self, data):
        if self._skip_depth:
            return
        if self._pre_depth:
            self._code_buf.append(data)
        else:
            self._buf.append(data)

    def _flush_text(self):
        text = "".join(self._buf)
        self._buf.clear()
        if text.strip():
            self.segments.append(("text", text))

    def close(self):
        super().close()
        self._flush_text()


def extract_docs_page(url: str, html_text: str) -> tuple[list[CodeBlock], list[str]]:
    parser = _DocPageParser()
    parser.feed(html_text)
    parser.close()
    blocks: list[CodeBlock] = []
    segments = parser.segments
    for i, (kind, content) in enumerate(segments):
        if kind != "code":
            continue
        before = segments[i - 1][1] if i > 0 and segments[i - 1][0] == "text" else ""
        after = ""
        if i + 1 < len(segments) and segments[i + 1][0] == "text":
            after = segments[i + 1][1]
        blocks.append(CodeBlock(
            source_url=url,
            ordinal=len(blocks),
            code=content,
            context_before=tail_paragraphs(before),
            context_after=head_paragraphs(after),
            content_kind="docs-block",
        ))
    return blocks, parser.links


def extract_raw_file(url: str, text: str) -> list[CodeBlock]:
    if not text.strip():
        return []
    return [CodeBlock(source_url=url, ordinal=0, code=text,
                      content_kind="raw-file")]


def detect_kind(url: str, data: bytes, content_type: str | None) -> str:
    path = urllib.parse.urlparse(url).path.lower()
    ctype = (content_type or "").split(";")[0].strip().lower()
    if path.endswith(".ipynb"):
        return "notebook"
    if path.endswith((".md", ".markdown")) or ctype == "text/markdown":
        return "markdown"
    if ctype == "text/html" or path.endswith((".html", ".htm")):
        return "html"
    head = data[:512].lstrip().lower()
    if head.startswith((b"<!doctype html", b"<html")):
        return "html"
    if head.startswith(b"{"):
        try:
            doc = json.loads(data.decode("utf-8"))
            if isinstance(doc, dict) and "cells" in doc:
                return "notebook"
        except (json.JSONDecodeError, UnicodeDecodeError):
            pass
    if b"\x00" in data[:4096]:
        return "binary"
    if any(path.endswith(s) for s in _RAW_CODE_SUFFIXES) or ctype.startswith("text/"):
        return "raw"
    return "raw"


def extract_page(url: str, fetched: Fetched) -> tuple[list[CodeBlock], list[str], str | None]:
    """Extract one page; returns (blocks, links, note)."""
    kind = detect_kind(url, fetched.data, fetched.content_type)
    if kind == "binary":
        return [], [], "unsupported-content: binary payload"
    text = fetched.data.decode("utf-8", errors="replace")
    if kind == "notebook":
        try:
            return extract_notebook(url, fetched.data), [], None
        except (json.JSONDecodeError, UnicodeDecodeError):
            return [], [], "unsupported-content: unparseable notebook"
    if kind == "markdown":
        return extract_markdown(url, text), [], None
    if kind == "html":
        blocks, links = extract_docs_page(url, text)
        return blocks, links, None
    return extract_raw_file(url, text), [], None


# --------------------------------------------------------------------------
# cache


class ExtractionCache:
    """(url, strategy)-keyed persistent store of extraction reports."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        with self._connect() as conn:
            conn.execute(
                "CREATE TABLE IF NOT EXISTS extraction_cache ("
                " url TEXT NOT NULL, strategy TEXT NOT NULL,"
                " report TEXT NOT NULL, created_at REAL NOT NULL,"
                " PRIMARY KEY (url, strategy))"
            )

    def _connect(self) -> sqlite3.Connection:
        conn = sqlite3.connect(self.path)
        conn.execute("PRAGMA journal_mode=WAL")
        return conn

    def get(self, url: str, strategy: str) -> ExtractionReport | None:
        with self._lock, self._connect() as conn:
            row = conn.execute(
                "SELECT report FROM extraction_cache WHERE url=? AND strategy=?",
                (url, strategy),
            ).fetchone()
        if row is None:
            return None
        report = ExtractionReport.from_doc(json.loads(row[0]))
        report.cache_hit = True
        report.fetch_count = 0
        return report

    def put(self, report: ExtractionReport) -> None:
        doc = report.to_doc()
        doc["cache_hit"] = False
        with self._lock, self._connect() as conn:
            conn.execute(
                "INSERT OR REPLACE INTO extraction_cache VALUES (?,?,?,?)",
                (report.root_url, report.strategy, json.dumps(doc), time.time()),
            )

    def all_blocks(self) -> list[CodeBlock]:
        with self._lock, self._connect() as conn:
            rows = conn.execute(
                "SELECT report FROM extraction_cache ORDER BY url, strategy"
            ).fetchall()
        blocks: list[CodeBlock] = []
        for (raw,) in rows:
            blocks.extend(ExtractionReport.from_doc(json.loads(raw)).blocks)
        return blocks

    def clear(self) -> None:
        with self._lock, self._connect() as conn:
            conn.execute("DELETE FROM extraction_cache")

    def __len__(self) -> int:
        with self._lock, self._connect() as conn:
            (n,) = conn.execute("SELECT COUNT(*) FROM extraction_cache").fetchone()
        return n


# --------------------------------------------------------------------------
# extractor front-end


class CodeExtractor:
    def __init__(
        self,
        cache: ExtractionCache,
        fetcher: UrlFetcher | None = None,
        embed: Callable[[list[str]], list] | None = None,
        summarize: Callable[[CodeBlock], str] | None = None,
        crawl_delay_s: float = DEFAULT_CRAWL_DELAY_S,
        honor_robots: bool = True,
    ):
        self.cache = cache
        self.fetcher = fetcher or UrlFetcher()
        self.embed = embed
        self.summarize = summarize
        self.crawl_delay_s = crawl_delay_s
        self.honor_robots = honor_robots
        self._robots: dict[str, urllib.robotparser.RobotFileParser] = {}

    # robots handling applies to remote schemes only
    def _allowed(self, url: str) -> bool:
        parsed = urllib.parse.urlparse(url)
        if parsed.scheme not in ("http", "https") or not self.honor_robots:
            return True
        base = f"{parsed.scheme}://{parsed.netloc}"
        rp = self._robots.get(base)
        if rp is None:
            rp = urllib.robotparser.RobotFileParser(base + "/robots.txt")
            try:
                rp.read()
            except Exception:
                rp.allow_all = True
            self._robots[base] = rp
        return rp.can_fetch(self.fetcher.user_agent, url)

    def extract(
        self,
        url: str,
        strategy: str = "single-page",
        max_pages: int = DEFAULT_MAX_PAGES,
        with_summaries: bool = False,
    ) -> ExtractionReport:
        if strategy not in ("single-page", "smart-crawl"):
            raise PreconditionError(f"unknown strategy {strategy!r}")
        if max_pages < 1:
            raise PreconditionError("max_pages must be >= 1")
        if not urllib.parse.urlparse(url).scheme:
            raise PreconditionError(f"url {url!r} is not well-formed")
        cached = self.cache.get(url, strategy)
        if cached is not None:
            return cached

        fetch_before = self.fetcher.fetch_count
        if strategy == "smart-crawl":
            try:
                report = self._crawl(url, max_pages)
            except FetchFailureError:
                raise
            except Exception:
                logger.exception("smart-crawl failed; falling back to single page")
                report = self._single(url)
        else:
            report = self._single(url)
        report.fetch_count = self.fetcher.fetch_count - fetch_before

        if with_summaries and self.summarize is not None:
            for block in report.blocks:
                block.summary = self.summarize(block)
        if self.embed is not None and report.blocks:
            vectors = self.embed([b.code for b in report.blocks])
            for block, vec in zip(report.blocks, vectors):
                block.embedding = [float(x) for x in vec]
        self.cache.put(report)
        return report

    def _single(self, url: str) -> ExtractionReport:
        fetched = self.fetcher.fetch(url)
        blocks, _, note = extract_page(url, fetched)
        return ExtractionReport(root_url=url, strategy="single-page",
                                pages_visited=1, blocks=blocks, note=note)

    def _crawl(self, root_url: str, max_pages: int) -> ExtractionReport:
        root = urllib.parse.urlparse(root_url)
        queue = [root_url]
        seen = {root_url}
        blocks: list[CodeBlock] = []
        notes = []
        visited = 0
        while queue and visited < max_pages:
            url = queue.pop(0)
            if not self._allowed(url):
                continue
            if visited > 0 and self.crawl_delay_s > 0:
                time.sleep(self.crawl_delay_s)
            try:
                fetched = self.fetcher.fetch(url)
            except FetchFailureError:
                if visited == 0:
                    raise  # root failure is a fetch failure, not a fallback
                continue
            visited += 1
            page_blocks, links, note = extract_page(url, fetched)
            blocks.extend(page_blocks)
            if note:
                notes.append(f"{url}: {note}")
            for href in links:
                absolute = urllib.parse.urljoin(url, href)
                absolute, _ = urllib.parse.urldefrag(absolute)
                parsed = urllib.parse.urlparse(absolute)
                if parsed.scheme != root.scheme or parsed.netloc != root.netloc:
                    continue  # same-host only
                if absolute not in seen:
                    seen.add(absolute)
                    queue.append(absolute)
        return ExtractionReport(
            root_url=root_url,
            strategy="smart-crawl",
            pages_visited=visited,
            blocks=blocks,
            note="; ".join(notes) or None,
        )
