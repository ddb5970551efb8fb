"""Static symbol introspection with fuzzy matching.

Resolves packages/classes/methods/functions by walking source ASTs on the
target-runtime path: no target code is imported or executed. Fuzzy scores
use normalized Damerau-Levenshtein similarity (transposition-aware), with
exact name matches pinned to 1.0.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import PackageNotFoundError, PreconditionError
from . import pyast

FUZZY_THRESHOLD = 0.6


def damerau_levenshtein(a: str, b: str) -> int:
    """Optimal-string-alignment distance (adjacent transpositions count 1)."""
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    prev2: list[int] = []
    prev = list(range(lb + 1))
    for i in range(1, la + 1):
        cur = [i] + [0] * lb
        for j in range(1, lb + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
            if (i > 1 and j > 1 and a[i - 1] == b[j - 2]
                    and a[i - 2] == b[j - 1]):
                cur[j] = min(cur[j], prev2[j - 2] + 1)
        prev2, prev = prev, cur
    return prev[lb]


def similarity(a: str, b: str) -> float:
    """Normalized similarity in [0, 1]; case-insensitive, 1.0 iff equal
    ignoring case."""
    a_l, b_l = a.lower(), b.lower()
    if a_l == b_l:
        return 1.0
    longest = max(len(a_l), len(b_l))
    if longest == 0:
        return 1.0
    return 1.0 - damerau_levenshtein(a_l, b_l) / longest


@dataclass
class SymbolMatch:
    kind: str  # package | class | method | function | attribute
    qualified_name: str
    match_score: float
    signature: str | None = None
    location: str | None = None

    def to_doc(self) -> dict:
        return {
            "kind": self.kind,
            "qualified_name": self.qualified_name,
            "signature": self.signature,
            "location": self.location,
            "match_score": round(self.match_score, 4),
        }


@dataclass
class SymbolReport:
    query: str
    matches: list[SymbolMatch] = field(default_factory=list)

    @property
    def resolved(self) -> bool:
        return any(m.match_score >= 1.0 for m in self.matches)

    def to_doc(self) -> dict:
        return {
            "query": self.query,
            "matches": [m.to_doc() for m in self.matches],
            "resolved": self.resolved,
        }


def _candidate_packages(search_paths: list[str]) -> dict[str, Path]:
    found: dict[str, Path] = {}
    for base in search_paths:
        base_path = Path(base)
        if not base_path.is_dir():
            continue
        try:
            entries = sorted(base_path.iterdir())
        except OSError:
            continue
        for entry in entries:
            if entry.is_dir() and (entry / "__init__.py").exists():
                found.setdefault(entry.name, entry)
            elif entry.suffix == ".py" and entry.stem.isidentifier():
                found.setdefault(entry.stem, entry)
    return found


def locate_package(package: str, search_paths: list[str] | None = None) -> Path:
    paths = search_paths if search_paths is not None else sys.path
    candidates = _candidate_packages([p for p in paths if p])
    if package in candidates:
        return candidates[package]
    scored = sorted(
        ((similarity(package, name), name) for name in candidates),
        reverse=True,
    )
    nearest = [name for score, name in scored[:5] if score >= FUZZY_THRESHOLD]
    raise PackageNotFoundError(
        f"package {package!r} not found on the target path",
        candidates=nearest,
    )


def _collect_symbols(walk: pyast.PackageWalk) -> list[SymbolMatch]:
    import ast

    symbols: list[SymbolMatch] = [
        SymbolMatch(kind="package", qualified_name=walk.package_name,
                    match_score=0.0, location=str(walk.root)),
    ]
    for module in walk.modules:
        loc = str(module.path)
        for node in module.tree.body:
            if isinstance(node, ast.ClassDef):
                cls_qn = f"{module.module_name}.{node.name}"
                symbols.append(SymbolMatch(
                    kind="class", qualified_name=cls_qn, match_score=0.0,
                    location=f"{loc}:{node.lineno}",
                ))
                for item in node.body:
                    if isinstance(item, (ast.FunctionDef, ast.AsyncFunctionDef)):
                        symbols.append(SymbolMatch(
                            kind="method",
                            qualified_name=f"{cls_qn}.{item.name}",
                            match_score=0.0,
                            signature=pyast.format_signature(item),
                            location=f"{loc}:{item.lineno}",
                        ))
                    elif isinstance(item, ast.AnnAssign) and isinstance(item.target, ast.Name):
                        symbols.append(SymbolMatch(
                            kind="attribute",
                            qualified_name=f"{cls_qn}.{item.target.id}",
                            match_score=0.0,
                            location=f"{loc}:{item.lineno}",
                        ))
            elif isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
                symbols.append(SymbolMatch(
                    kind="function",
                    qualified_name=f"{module.module_name}.{node.name}",
                    match_score=0.0,
                    signature=pyast.format_signature(node),
                    location=f"{loc}:{node.lineno}",
                ))
    return symbols


def quick_introspect(
    package: str,
    symbol: str = "",
    search_paths: list[str] | None = None,
) -> SymbolReport:
    """Match ``symbol`` against everything the package defines.

    Empty symbol returns the package itself plus its top-level symbols.
    """
    if not package:
        raise PreconditionError("package name required")
    root = locate_package(package, search_paths)
    walk = pyast.walk_package(root)
    symbols = _collect_symbols(walk)
    query = symbol or package
    leaf = query.rsplit(".", 1)[-1]
    for sym in symbols:
        name = sym.qualified_name.rsplit(".", 1)[-1]
        score = similarity(leaf, name)
        if sym.qualified_name == query:
            score = 1.0
        sym.match_score = score
    matched = [s for s in symbols if s.match_score >= FUZZY_THRESHOLD]
    matched.sort(key=lambda s: (-s.match_score, s.qualified_name))
    return SymbolReport(query=query, matches=matched)
