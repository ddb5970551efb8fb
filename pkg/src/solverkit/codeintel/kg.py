"""Code knowledge graph built by AST analysis.

An embedded property graph: nodes for packages, modules, classes,
functions, methods, attributes and parameters; edges for containment,
definition, methods, attributes, parameters, imports and inheritance.
Parameter nodes carry type hints and default values verbatim from the
source. Each package's subgraph is replaced atomically on re-parse, so
parsing is idempotent. Queries use a small declarative pattern language.
"""

from __future__ import annotations

import ast
import fnmatch
import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import EmptyGraphError, MalformedQueryError
from . import pyast

NODE_KINDS = ("package", "module", "class", "function", "method",
              "attribute", "parameter")
EDGE_RELATIONS = ("contains", "defines", "has-method", "has-attribute",
                  "has-parameter", "imports", "inherits")


@dataclass(frozen=True)
class KGNode:
    id: str
    kind: str
    name: str
    detail: dict = field(default_factory=dict, compare=False)

    def to_doc(self) -> dict:
        return {"id": self.id, "kind": self.kind, "name": self.name,
                "detail": self.detail}


@dataclass(frozen=True)
class KGEdge:
    from_id: str
    to_id: str
    relation: str

    def to_doc(self) -> dict:
        return {"from_id": self.from_id, "to_id": self.to_id,
                "relation": self.relation}


class KnowledgeGraph:
    """In-process graph with optional JSON file persistence."""

    def __init__(self, persist_path: str | Path | None = None):
        self.persist_path = Path(persist_path) if persist_path else None
        self._nodes: dict[str, KGNode] = {}
        self._edges: list[KGEdge] = []
        self._by_package: dict[str, tuple[set[str], list[KGEdge]]] = {}
        self._lock = threading.RLock()
        if self.persist_path and self.persist_path.exists():
            self._load()

    # -- persistence --------------------------------------------------------

    def _load(self) -> None:
        doc = json.loads(self.persist_path.read_text())
        self._nodes = {n["id"]: KGNode(**n) for n in doc.get("nodes", [])}
        self._edges = [KGEdge(**e) for e in doc.get("edges", [])]
        for pkg, ids in doc.get("packages", {}).items():
            owned = set(ids)
            self._by_package[pkg] = (
                owned,
                [e for e in self._edges if e.from_id in owned],
            )

    def _save(self) -> None:
        if not self.persist_path:
            return
        self.persist_path.parent.mkdir(parents=True, exist_ok=True)
        self.persist_path.write_text(json.dumps(self.export(), indent=1))

    def export(self) -> dict:
        with self._lock:
            return {
                "nodes": [n.to_doc() for n in self._nodes.values()],
                "edges": [e.to_doc() for e in self._edges],
                "packages": {p: sorted(ids)
                             for p, (ids, _) in self._by_package.items()},
            }

    # -- mutation -----------------------------------------------------------

    def replace_package(self, package: str, nodes: list[KGNode],
                        edges: list[KGEdge]) -> None:
        with self._lock:
            old_ids, _ = self._by_package.get(package, (set(), []))
            if old_ids:
                self._edges = [e for e in self._edges
                               if e.from_id not in old_ids and e.to_id not in old_ids]
                for node_id in old_ids:
                    self._nodes.pop(node_id, None)
            for node in nodes:
                self._nodes[node.id] = node
            self._edges.extend(edges)
            self._by_package[package] = ({n.id for n in nodes}, list(edges))
            self._save()

    # -- reads ---------------------------------------------------------------

    @property
    def nodes(self) -> dict[str, KGNode]:
        with self._lock:
            return dict(self._nodes)

    @property
    def edges(self) -> list[KGEdge]:
        with self._lock:
            return list(self._edges)

    def node_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for node in self.nodes.values():
            counts[node.kind] = counts.get(node.kind, 0) + 1
        return counts

    def edge_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for edge in self.edges:
            counts[edge.relation] = counts.get(edge.relation, 0) + 1
        return counts

    def out_edges(self, node_id: str, relation: str | None = None) -> list[KGEdge]:
        return [e for e in self.edges
                if e.from_id == node_id and (relation is None or e.relation == relation)]

    def resolve(self, ref: str) -> KGNode | None:
        """Resolve a node by id, falling back to a unique bare-name match."""
        nodes = self.nodes
        if ref in nodes:
            return nodes[ref]
        named = [n for n in nodes.values() if n.name == ref]
        if len(named) == 1:
            return named[0]
        return None


# --------------------------------------------------------------------------
# package parsing


def _base_name(expr: ast.expr) -> str | None:
    try:
        return ast.unparse(expr)
    except Exception:
        return None


class _PackageGraphBuilder:
    def __init__(self, walk: pyast.PackageWalk):
        self.walk = walk
        self.nodes: dict[str, KGNode] = {}
        self.edges: list[KGEdge] = []

    def add_node(self, node: KGNode) -> None:
        self.nodes.setdefault(node.id, node)

    def add_edge(self, from_id: str, to_id: str, relation: str) -> None:
        self.edges.append(KGEdge(from_id=from_id, to_id=to_id, relation=relation))

    def build(self) -> tuple[list[KGNode], list[KGEdge]]:
        pkg = self.walk.package_name
        self.add_node(KGNode(id=pkg, kind="package", name=pkg))
        for module in self.walk.modules:
            self._module(module)
        return list(self.nodes.values()), self.edges

    def _module(self, module: pyast.ModuleSource) -> None:
        pkg = self.walk.package_name
        mid = module.module_name
        if mid != pkg:
            self.add_node(KGNode(
                id=mid, kind="module", name=mid.rsplit(".", 1)[-1],
                detail=_detail(docstring=pyast.docstring_head(module.tree)),
            ))
            self.add_edge(pkg, mid, "contains")
        owner = mid if mid != pkg else pkg
        for node in module.tree.body:
            if isinstance(node, ast.ClassDef):
                self._class(owner, node)
            elif isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
                self._function(owner, node, kind="function", relation="defines")
            elif isinstance(node, (ast.Import, ast.ImportFrom)):
                self._import(owner, node)

    def _class(self, owner: str, node: ast.ClassDef) -> None:
        cid = f"{owner}.{node.name}"
        self.add_node(KGNode(
            id=cid, kind="class", name=node.name,
            detail=_detail(docstring=pyast.docstring_head(node)),
        ))
        self.add_edge(owner, cid, "defines")
        for base in node.bases:
            base_name = _base_name(base)
            if not base_name:
                continue
            target = self._resolve_class(owner, base_name)
            self.add_edge(cid, target, "inherits")
        for item in node.body:
            if isinstance(item, (ast.FunctionDef, ast.AsyncFunctionDef)):
                self._function(cid, item, kind="method", relation="has-method")
            elif isinstance(item, ast.AnnAssign) and isinstance(item.target, ast.Name):
                aid = f"{cid}.{item.target.id}"
                self.add_node(KGNode(
                    id=aid, kind="attribute", name=item.target.id,
                    detail=_detail(type_hint=pyast.unparse(item.annotation),
                                   default=pyast.unparse(item.value)),
                ))
                self.add_edge(cid, aid, "has-attribute")
            elif isinstance(item, ast.Assign):
                for target in item.targets:
                    if isinstance(target, ast.Name):
                        aid = f"{cid}.{target.id}"
                        self.add_node(KGNode(
                            id=aid, kind="attribute", name=target.id,
                            detail=_detail(default=pyast.unparse(item.value)),
                        ))
                        self.add_edge(cid, aid, "has-attribute")

    def _resolve_class(self, owner: str, base_name: str) -> str:
        # same-module class reference first, else an external placeholder
        local = f"{owner}.{base_name}"
        if local in self.nodes:
            return local
        for candidate_id, candidate in self.nodes.items():
            if candidate.kind == "class" and candidate.name == base_name:
                return candidate_id
        ext = f"external.{base_name}"
        self.add_node(KGNode(id=ext, kind="class", name=base_name.rsplit(".", 1)[-1],
                             detail={"external": True}))
        return ext

    def _function(self, owner: str, node, kind: str, relation: str) -> None:
        fid = f"{owner}.{node.name}"
        self.add_node(KGNode(
            id=fid, kind=kind, name=node.name,
            detail=_detail(signature=pyast.format_signature(node),
                           docstring=pyast.docstring_head(node)),
        ))
        self.add_edge(owner, fid, relation)
        for name, hint, default in pyast.iter_parameters(node):
            if kind == "method" and name in ("self", "cls"):
                continue
            pid = f"{fid}.{name}"
            self.add_node(KGNode(
                id=pid, kind="parameter", name=name,
                detail=_detail(type_hint=hint, default=default),
            ))
            self.add_edge(fid, pid, "has-parameter")

    def _import(self, owner: str, node) -> None:
        if isinstance(node, ast.Import):
            targets = [alias.name.split(".")[0] for alias in node.names]
        else:
            if node.level and not node.module:
                return  # bare relative import, stays in-package
            targets = [node.module.split(".")[0]] if node.module else []
        for target in targets:
            if target == self.walk.package_name:
                continue
            self.add_node(KGNode(id=target, kind="package", name=target,
                                 detail={"external": True}))
            self.add_edge(owner, target, "imports")


def _detail(type_hint: str | None = None, default: str | None = None,
            docstring: str | None = None, signature: str | None = None) -> dict:
    detail = {}
    if type_hint is not None:
        detail["type-hint"] = type_hint
    if default is not None:
        detail["default-value"] = default
    if docstring is not None:
        detail["docstring-head"] = docstring
    if signature is not None:
        detail["signature"] = signature
    return detail


def parse_local_package(graph: KnowledgeGraph, package_path: str | Path) -> dict:
    """Build (or atomically rebuild) the graph for one package.

    Returns a build report with node counts by kind, edge counts by
    relation, and any per-file parse failures.
    """
    walk = pyast.walk_package(package_path)
    nodes, edges = _PackageGraphBuilder(walk).build()
    graph.replace_package(walk.package_name, nodes, edges)
    node_counts: dict[str, int] = {}
    for node in nodes:
        node_counts[node.kind] = node_counts.get(node.kind, 0) + 1
    edge_counts: dict[str, int] = {}
    for edge in edges:
        edge_counts[edge.relation] = edge_counts.get(edge.relation, 0) + 1
    return {
        "package": walk.package_name,
        "nodes": node_counts,
        "edges": edge_counts,
        "parse_failures": walk.failures,
    }


# --------------------------------------------------------------------------
# query language


_QUERY_FORMS = ("children-of", "methods-of-class", "signature-of",
                "inherits-chain", "imports-of", "match")


def query_knowledge_graph(graph: KnowledgeGraph, query: str) -> list[dict]:
    """Evaluate one pattern query; see _QUERY_FORMS for the verbs."""
    if not graph.nodes:
        raise EmptyGraphError("knowledge graph is empty")
    text = query.strip()
    if not text:
        raise MalformedQueryError("empty query", position=0)
    parts = text.split()
    verb = parts[0]
    if verb not in _QUERY_FORMS:
        raise MalformedQueryError(
            f"unknown query form {verb!r} at position 0", position=0,
        )
    args = parts[1:]
    if verb == "match":
        if len(args) != 2:
            raise MalformedQueryError(
                f"match needs <kind> <pattern> at position {len(verb) + 1}",
                position=len(verb) + 1,
            )
        kind, pattern = args
        if kind not in NODE_KINDS and kind != "*":
            raise MalformedQueryError(
                f"unknown node kind {kind!r} at position {len(verb) + 1}",
                position=len(verb) + 1,
            )
        return [n.to_doc() for n in graph.nodes.values()
                if (kind == "*" or n.kind == kind)
                and fnmatch.fnmatchcase(n.name, pattern)]
    if len(args) != 1:
        raise MalformedQueryError(
            f"{verb} needs exactly one argument at position {len(verb) + 1}",
            position=len(verb) + 1,
        )
    node = graph.resolve(args[0])
    if node is None:
        return []
    nodes = graph.nodes
    if verb == "children-of":
        out = [e for e in graph.edges if e.from_id == node.id
               and e.relation in ("contains", "defines")]
        return [nodes[e.to_id].to_doc() for e in out if e.to_id in nodes]
    if verb == "methods-of-class":
        out = graph.out_edges(node.id, "has-method")
        return [nodes[e.to_id].to_doc() for e in out if e.to_id in nodes]
    if verb == "signature-of":
        sig = node.detail.get("signature")
        params = [nodes[e.to_id].to_doc()
                  for e in graph.out_edges(node.id, "has-parameter")
                  if e.to_id in nodes]
        return [{"id": node.id, "signature": sig, "parameters": params}]
    if verb == "inherits-chain":
        chain = [node.to_doc()]
        seen = {node.id}
        current = node.id
        while True:
            bases = graph.out_edges(current, "inherits")
            if not bases or bases[0].to_id in seen:
                break
            current = bases[0].to_id
            seen.add(current)
            if current in nodes:
                chain.append(nodes[current].to_doc())
        return chain
    if verb == "imports-of":
        out = graph.out_edges(node.id, "imports")
        return [nodes[e.to_id].to_doc() for e in out if e.to_id in nodes]
    raise MalformedQueryError(f"unhandled verb {verb!r}", position=0)
