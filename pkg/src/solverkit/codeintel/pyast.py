"""Shared AST helpers for static package analysis.

Both the symbol introspector and the knowledge-graph builder walk package
sources through here; nothing in this module ever executes target code.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import NotAPackageError


@dataclass
class ModuleSource:
    module_name: str  # dotted, rooted at the package name
    path: Path
    tree: ast.Module


@dataclass
class PackageWalk:
    package_name: str
    root: Path
    modules: list[ModuleSource] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)  # {path, error}


def walk_package(package_path: str | Path) -> PackageWalk:
    """Parse every module in a package directory (or a single-module file).

    Per-file parse failures are recorded and skipped, never fatal.
    """
    root = Path(package_path)
    if root.is_file() and root.suffix == ".py":
        walk = PackageWalk(package_name=root.stem, root=root.parent)
        _parse_into(walk, root, root.stem)
        return walk
    if not root.is_dir() or not (root / "__init__.py").exists():
        raise NotAPackageError(f"{package_path!s} is not a package")
    walk = PackageWalk(package_name=root.name, root=root)
    for path in sorted(root.rglob("*.py")):
        rel = path.relative_to(root)
        parts = [root.name, *rel.parts[:-1]]
        stem = rel.stem
        if stem != "__init__":
            parts.append(stem)
        # skip nested dirs that are not packages themselves
        probe = root
        nested_ok = True
        for part in rel.parts[:-1]:
            probe = probe / part
            if not (probe / "__init__.py").exists():
                nested_ok = False
                break
        if not nested_ok:
            continue
        _parse_into(walk, path, ".".join(parts))
    return walk


def _parse_into(walk: PackageWalk, path: Path, module_name: str) -> None:
    try:
        tree = ast.parse(path.read_text(encoding="utf-8"), filename=str(path))
    except (SyntaxError, UnicodeDecodeError) as exc:
        walk.failures.append({"path": str(path), "error": str(exc)})
        return
    walk.modules.append(ModuleSource(module_name=module_name, path=path, tree=tree))


def unparse(node: ast.AST | None) -> str | None:
    if node is None:
        return None
    try:
        return ast.unparse(node)
    except Exception:
        return None


def format_signature(fn: ast.FunctionDef | ast.AsyncFunctionDef) -> str:
    """Render a def signature with annotations and defaults verbatim."""
    args = fn.args
    rendered: list[str] = []

    def fmt(arg: ast.arg, default: ast.expr | None) -> str:
        out = arg.arg
        if arg.annotation is not None:
            out += f": {unparse(arg.annotation)}"
        if default is not None:
            out += f" = {unparse(default)}" if arg.annotation else f"={unparse(default)}"
        return out

    positional = args.posonlyargs + args.args
    defaults: list[ast.expr | None] = [None] * (len(positional) - len(args.defaults))
    defaults += list(args.defaults)
    for arg, default in zip(positional, defaults):
        rendered.append(fmt(arg, default))
        if args.posonlyargs and arg is args.posonlyargs[-1]:
            rendered.append("/")
    if args.vararg:
        rendered.append("*" + args.vararg.arg)
    elif args.kwonlyargs:
        rendered.append("*")
    for arg, default in zip(args.kwonlyargs, args.kw_defaults):
        rendered.append(fmt(arg, default))
    if args.kwarg:
        rendered.append("**" + args.kwarg.arg)
    sig = f"{fn.name}({', '.join(rendered)})"
    if fn.returns is not None:
        sig += f" -> {unparse(fn.returns)}"
    return sig


def iter_parameters(fn: ast.FunctionDef | ast.AsyncFunctionDef):
    """Yield (name, type_hint, default) for every parameter, in order."""
    args = fn.args
    positional = args.posonlyargs + args.args
    defaults: list[ast.expr | None] = [None] * (len(positional) - len(args.defaults))
    defaults += list(args.defaults)
    for arg, default in zip(positional, defaults):
        yield arg.arg, unparse(arg.annotation), unparse(default)
    if args.vararg:
        yield "*" + args.vararg.arg, unparse(args.vararg.annotation), None
    for arg, default in zip(args.kwonlyargs, args.kw_defaults):
        yield arg.arg, unparse(arg.annotation), unparse(default)
    if args.kwarg:
        yield "**" + args.kwarg.arg, unparse(args.kwarg.annotation), None


def docstring_head(node: ast.AST) -> str | None:
    doc = ast.get_docstring(node)
    if not doc:
        return None
    return doc.strip().splitlines()[0]
