"""Path confinement policy.

All file and execution operations resolve through here: symlinks and
parent traversal are expanded *before* the containment check, so a path
that lexically sits under the project root but points elsewhere is still
rejected. The benchmark task/answer directory is always denied to prevent
solution leakage into agent context.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import DeniedSubtreeError, PathEscapeError

BENCHMARK_SUBTREE = "benchmark_tasks"


@dataclass
class PathPolicy:
    project_root: Path
    denied_subtrees: list[Path] = field(default_factory=list)

    def __post_init__(self):
        self.project_root = Path(self.project_root).resolve()
        denied = [Path(d) for d in self.denied_subtrees]
        bench = self.project_root / BENCHMARK_SUBTREE
        if bench not in [self._abs(d) for d in denied]:
            denied.append(bench)
        self.denied_subtrees = [self._abs(d) for d in denied]

    def _abs(self, p: Path) -> Path:
        p = Path(p)
        if not p.is_absolute():
            p = self.project_root / p
        # Resolve the denied anchor itself so comparisons are canonical.
        return Path(os.path.realpath(p))

    def resolve(self, requested: str | os.PathLike) -> Path:
        """Return the canonical in-scope path or raise.

        Raises:
            PathEscapeError: resolved target leaves the project root.
            DeniedSubtreeError: resolved target is inside a denied subtree.
        """
        raw = Path(requested)
        candidate = raw if raw.is_absolute() else self.project_root / raw
        # realpath resolves symlinks and ".." without requiring existence
        resolved = Path(os.path.realpath(candidate))
        if not self._is_within(resolved, self.project_root):
            raise PathEscapeError(
                f"{requested!s} resolves outside the project root"
            )
        for denied in self.denied_subtrees:
            if self._is_within(resolved, denied):
                raise DeniedSubtreeError(
                    f"{requested!s} is inside the denied subtree {denied.name}"
                )
        return resolved

    @staticmethod
    def _is_within(path: Path, ancestor: Path) -> bool:
        try:
            path.relative_to(ancestor)
            return True
        except ValueError:
            return False


def resolve_path(policy: PathPolicy, requested: str | os.PathLike) -> Path:
    return policy.resolve(requested)
