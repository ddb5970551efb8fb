"""Target-runtime environments and package management.

Two backends behind one interface:

* ``SiteDirEnvironment`` — an isolated directory of installed packages
  ("venv-style"): listings cover only that directory, installs go there via
  ``pip install --target``, and executions get it prepended to PYTHONPATH.
  With ``include_base=True`` it acts as an overlay on the host interpreter.
* ``SystemEnvironment`` — the host interpreter's own package set.

Package listings read distribution metadata directly instead of shelling
out, which keeps ``check_installed_packages`` fast and lets tests seed
fixture environments by dropping ``*.dist-info`` directories in place.
"""

from __future__ import annotations

import importlib.metadata as im
import logging
import re
import subprocess
import sys
import threading
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import EnvironmentMissingError, PreconditionError

logger = logging.getLogger(__name__)


def normalize_package_name(name: str) -> str:
    """PEP 503 normalization; hyphen/underscore/dot variants collapse."""
    return re.sub(r"[-_.]+", "-", name).lower()


@dataclass
class PackageEntry:
    name: str
    version: str | None
    install_path: str | None = None
    module_location: str | None = None
    installed: bool = True

    def to_doc(self) -> dict:
        return {
            "name": self.name,
            "version": self.version,
            "install_path": self.install_path,
            "module_location": self.module_location,
            "installed": self.installed,
        }


@dataclass
class PackageReport:
    entries: list[PackageEntry]

    @property
    def count(self) -> int:
        return len(self.entries)

    def to_doc(self) -> dict:
        return {"entries": [e.to_doc() for e in self.entries], "count": self.count}


class Environment:
    """Interface both backends implement."""

    name = "environment"

    def metadata_paths(self) -> list[str]:
        raise NotImplementedError

    def python_command(self) -> list[str]:
        return [sys.executable]

    def run_env(self) -> dict[str, str]:
        """Extra environment variables for executions in this environment."""
        return {}

    def pip_install_args(self, specs: list[str]) -> list[str]:
        raise NotImplementedError

    # -- shared implementations -------------------------------------------

    def _distributions(self) -> list[im.Distribution]:
        return list(im.distributions(path=self.metadata_paths()))

    def list_packages(self) -> PackageReport:
        entries = []
        seen = set()
        for dist in self._distributions():
            name = dist.metadata.get("Name") or dist.name
            key = normalize_package_name(name)
            if key in seen:
                continue
            seen.add(key)
            location = str(dist.locate_file("")) if dist.files is not None else None
            entries.append(PackageEntry(
                name=name,
                version=dist.version,
                install_path=location,
            ))
        entries.sort(key=lambda e: normalize_package_name(e.name))
        return PackageReport(entries)

    def find_package(self, name: str) -> PackageEntry:
        wanted = normalize_package_name(name)
        for dist in self._distributions():
            dist_name = dist.metadata.get("Name") or dist.name
            if normalize_package_name(dist_name) != wanted:
                continue
            location = str(dist.locate_file(""))
            return PackageEntry(
                name=dist_name,
                version=dist.version,
                install_path=location,
                module_location=self._module_location(dist, location),
            )
        return PackageEntry(name=name, version=None, installed=False)

    @staticmethod
    def _module_location(dist: im.Distribution, location: str) -> str | None:
        top = dist.read_text("top_level.txt")
        if top:
            first = top.strip().splitlines()[0].strip()
            if first:
                return str(Path(location) / first)
        return None

    def check_versions(self, names: list[str]) -> PackageReport:
        if not names:
            raise PreconditionError("names must be non-empty")
        return PackageReport([self.find_package(n) for n in names])


class SystemEnvironment(Environment):
    name = "system"

    def metadata_paths(self) -> list[str]:
        return list(sys.path)

    def pip_install_args(self, specs: list[str]) -> list[str]:
        return [sys.executable, "-m", "pip", "install", "--no-input", *specs]


class SiteDirEnvironment(Environment):
    def __init__(self, site_dir: str | Path, include_base: bool = False):
        self.site_dir = Path(site_dir)
        self.include_base = include_base
        if not self.site_dir.is_dir():
            raise EnvironmentMissingError(f"no environment at {self.site_dir}")
        self.name = "venv-style" if not include_base else "overlay"

    def metadata_paths(self) -> list[str]:
        paths = [str(self.site_dir)]
        if self.include_base:
            paths.extend(sys.path)
        return paths

    def run_env(self) -> dict[str, str]:
        return {"PYTHONPATH": str(self.site_dir)}

    def pip_install_args(self, specs: list[str]) -> list[str]:
        return [
            sys.executable, "-m", "pip", "install", "--no-input",
            "--target", str(self.site_dir), *specs,
        ]


@dataclass
class InstallOutcome:
    spec: str
    status: str  # "installed" | "already-present" | "failed"
    message: str = ""

    def to_doc(self) -> dict:
        return {"spec": self.spec, "status": self.status, "message": self.message}


_SPEC_NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*")

# Installs are serialized per environment; pip does not tolerate concurrent
# writers into one target.
_env_locks: dict[int, threading.Lock] = {}
_env_locks_guard = threading.Lock()


def _lock_for(env: Environment) -> threading.Lock:
    with _env_locks_guard:
        return _env_locks.setdefault(id(env), threading.Lock())


def install_dependencies(
    env: Environment,
    specs: list[str],
    timeout_s: float = 600.0,
) -> list[InstallOutcome]:
    """Install each requirement spec; resolver failures are per-spec."""
    if not specs:
        raise PreconditionError("specs must be non-empty")
    outcomes = []
    with _lock_for(env):
        for spec in specs:
            match = _SPEC_NAME_RE.match(spec.strip())
            is_path = "/" in spec or spec.endswith(".whl")
            if match and not is_path:
                entry = env.find_package(match.group(0))
                bare = match.group(0) == spec.strip()
                if entry.installed and bare:
                    outcomes.append(InstallOutcome(spec, "already-present"))
                    continue
            cmd = env.pip_install_args([spec])
            try:
                proc = subprocess.run(
                    cmd, capture_output=True, text=True, timeout=timeout_s,
                )
            except subprocess.TimeoutExpired:
                outcomes.append(InstallOutcome(spec, "failed", "install timed out"))
                continue
            if proc.returncode == 0:
                outcomes.append(InstallOutcome(spec, "installed"))
            else:
                tail = (proc.stderr or proc.stdout or "").strip().splitlines()
                outcomes.append(InstallOutcome(
                    spec, "failed", tail[-1] if tail else "pip failed",
                ))
    return outcomes
