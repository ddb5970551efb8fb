"""Sandboxed execution and confined file operations.

Code and scripts are persisted under ``<root>/workspace/code/`` with
sortable collision-free names before running, streams are captured with a
1 MiB cap per stream, and every run carries a wall-clock timeout.
"""

from __future__ import annotations

import itertools
import logging
import os
import stat
import subprocess
import threading
from dataclasses import dataclass
from pathlib import Path

from ..clockutil import Clock, utc_stamp
from ..errors import (
    BinaryFileError,
    NotFoundError,
    PreconditionError,
)
from .environment import Environment
from .policy import PathPolicy

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT_S = 600.0
STREAM_CAP_BYTES = 1 << 20
TRUNCATION_MARKER = "\n...[truncated]"
READ_CAP_BYTES = 1 << 20
CODE_SUBDIR = Path("workspace") / "code"


@dataclass
class ExecutionResult:
    exit_status: int
    stdout: str
    stderr: str
    code_path: str | None
    elapsed_ms: int
    timed_out: bool = False

    def to_doc(self) -> dict:
        return {
            "exit_status": self.exit_status,
            "stdout": self.stdout,
            "stderr": self.stderr,
            "code_path": self.code_path,
            "elapsed_ms": self.elapsed_ms,
            "timed_out": self.timed_out,
        }


def _cap(stream: bytes) -> str:
    text = stream.decode("utf-8", errors="replace")
    if len(stream) > STREAM_CAP_BYTES:
        return text[: STREAM_CAP_BYTES] + TRUNCATION_MARKER
    return text


class Workspace:
    """Execution + file surface, everything confined by the path policy."""

    def __init__(
        self,
        policy: PathPolicy,
        environment: Environment,
        clock: Clock | None = None,
        timeout_s: float = DEFAULT_TIMEOUT_S,
    ):
        self.policy = policy
        self.environment = environment
        self.clock = clock or Clock()
        self.timeout_s = timeout_s
        self._counter = itertools.count()
        self._counter_lock = threading.Lock()
        self.code_dir = policy.project_root / CODE_SUBDIR
        self.code_dir.mkdir(parents=True, exist_ok=True)

    # -- internals ---------------------------------------------------------

    def _next_code_path(self, suffix: str) -> Path:
        with self._counter_lock:
            n = next(self._counter)
        stamp = utc_stamp(self.clock.now())
        return self.code_dir / f"{stamp}-{n:04d}{suffix}"

    def _run(
        self,
        cmd: list[str],
        cwd: Path,
        code_path: Path | None,
        timeout_s: float | None,
    ) -> ExecutionResult:
        timeout = self.timeout_s if timeout_s is None else timeout_s
        env = dict(os.environ)
        extra = self.environment.run_env()
        if "PYTHONPATH" in extra and os.environ.get("PYTHONPATH"):
            extra = dict(extra)
            extra["PYTHONPATH"] = extra["PYTHONPATH"] + os.pathsep + os.environ["PYTHONPATH"]
        env.update(extra)
        start = self.clock.monotonic()
        timed_out = False
        try:
            proc = subprocess.run(
                cmd, cwd=str(cwd), env=env, capture_output=True, timeout=timeout,
            )
            exit_status, out, err = proc.returncode, proc.stdout, proc.stderr
        except subprocess.TimeoutExpired as exc:
            timed_out = True
            exit_status = -9  # killed; abnormal termination by contract
            out = exc.stdout or b""
            err = exc.stderr or b""
        elapsed_ms = max(0, int((self.clock.monotonic() - start) * 1000))
        rel = None
        if code_path is not None:
            rel = str(code_path.relative_to(self.policy.project_root))
        return ExecutionResult(
            exit_status=exit_status,
            stdout=_cap(out),
            stderr=_cap(err),
            code_path=rel,
            elapsed_ms=elapsed_ms,
            timed_out=timed_out,
        )

    # -- operations ---------------------------------------------------------

    def execute_code(self, source: str, timeout_s: float | None = None) -> ExecutionResult:
        if not source:
            raise PreconditionError("source must be non-empty")
        path = self._next_code_path(".py")
        path.write_text(source, encoding="utf-8")
        cmd = [*self.environment.python_command(), str(path)]
        return self._run(cmd, self.policy.project_root, path, timeout_s)

    def execute_shell_command(
        self,
        command: str,
        cwd: str | os.PathLike | None = None,
        timeout_s: float | None = None,
    ) -> ExecutionResult:
        if not command:
            raise PreconditionError("command must be non-empty")
        workdir = self.policy.resolve(cwd if cwd is not None else ".")
        return self._run(["/bin/sh", "-c", command], workdir, None, timeout_s)

    def create_and_execute_script(
        self, content: str, timeout_s: float | None = None
    ) -> ExecutionResult:
        if not content:
            raise PreconditionError("content must be non-empty")
        path = self._next_code_path(".sh")
        path.write_text(content, encoding="utf-8")
        path.chmod(path.stat().st_mode | stat.S_IXUSR | stat.S_IXGRP)
        return self._run([str(path)], self.policy.project_root, path, timeout_s)

    def read_file(self, path: str | os.PathLike) -> str:
        resolved = self.policy.resolve(path)
        if not resolved.is_file():
            raise NotFoundError(f"no file at {path!s}")
        head = resolved.open("rb").read(8192)
        if b"\x00" in head:
            raise BinaryFileError(f"{path!s} looks binary")
        if head:
            control = sum(1 for b in head if b < 9 or (13 < b < 32))
            if control / len(head) > 0.05:
                raise BinaryFileError(f"{path!s} looks binary")
        data = resolved.read_bytes()
        text = data[:READ_CAP_BYTES].decode("utf-8", errors="replace")
        if len(data) > READ_CAP_BYTES:
            text += TRUNCATION_MARKER
        return text

    def save_file(self, path: str | os.PathLike, content: str) -> str:
        resolved = self.policy.resolve(path)
        resolved.parent.mkdir(parents=True, exist_ok=True)
        resolved.write_text(content, encoding="utf-8")
        return str(resolved.relative_to(self.policy.project_root))
