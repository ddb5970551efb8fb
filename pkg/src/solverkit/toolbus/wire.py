"""Wire interface for the tool registry.

Speaks the tool-listing/tool-call subset of the open Model Context Protocol
as JSON-RPC 2.0, over two transports: a threaded HTTP endpoint and
newline-delimited stdio (so the registry can run as a plain subprocess
server). The client returns the same ToolResult envelopes as the direct
binding.
"""

from __future__ import annotations

import json
import logging
import sys
import threading
import urllib.error
import urllib.request
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any, TextIO

from ..errors import SolverkitError
from .registry import (
    AgentRole,
    InvocationRecorder,
    ToolInvocation,
    ToolRegistry,
    ToolResult,
    invoke_tool,
)

logger = logging.getLogger(__name__)

PROTOCOL_VERSION = "2024-11-05"


def _rpc_result(req_id: Any, result: Any) -> dict:
    return {"jsonrpc": "2.0", "id": req_id, "result": result}


def _rpc_error(req_id: Any, code: int, message: str) -> dict:
    return {"jsonrpc": "2.0", "id": req_id, "error": {"code": code, "message": message}}


def handle_rpc(
    registry: ToolRegistry,
    request: dict,
    timeout_s: float | None = None,
    recorder: InvocationRecorder | None = None,
) -> dict:
    """Dispatch one JSON-RPC request against the registry."""
    req_id = request.get("id")
    method = request.get("method")
    params = request.get("params") or {}
    if method == "initialize":
        return _rpc_result(req_id, {
            "protocolVersion": PROTOCOL_VERSION,
            "capabilities": {"tools": {}},
            "serverInfo": {"name": "solverkit-toolbus", "version": "0.1.0"},
        })
    if method == "tools/list":
        return _rpc_result(req_id, {"tools": registry.descriptors_doc()})
    if method == "tools/call":
        name = params.get("name")
        if not isinstance(name, str):
            return _rpc_error(req_id, -32602, "params.name must be a string")
        invocation = ToolInvocation(
            tool_name=name,
            arguments=params.get("arguments") or {},
            caller=AgentRole(params.get("caller", AgentRole.EXTERNAL.value)),
        )
        result = invoke_tool(registry, invocation, timeout_s=timeout_s,
                             recorder=recorder)
        return _rpc_result(req_id, {"envelope": result.to_doc()})
    return _rpc_error(req_id, -32601, f"unknown method {method!r}")


class _Handler(BaseHTTPRequestHandler):
    server_version = "solverkit-toolbus/0.1"

    def do_POST(self):  # noqa: N802 (http.server naming)
        length = int(self.headers.get("Content-Length", "0"))
        body = self.rfile.read(length)
        try:
            request = json.loads(body)
        except json.JSONDecodeError:
            response = _rpc_error(None, -32700, "parse error")
        else:
            response = handle_rpc(
                self.server.registry,  # type: ignore[attr-defined]
                request,
                timeout_s=self.server.timeout_s,  # type: ignore[attr-defined]
                recorder=self.server.recorder,  # type: ignore[attr-defined]
            )
        data = json.dumps(response).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, fmt, *args):
        logger.debug("wire: " + fmt, *args)


class WireServer:
    """Threaded HTTP server handle; concurrent calls run independently."""

    def __init__(
        self,
        registry: ToolRegistry,
        host: str = "127.0.0.1",
        port: int = 0,
        timeout_s: float | None = None,
        recorder: InvocationRecorder | None = None,
    ):
        try:
            self._httpd = ThreadingHTTPServer((host, port), _Handler)
        except OSError as exc:
            raise SolverkitError(f"bind failure on {host}:{port}: {exc}") from exc
        self._httpd.registry = registry  # type: ignore[attr-defined]
        self._httpd.timeout_s = timeout_s  # type: ignore[attr-defined]
        self._httpd.recorder = recorder  # type: ignore[attr-defined]
        self._thread = threading.Thread(target=self._httpd.serve_forever,
                                        name="toolbus-wire", daemon=True)
        self._thread.start()

    @property
    def address(self) -> tuple[str, int]:
        return self._httpd.server_address[:2]

    @property
    def url(self) -> str:
        host, port = self.address
        return f"http://{host}:{port}/"

    def shutdown(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        self._thread.join(timeout=5)

    def __enter__(self) -> "WireServer":
        return self

    def __exit__(self, *exc) -> None:
        self.shutdown()


def serve_wire(
    registry: ToolRegistry,
    host: str = "127.0.0.1",
    port: int = 0,
    timeout_s: float | None = None,
    recorder: InvocationRecorder | None = None,
) -> WireServer:
    return WireServer(registry, host=host, port=port, timeout_s=timeout_s,
                      recorder=recorder)


def serve_stdio(
    registry: ToolRegistry,
    stdin: TextIO | None = None,
    stdout: TextIO | None = None,
    timeout_s: float | None = None,
) -> None:
    """Serve newline-delimited JSON-RPC until EOF (MCP stdio transport)."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError:
            response = _rpc_error(None, -32700, "parse error")
        else:
            response = handle_rpc(registry, request, timeout_s=timeout_s)
        stdout.write(json.dumps(response) + "\n")
        stdout.flush()


class WireClient:
    """JSON-RPC client for a wire server; mirrors DirectInvoker's surface."""

    def __init__(self, url: str, timeout_s: float = 610.0):
        self.url = url.rstrip("/") + "/"
        self.timeout_s = timeout_s
        self._id = 0
        self._lock = threading.Lock()

    def _next_id(self) -> int:
        with self._lock:
            self._id += 1
            return self._id

    def _rpc(self, method: str, params: dict | None = None) -> Any:
        request = {"jsonrpc": "2.0", "id": self._next_id(), "method": method}
        if params is not None:
            request["params"] = params
        data = json.dumps(request).encode()
        req = urllib.request.Request(
            self.url, data=data, headers={"Content-Type": "application/json"}
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout_s) as resp:
                response = json.loads(resp.read())
        except (urllib.error.URLError, ConnectionError, OSError) as exc:
            raise ConnectionError(f"wire call failed: {exc}") from exc
        if "error" in response:
            raise SolverkitError(response["error"].get("message", "rpc error"))
        return response["result"]

    def initialize(self) -> dict:
        return self._rpc("initialize", {})

    def list_tools(self) -> list[dict]:
        return self._rpc("tools/list")["tools"]

    def call(
        self,
        tool_name: str,
        arguments: dict,
        caller: AgentRole = AgentRole.EXTERNAL,
        timeout_s: float | None = None,
    ) -> ToolResult:
        result = self._rpc("tools/call", {
            "name": tool_name,
            "arguments": arguments,
            "caller": caller.value,
        })
        return ToolResult.from_doc(result["envelope"])
