from .registry import (
    BUILTIN_TOOL_NAMES,
    AgentRole,
    DirectInvoker,
    ServerKind,
    ToolDescriptor,
    ToolInvocation,
    ToolRegistry,
    ToolResult,
    bind_direct,
    invoke_tool,
)
from .wire import WireClient, WireServer, serve_stdio, serve_wire

__all__ = [
    "BUILTIN_TOOL_NAMES",
    "AgentRole",
    "DirectInvoker",
    "ServerKind",
    "ToolDescriptor",
    "ToolInvocation",
    "ToolRegistry",
    "ToolResult",
    "bind_direct",
    "invoke_tool",
    "WireClient",
    "WireServer",
    "serve_stdio",
    "serve_wire",
]
