"""Tool descriptors and handlers for the workspace server."""

from __future__ import annotations

from ..toolbus.registry import ServerKind, ToolDescriptor, ToolHandler, ToolRegistry
from .environment import Environment, install_dependencies
from .execution import Workspace


def workspace_tools(ws: Workspace) -> list[tuple[ToolDescriptor, ToolHandler]]:
    env: Environment = ws.environment

    def _check_installed(args: dict) -> dict:
        return env.list_packages().to_doc()

    def _check_version(args: dict) -> dict:
        return env.check_versions(args["names"]).to_doc()

    def _install(args: dict) -> dict:
        outcomes = install_dependencies(env, args["specs"])
        return {"results": [o.to_doc() for o in outcomes]}

    def _execute_code(args: dict) -> dict:
        return ws.execute_code(args["source"], timeout_s=args.get("timeout_s")).to_doc()

    def _execute_shell(args: dict) -> dict:
        return ws.execute_shell_command(
            args["command"], cwd=args.get("cwd"), timeout_s=args.get("timeout_s")
        ).to_doc()

    def _run_script(args: dict) -> dict:
        return ws.create_and_execute_script(
            args["content"], timeout_s=args.get("timeout_s")
        ).to_doc()

    def _read_file(args: dict) -> dict:
        return {"path": args["path"], "content": ws.read_file(args["path"])}

    return [
        (
            ToolDescriptor(
                name="check_installed_packages",
                description="List all installed packages in the configured "
                            "environment with versions and a total count.",
                input_schema={"type": "object", "properties": {}},
                server=ServerKind.WORKSPACE,
            ),
            _check_installed,
        ),
        (
            ToolDescriptor(
                name="check_package_version",
                description="Resolve version, install path and module location "
                            "for the named packages; name variations with "
                            "hyphens, underscores and dots are normalized.",
                input_schema={
                    "type": "object",
                    "properties": {
                        "names": {"type": "array", "items": {"type": "string"}},
                    },
                    "required": ["names"],
                },
                server=ServerKind.WORKSPACE,
            ),
            _check_version,
        ),
        (
            ToolDescriptor(
                name="install_dependencies",
                description="Install requirement specs into the configured "
                            "environment; reports installed, already-present "
                            "or failed per spec.",
                input_schema={
                    "type": "object",
                    "properties": {
                        "specs": {"type": "array", "items": {"type": "string"}},
                    },
                    "required": ["specs"],
                },
                server=ServerKind.WORKSPACE,
            ),
            _install,
        ),
        (
            ToolDescriptor(
                name="execute_code",
                description="Persist the given source under the code storage "
                            "directory, run it in the configured environment and "
                            "capture stdout/stderr with a wall-clock timeout.",
                input_schema={
                    "type": "object",
                    "properties": {
                        "source": {"type": "string"},
                        "timeout_s": {"type": "number"},
                    },
                    "required": ["source"],
                },
                server=ServerKind.WORKSPACE,
            ),
            _execute_code,
        ),
        (
            ToolDescriptor(
                name="execute_shell_command",
                description="Run a shell command with a configurable working "
                            "directory inside the project root.",
                input_schema={
                    "type": "object",
                    "properties": {
                        "command": {"type": "string"},
                        "cwd": {"type": "string"},
                        "timeout_s": {"type": "number"},
                    },
                    "required": ["command"],
                },
                server=ServerKind.WORKSPACE,
            ),
            _execute_shell,
        ),
        (
            ToolDescriptor(
                name="create_and_execute_script",
                description="Write a shell script to the code storage directory, "
                            "mark it executable and run it.",
                input_schema={
                    "type": "object",
                    "properties": {"content": {"type": "string"},
                                   "timeout_s": {"type": "number"}},
                    "required": ["content"],
                },
                server=ServerKind.WORKSPACE,
            ),
            _run_script,
        ),
        (
            ToolDescriptor(
                name="read_file",
                description="Read a text file inside the project root; binary "
                            "content is rejected and large files truncated.",
                input_schema={
                    "type": "object",
                    "properties": {"path": {"type": "string"}},
                    "required": ["path"],
                },
                server=ServerKind.WORKSPACE,
            ),
            _read_file,
        ),
    ]


def save_file_tool(ws: Workspace) -> tuple[ToolDescriptor, ToolHandler]:
    """Provided for completeness; not part of the default agent toolsets."""

    def _save_file(args: dict) -> dict:
        return {"path": ws.save_file(args["path"], args["content"])}

    return (
        ToolDescriptor(
            name="save_file",
            description="Write content to a file inside the project root.",
            input_schema={
                "type": "object",
                "properties": {"path": {"type": "string"},
                               "content": {"type": "string"}},
                "required": ["path", "content"],
            },
            server=ServerKind.WORKSPACE,
        ),
        _save_file,
    )


def register_workspace_tools(registry: ToolRegistry, ws: Workspace) -> None:
    for descriptor, handler in workspace_tools(ws):
        registry.register(descriptor, handler)
