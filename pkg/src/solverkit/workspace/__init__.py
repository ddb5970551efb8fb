from .environment import (
    Environment,
    InstallOutcome,
    PackageEntry,
    PackageReport,
    SiteDirEnvironment,
    SystemEnvironment,
    install_dependencies,
    normalize_package_name,
)
from .execution import ExecutionResult, Workspace
from .policy import BENCHMARK_SUBTREE, PathPolicy, resolve_path
from .tools import register_workspace_tools, save_file_tool, workspace_tools

__all__ = [
    "Environment",
    "InstallOutcome",
    "PackageEntry",
    "PackageReport",
    "SiteDirEnvironment",
    "SystemEnvironment",
    "install_dependencies",
    "normalize_package_name",
    "ExecutionResult",
    "Workspace",
    "BENCHMARK_SUBTREE",
    "PathPolicy",
    "resolve_path",
    "register_workspace_tools",
    "save_file_tool",
    "workspace_tools",
]
