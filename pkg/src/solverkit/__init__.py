"""solverkit: self-evolving agent orchestration with a tool bus, sandboxed
workspace, code intelligence, hybrid memory and a benchmark harness."""

__version__ = "0.1.0"
