"""Exception hierarchy shared across subsystems.

Every error carries a stable ``kind`` string so tool handlers and the bus
can map exceptions onto result envelopes without string matching.
"""

from __future__ import annotations


class SolverkitError(Exception):
    """Base class; ``kind`` is the machine-readable error identifier."""

    kind = "error"

    def __init__(self, message: str = "", **details):
        super().__init__(message or self.kind)
        self.message = message or self.kind
        self.details = details


class DuplicateNameError(SolverkitError):
    kind = "duplicate-name"


class UnknownToolError(SolverkitError):
    kind = "unknown-tool"


class SchemaViolationError(SolverkitError):
    kind = "schema-violation"


class PathEscapeError(SolverkitError):
    kind = "path-escape"


class DeniedSubtreeError(SolverkitError):
    kind = "denied-subtree"


class EnvironmentMissingError(SolverkitError):
    kind = "environment-missing"


class NotFoundError(SolverkitError):
    kind = "not-found"


class BinaryFileError(SolverkitError):
    kind = "binary-detected"


class PreconditionError(SolverkitError):
    kind = "precondition"


class FetchFailureError(SolverkitError):
    kind = "fetch-failure"


class EmptyCacheError(SolverkitError):
    kind = "empty-cache"


class PackageNotFoundError(SolverkitError):
    kind = "package-not-found"


class InvalidIdentifierError(SolverkitError):
    kind = "invalid-identifier"


class NotAPackageError(SolverkitError):
    kind = "not-a-package"


class MalformedQueryError(SolverkitError):
    kind = "malformed-query"


class EmptyGraphError(SolverkitError):
    kind = "empty-graph"


class WorkflowFailureError(SolverkitError):
    """The pipeline itself failed (e.g. unparseable structured model output)."""

    kind = "workflow-failure"


class TransportFailureError(SolverkitError):
    kind = "transport-failure"


class ScriptExhaustedError(SolverkitError):
    kind = "script-exhausted"


class MalformedScriptError(SolverkitError):
    kind = "malformed-script"


class ModelUnavailableError(SolverkitError):
    kind = "model-unavailable"


class NotOwnerError(SolverkitError):
    kind = "not-owner"


class StorageFailureError(SolverkitError):
    kind = "storage-failure"


class OrphanSpanError(SolverkitError):
    kind = "orphan-span"


class InvalidOverrideError(SolverkitError):
    kind = "invalid-override"


class TaskSchemaError(SolverkitError):
    kind = "schema-violation"
