"""Exception hierarchy. Every error carries a stable machine code used by the
HTTP error payloads and the CLI ``--json`` output."""

from __future__ import annotations


class RailsafeError(Exception):
    """Base class for all domain errors."""

    code = "error"

    def __init__(self, message: str, details: list[str] | None = None):
        super().__init__(message)
        self.details: list[str] = details or []


# --- ontology ---------------------------------------------------------------

class OntologyParseError(RailsafeError):
    code = "parse-error"

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        pos = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + pos)
        self.line = line
        self.column = column


class OntologyConsistencyError(RailsafeError):
    """Raised with *every* violation found, not just the first."""

    code = "consistency-error"


class UnknownConceptError(RailsafeError):
    code = "unknown-concept"


# --- scenario sheets ---------------------------------------------------------

class MissingAnchorError(RailsafeError):
    code = "missing-anchor"


class SchemaMismatchError(RailsafeError):
    code = "schema-mismatch"


# --- petri engine ------------------------------------------------------------

class NetStructureError(RailsafeError):
    code = "net-structure"


class UnknownTransitionError(RailsafeError):
    code = "unknown-transition"


class UnknownPlaceError(RailsafeError):
    code = "unknown-place"


class NotEnabledError(RailsafeError):
    code = "not-enabled"


class InvalidBoundError(RailsafeError):
    code = "invalid-bound"


class PredicateSyntaxError(RailsafeError):
    code = "predicate-syntax"

    def __init__(self, message: str, position: int | None = None):
        pos = f" (at offset {position})" if position is not None else ""
        super().__init__(message + pos)
        self.position = position


# --- archive -----------------------------------------------------------------

class StorageError(RailsafeError):
    code = "storage-error"


class NotFoundError(RailsafeError):
    code = "not-found"


class IdConflictError(RailsafeError):
    code = "id-conflict"


class DocumentParseError(RailsafeError):
    code = "parse-error"


class InvariantViolationError(RailsafeError):
    code = "invariant-violation"


# --- query language ----------------------------------------------------------

class QuerySyntaxError(RailsafeError):
    code = "syntax-error"

    def __init__(self, message: str, line: int, column: int, expected: tuple[str, ...] = ()):
        hint = f"; expected {', '.join(expected)}" if expected else ""
        super().__init__(f"{message} at line {line}, column {column}{hint}")
        self.line = line
        self.column = column
        self.expected = expected


class UnknownParameterError(RailsafeError):
    code = "unknown-parameter"

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        super().__init__(message)
        self.line = line
        self.column = column
