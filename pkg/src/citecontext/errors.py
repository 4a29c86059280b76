"""Exception hierarchy shared across the toolkit."""


class CiteContextError(Exception):
    """Base class for all toolkit errors."""


class MalformedXml(CiteContextError):
    """Input bytes are not parseable XML."""


class NoBody(CiteContextError):
    """JATS article has no <body> element."""


class DanglingAnchor(CiteContextError):
    """Anchor ref-id does not resolve and no fallback label is configured."""


class SchemaInvalid(CiteContextError):
    """Schema definition file violates a structural invariant."""


class TierUnsupported(CiteContextError):
    """Prompt tier is not valid for this schema (e.g. Precise without a procedure)."""


class MissingTemplate(CiteContextError):
    """No template registered for the requested (schema, tier, language)."""


class BackendUnavailable(CiteContextError):
    """Every request to the annotation backend failed."""


class RecordInvalid(CiteContextError):
    """Imported annotation record fails validation."""

    def __init__(self, message: str, line_number: int | None = None):
        super().__init__(message if line_number is None else f"line {line_number}: {message}")
        self.line_number = line_number


class VectorMismatch(CiteContextError):
    """Label vectors do not cover the same contexts or schema."""


class EmptyMatrix(CiteContextError):
    """Confusion matrix has zero total."""


class StoreCorrupt(CiteContextError):
    """Stored runset fails checksum or parse validation."""


class NotFound(CiteContextError):
    """Requested runset or resource does not exist."""


class EmptySelection(CiteContextError):
    """Annotator selector matched no records overlapping the gold standard."""


class SchemaMismatch(CiteContextError):
    """Runsets combined into one session use different schemas."""


class UnknownSession(CiteContextError):
    """Adjudication session id does not exist."""


class UnknownContext(CiteContextError):
    """Context id is not part of the session queue."""


class InvalidLabel(CiteContextError):
    """Resolution label is not a class of the session schema."""
