"""Exception types shared across the package."""


class PapeoError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(PapeoError):
    """Malformed input bytes (transcript cue, JSON document, ...).

    ``offset`` is the byte offset into the input when known, ``cue`` the
    1-based cue number for transcript errors.
    """

    def __init__(self, message, offset=None, cue=None):
        super().__init__(message)
        self.offset = offset
        self.cue = cue


class VersionError(PapeoError):
    """Document declares a schema version this code does not understand."""


class SchemaError(PapeoError):
    """Structurally invalid layout/manifest JSON. ``path`` locates the field."""

    def __init__(self, message, path=""):
        super().__init__(message)
        self.path = path


class InputError(PapeoError):
    """Arguments violate an operation's preconditions."""


class EmbedError(PapeoError):
    """An embedding provider failed or returned an unusable response."""


class NotFound(PapeoError):
    """Unknown document, segment, or passage id."""


class Conflict(PapeoError):
    """Optimistic-concurrency revision mismatch."""


class Invalid(PapeoError):
    """A mutation would leave the document violating its invariants.

    Carries the offending ``violations`` (see :mod:`papeo.model`).
    """

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)
