"""Exception types raised across the package."""


class MentionCastError(Exception):
    """Base class for every error raised by mentioncast."""


class ValidationError(MentionCastError, ValueError):
    """A value violates a domain constraint (range, emptiness, ordering)."""


class ConfigurationError(MentionCastError):
    """Inputs are inconsistent with the requested method or regime."""


class LeakageError(MentionCastError):
    """Evidence dated after an instance's cutoff would reach a forecast."""


class DatasetError(ValidationError):
    """A dataset or forecast file failed schema validation.

    ``line`` and ``field`` locate the offending record when known.
    """

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class BackendError(MentionCastError):
    """The language-model backend could not be reached after all retries."""


class TransportError(BackendError):
    """A single backend call failed at the transport level; retryable."""


class ParseError(MentionCastError):
    """A backend reply could not be read as an integer score in 0..100."""

    def __init__(self, message, raw_reply):
        self.raw_reply = raw_reply
        super().__init__(f"{message}: {raw_reply!r}")
