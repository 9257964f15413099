"""Exception hierarchy shared across the toolkit.

All library errors derive from :class:`IfxError` so the CLI can map any
data or validation failure to a single exit code.
"""


class IfxError(Exception):
    """Base class for all toolkit errors."""


class ParseError(IfxError):
    """Malformed input text (bad header, row shape, non-numeric field)."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(IfxError):
    """Data violates a documented invariant."""


class FitError(IfxError):
    """Model fitting failed (singular input, non-convergence)."""


class DataError(IfxError):
    """Inconsistent in-memory data fed to an operation."""
