"""Shared exception types for the toolkit."""


class MsortError(Exception):
    """Base class for all toolkit errors."""


class ParseError(MsortError):
    """Syntax or declaration error in a source text, with position info."""

    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"line {line}, col {col}: {message}"
        super().__init__(message)


class SortCheckError(MsortError):
    """A term or formula violates its sort discipline."""


class EvalError(MsortError):
    """Evaluation failed, e.g. an assignment is missing a variable."""


class EmptySortError(MsortError):
    """An operation would produce or requires an empty domain."""


class NotASubstructureError(MsortError):
    """The claimed substructure relation does not hold."""


class CapExceededError(MsortError):
    """A configured enumeration or size cap was exceeded."""
