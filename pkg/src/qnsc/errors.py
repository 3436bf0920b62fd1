"""Exception hierarchy. Everything derives from :class:`AutomatonError`."""
from __future__ import annotations


class AutomatonError(ValueError):
    """Base error; carries an optional 1-based source position."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        if line is not None:
            where = f"line {line}" + (f", col {col}" if col is not None else "")
            message = f"{where}: {message}"
        super().__init__(message)


class NondeterminismError(AutomatonError):
    pass


class UnknownReferenceError(AutomatonError):
    pass


class StructureError(AutomatonError):
    pass


class AlphabetMismatchError(AutomatonError):
    pass


class ContainmentError(AutomatonError):
    pass


class BudgetError(AutomatonError):
    pass


class ParseError(AutomatonError):
    pass


class BoundsMismatchError(AutomatonError):
    pass


class EmptyMarkerSupportError(AutomatonError):
    pass
