"""Exception hierarchy shared by every stage of the pipeline."""

from __future__ import annotations


class QgafError(Exception):
    """Base class for all errors raised by qgafkit."""


class ValidationError(QgafError, ValueError):
    """Input violates a documented precondition."""


class ParseError(ValidationError):
    """A CSV row could not be parsed.

    Parameters
    ----------
    message : str
        Human readable description.
    line : int
        1-based line number in the source (the header is line 1).
    source : str, optional
        File path or URL the row came from.
    """

    def __init__(self, message: str, line: int, source: str | None = None):
        self.line = line
        self.source = source
        where = f"{source}:" if source else "line "
        super().__init__(f"{where}{line}: {message}")


class DegenerateWindowError(ValidationError):
    """Window has max == min, so min-max normalization is undefined."""


class DomainError(ValidationError):
    """A value lies outside the domain of an operation (arccos, sign recovery)."""


class FetchError(QgafError):
    """HTTP fetch returned a non-success status or a non-CSV body."""

    def __init__(self, message: str, status: int | None = None):
        self.status = status
        super().__init__(message)


class NetworkError(FetchError):
    """The remote host could not be reached."""


class FormatError(QgafError):
    """A binary file (PGM, archive, checkpoint) is malformed or incompatible."""


class TrainingError(QgafError):
    """Training diverged (non-finite loss or gradient)."""
