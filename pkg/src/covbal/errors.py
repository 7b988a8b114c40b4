"""Exception hierarchy.

Every error raised on bad input derives from :class:`CovbalError` and carries a
short machine-readable ``code`` (the class name) that the CLI puts in its JSON
error report. :class:`CertificateError` is kept separate because it signals a
bug in a solver, not a problem with the caller's data.
"""

from __future__ import annotations


class CovbalError(ValueError):
    """Base class for input and contract violations."""

    @property
    def code(self) -> str:
        return type(self).__name__


class CertificateError(RuntimeError):
    """A solver produced output that failed its own optimality/consistency check."""

    code = "CertificateFailure"


# netflow
class Infeasible(CovbalError):
    def __init__(self, message: str, remainder: int = 0):
        super().__init__(message)
        self.remainder = remainder


class InfeasibleAssignment(CovbalError):
    pass


class MissingPotentials(CovbalError):
    pass


# data model
class EmptyTreatment(CovbalError):
    pass


class CellOverflow(CovbalError):
    pass


class KappaOutOfRange(CovbalError):
    pass


# solvers
class NotTwoCovariates(CovbalError):
    pass


class QTooLarge(CovbalError):
    pass


class WrongSelectionSize(CovbalError):
    pass


class TooLarge(CovbalError):
    pass


class InfeasibleSizes(CovbalError):
    pass


# ingestion
class RowError(CovbalError):
    """An input-file problem tied to a 1-based row number (header is row 1)."""

    def __init__(self, message: str, row: int | None = None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class MissingColumn(RowError):
    pass


class DuplicateId(RowError):
    pass


class BadGroupValue(RowError):
    pass


class MalformedRow(RowError):
    pass
