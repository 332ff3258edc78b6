"""Exception types raised across the package."""


class AcqError(Exception):
    """Base class for all package errors."""


class IngestionError(AcqError):
    pass


class QuerySyntaxError(AcqError):
    def __init__(self, message, line=1, column=1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class SafetyError(AcqError):
    """A head variable (or comparison variable) does not occur in any relational atom."""


class PreconditionError(AcqError):
    pass


class ClassificationError(AcqError):
    """The query is outside the classes the engine accepts."""

    def __init__(self, tag, detail=""):
        msg = tag if not detail else f"{tag}: {detail}"
        super().__init__(msg)
        self.tag = tag
        self.detail = detail


class BudgetExceeded(AcqError):
    pass
