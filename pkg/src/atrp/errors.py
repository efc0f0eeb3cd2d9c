"""Exception types raised across the package."""


class AtrpError(Exception):
    """Base class for all package errors."""


class DatasetError(AtrpError):
    pass


class MissingColumn(DatasetError):
    pass


class BadProbability(DatasetError):
    pass


class ConflictingRule(DatasetError):
    pass


class ZeroTotal(DatasetError):
    pass


class SchemaError(DatasetError):
    pass


class IndexOutOfGroup(AtrpError, IndexError):
    pass


class EmptyBounds(AtrpError):
    """A fidelity request whose allowed interval is empty for some record."""


class UnsupportedSpec(AtrpError):
    pass


class InternalInfeasible(AtrpError):
    """The constructed solution failed its own feasibility check (a bug)."""


class GroupSolveError(AtrpError):
    """One or more QID groups failed; ``failures`` maps qid -> exception."""

    def __init__(self, failures):
        self.failures = dict(failures)
        parts = [f"{qid}: {exc}" for qid, exc in self.failures.items()]
        super().__init__("group solve failed for " + "; ".join(parts))


class TooLarge(AtrpError):
    pass


class EmptySelection(AtrpError):
    pass


class ZeroDenominator(AtrpError, ZeroDivisionError):
    pass


class UndefinedPosterior(AtrpError):
    pass


class Unresolvable(AtrpError):
    pass
