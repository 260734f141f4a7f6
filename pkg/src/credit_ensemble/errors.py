"""Exception types shared across the package."""


class CreditEnsembleError(Exception):
    """Base class for all errors raised by this package."""


class MalformedRecord(CreditEnsembleError, ValueError):
    """A data line could not be parsed.

    Parameters
    ----------
    line : int
        1-based line number in the source text.
    reason : str
        Human readable description of the defect.
    """

    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class CharacteristicsMismatch(CreditEnsembleError, ValueError):
    """Parsed totals disagree with the declared dataset characteristics."""


class TooFewRecords(CreditEnsembleError, ValueError):
    """A class has fewer members than the number of folds requested."""


class TooFewRows(CreditEnsembleError, ValueError):
    """A class has fewer training rows than prototypes requested."""


class DimensionMismatch(CreditEnsembleError, ValueError):
    """Vector or matrix widths do not agree."""


class NonFiniteUpdate(CreditEnsembleError, ArithmeticError):
    """Back-propagation produced a non-finite weight (training diverged)."""

    def __init__(self, epoch: int):
        self.epoch = epoch
        super().__init__(f"non-finite weight after epoch {epoch}")


class MissingClass(CreditEnsembleError, ValueError):
    """Training data lacks one of the two classes."""


class EmptyInput(CreditEnsembleError, ValueError):
    """An operation that needs at least one element received none."""


class IoFailure(CreditEnsembleError, OSError):
    """Report files could not be written."""


class DegenerateColumnWarning(UserWarning):
    """A numeric column is constant; it encodes to 0.0."""
