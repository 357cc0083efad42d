"""Exception hierarchy shared by all modules."""


class WickError(Exception):
    """Base class for errors raised by :mod:`wickstd`."""


class ValidationError(WickError, ValueError):
    """Malformed input: dimension mismatch, unsorted multi-index, bad mass..."""


class HypothesisError(WickError, ValueError):
    """A hypothesis of a standardization transform does not hold for the input."""


class TruncationError(WickError, ArithmeticError):
    """A finite chaos truncation would drop more than the allowed tail."""


class EnvelopeError(WickError, RuntimeError):
    """Rejection-sampling envelope could not be established or was violated."""
