"""Exception hierarchy.

Everything derives from :class:`PPMMError`, itself a ``ValueError`` so that
callers who only care about "bad input" can catch the builtin.
"""


class PPMMError(ValueError):
    """Base class for all errors raised by this package."""


class NonPositiveVariance(PPMMError):
    pass


class NotPositiveDefinite(PPMMError):
    """Covariance matrix of a response pattern is not strictly positive definite."""


# The density code raises this name; same condition as above.
NotStrictlyPositiveDefinite = NotPositiveDefinite


class NotStrictlyPositiveResidual(PPMMError):
    """Conditional variance of Y given X is zero (or numerically so)."""


class RankDeficient(PPMMError):
    """A normal-equations matrix failed the relative pivot test."""


class RankDeficientDesign(RankDeficient):
    pass


class InsufficientPattern(PPMMError):
    """Fewer than two units in the respondent or nonrespondent pattern."""


class EmptyColumn(PPMMError):
    pass


class DegenerateProxy(PPMMError):
    """Proxy correlation too small (or negative) for the requested phi."""


class InvalidIdentification(PPMMError):
    """The identified nonrespondent moments do not form a proper bivariate normal."""


class Separation(PPMMError):
    """Logistic MLE does not exist: coefficients diverge."""


class InputError(PPMMError):
    """Malformed CSV or config input. ``line`` is 1-based and counts the header."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
