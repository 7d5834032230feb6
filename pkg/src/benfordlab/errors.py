"""Exception types shared across the package."""


class BenfordLabError(Exception):
    """Base class for all package-specific errors."""


class ZeroOrNonFinite(BenfordLabError, ValueError):
    """A significand was requested for zero, infinity or NaN."""


class ParseError(BenfordLabError, ValueError):
    """A decimal string did not match the accepted number syntax."""


class ZeroValue(BenfordLabError, ValueError):
    """A parsed decimal string has numeric value zero."""


class DomainError(BenfordLabError, ValueError):
    """An argument lies outside the mathematical domain of the function."""


class EmptySample(BenfordLabError, ValueError):
    """A statistic was requested for a sample with no observations."""


class ModelError(BenfordLabError, ValueError):
    """A sampling model was configured with invalid parameters."""


class BudgetError(BenfordLabError, RuntimeError):
    """A simulation request exceeds the configured memory ceiling."""
