"""Exception hierarchy shared by all modules."""


class RieszMorreyError(Exception):
    """Base class for every error raised by the package."""


class PreconditionError(RieszMorreyError, ValueError):
    """An input violates a documented precondition (integrability, positivity, ...)."""


class EvaluationError(RieszMorreyError, ArithmeticError):
    """A function produced a non-finite value at a quadrature node."""

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class DivergenceError(RieszMorreyError, ArithmeticError):
    """A quantity required to be finite was found to diverge."""

    def __init__(self, message, verdict=None):
        super().__init__(message)
        self.verdict = verdict


class TruncationError(EvaluationError):
    """The truncated tail of an improper integral could not be bounded."""


class ConfigError(RieszMorreyError, ValueError):
    """Invalid or unknown experiment configuration."""
