"""Exception hierarchy shared by all modules."""


class BFDError(Exception):
    """Base class for package errors."""


class InvalidGridError(BFDError, ValueError):
    """Grid size or domain is not admissible."""


class ConfigurationError(BFDError, ValueError):
    """Missing or inconsistent configuration (boundary data, experiment spec)."""


class UnsupportedError(BFDError, ValueError):
    """Input shape or kind is not supported by the operation."""


class SingularSystemError(BFDError, ArithmeticError):
    """A linear system that must be solved is singular."""


class NoSolutionError(BFDError, ArithmeticError):
    """A linear system has no solution; carries the residual report."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class InstabilityError(BFDError, RuntimeError):
    """The discrete solution grew beyond the allowed bound."""
