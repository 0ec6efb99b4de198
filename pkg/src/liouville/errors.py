"""Exception hierarchy shared by all modules."""


class LiouvilleError(Exception):
    """Base class for every error raised by the package."""


class DomainError(LiouvilleError, ValueError):
    """Argument outside the mathematical domain of an operation."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class ContractError(LiouvilleError, ValueError):
    """Inputs violate a precondition (grid mismatch, too few nodes, ...)."""


class SolverError(LiouvilleError, RuntimeError):
    """A linear or eigen solve failed."""


class ConvergenceError(LiouvilleError, RuntimeError):
    """An iteration did not reach its tolerance."""

    def __init__(self, message, last_residual=None, stage=None):
        super().__init__(message)
        self.last_residual = last_residual
        self.stage = stage


class ContinuationStall(ConvergenceError):
    """Arclength step rejected after the maximum number of halvings."""


class DegeneracyError(LiouvilleError, RuntimeError):
    """The numerical kernel is not one-dimensional."""


class TruncationError(LiouvilleError, RuntimeError):
    """A truncated sum or range was too short to decide the result."""

    def __init__(self, message, last_sample=None):
        super().__init__(message)
        self.last_sample = last_sample


class FormatError(LiouvilleError, ValueError):
    """Malformed persisted file."""


class ConfigError(LiouvilleError, ValueError):
    """Invalid run configuration."""

    def __init__(self, message, key=None, line=None):
        super().__init__(message)
        self.key = key
        self.line = line
