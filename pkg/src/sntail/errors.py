"""Exception hierarchy shared by all modules."""


class SnTailError(Exception):
    """Base class for package errors."""


class DomainError(SnTailError, ValueError):
    """Argument outside the domain of an operation."""


class ConvergenceError(SnTailError, RuntimeError):
    """Iterative solver failed to bracket or converge."""


class NumericalError(SnTailError, RuntimeError):
    """Quadrature or regression failed; ``diagnostics`` holds details."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class ContractViolation(SnTailError, ValueError):
    """Caller asked for a branch whose preconditions do not hold."""


class UnsupportedParameters(SnTailError, ValueError):
    """Parameter combination outside the supported regime."""


class InternalConsistencyError(SnTailError, AssertionError):
    """A proven sign or ordering property failed numerically."""
