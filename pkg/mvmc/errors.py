"""Exception hierarchy. Each class carries the CLI exit code it maps to."""

from __future__ import annotations


class MvmcError(Exception):
    exit_code = 1


class ParameterError(MvmcError, ValueError):
    exit_code = 2


class ShapeError(ParameterError):
    pass


class ValidationError(ParameterError):
    pass


class MetricError(MvmcError, ValueError):
    """A quality or diversity index is undefined for the given labels."""
    exit_code = 2


class IngestionError(MvmcError, OSError):
    exit_code = 5


class DivergenceError(MvmcError, ArithmeticError):
    """A solver produced a non-finite value.

    Keeps the iteration number and the trace recorded so far so the CLI can
    still write the trace before exiting.
    """
    exit_code = 4

    def __init__(self, message: str, iteration: int, trace: list | None = None):
        super().__init__(message)
        self.iteration = iteration
        self.trace = list(trace or [])

    def __reduce__(self):
        return (type(self), (str(self), self.iteration, self.trace))
