"""
Exception hierarchy shared by every module.

Each class carries the process exit code the command line maps it to.
"""


class OpenLocError(Exception):
    """Base class for all toolkit errors."""

    exit_code: int = 1


class DomainError(OpenLocError, ValueError):
    """A precondition on the inputs of an operation is violated."""

    exit_code = 2


class DimensionError(DomainError):
    """Matrix or vector shapes do not agree."""


class GeometryError(DomainError):
    """A geometric configuration is invalid for the requested operation."""


class ConvergenceError(OpenLocError, ArithmeticError):
    """An iterative method ran out of iterations."""

    exit_code = 3

    def __init__(
        self,
        message: str,
        *,
        iterations: int | None = None,
        block: tuple[int, int] | None = None,
    ):
        super().__init__(message)
        self.iterations = iterations
        self.block = block


class DegenerateOrbitError(ConvergenceError):
    """Two bounce points of an orbit collapsed onto each other."""


class ContinuationError(ConvergenceError):
    """Eigenvalue tracking could not decide between two continuations."""


class ParseError(OpenLocError, ValueError):
    """An input file does not follow its schema."""

    exit_code = 4

    def __init__(self, message: str, *, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
