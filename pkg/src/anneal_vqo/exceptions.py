"""Exception hierarchy used across the package."""


class AnnealVQOError(Exception):
    """Base class for all package errors."""


class CapacityError(AnnealVQOError, ValueError):
    """Requested problem size exceeds a documented memory or brute-force cap."""


class DimensionError(AnnealVQOError, ValueError):
    """Array lengths or qubit counts do not match."""


class InvalidInstanceError(AnnealVQOError, ValueError):
    """A 2-SAT instance or Ising model violates its invariants."""


class NumericError(AnnealVQOError, ArithmeticError):
    """A cost function produced a non-finite value."""


class GenerationError(AnnealVQOError, RuntimeError):
    """Instance sampling gave up after too many attempts."""

    def __init__(self, message, attempts):
        super().__init__(f"{message} (after {attempts} attempts)")
        self.attempts = attempts


class ParseError(AnnealVQOError, ValueError):
    """Malformed instance or ensemble file."""

    def __init__(self, message, line=None, path=None):
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}".strip())
        self.line = line
        self.path = path
