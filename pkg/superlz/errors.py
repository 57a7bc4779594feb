"""Exception hierarchy; each class maps onto a CLI exit code."""

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


class SuperLZError(Exception):
    """Base class for all toolkit errors."""

    exit_code = EXIT_NUMERICAL


class InvalidArgumentError(SuperLZError, ValueError):
    """Non-finite or otherwise invalid input."""

    exit_code = EXIT_USAGE


class DomainError(SuperLZError, ValueError):
    """Input outside the domain where a formula or model is defined."""

    exit_code = EXIT_USAGE


class OutOfPlaneError(InvalidArgumentError):
    """A field with y != 0 was passed to an xz-plane operation."""


class DegenerateBasisError(SuperLZError):
    """The instantaneous eigenbasis is ill-defined (gap = 0)."""


class NonConvergenceError(SuperLZError):
    """Integration or continuation did not converge.

    Attributes:
        partial: the last TransitionResult reached, if any.
        p_sequence: successive transition probabilities of a continuation loop.
    """

    def __init__(self, message, partial=None, p_sequence=None):
        super().__init__(message)
        self.partial = partial
        self.p_sequence = list(p_sequence or [])


class BoundaryNotFoundError(SuperLZError):
    """No sign change bracketing the superadiabatic boundary."""


class ScheduleInfeasibleError(SuperLZError, ValueError):
    """Velocity caps cannot meet the requested average velocity."""

    exit_code = EXIT_USAGE


class LandscapeFormatError(SuperLZError, ValueError):
    """Malformed landscape or schedule file."""

    exit_code = EXIT_USAGE

    def __init__(self, message, line=None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line
