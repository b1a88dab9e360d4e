"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: input problems (parse, scenario,
usage) are distinct from numerical failures (domain exits, singular
solves, unreachable targets), which are distinct from negative verdicts.
"""


class TanliftError(Exception):
    """Base class for all package errors."""


class ChartDomainError(TanliftError):
    """A coordinate vector fell outside the chart domain."""

    def __init__(self, message, coords=None):
        super().__init__(message)
        self.coords = coords


class DomainExitError(ChartDomainError):
    """A trajectory left the chart domain; carries the exit time."""

    def __init__(self, message, coords=None, time=None):
        super().__init__(message, coords)
        self.time = time


class StepBudgetError(TanliftError):
    """The requested horizon needs more integrator steps than allowed."""


class ExpressionError(TanliftError):
    """A coefficient expression failed to parse; carries the 0-based position."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ScenarioError(TanliftError):
    """A scenario document is malformed or inconsistent."""


class AlignmentError(TanliftError):
    """Control segment boundaries cannot be aligned with a quadrature grid."""


class UnreachableTargetError(TanliftError):
    """A steering target lies outside the reachable set; carries the residual."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class TargetBaseError(TanliftError):
    """A steering target sits over the wrong base point."""


class NumericalError(TanliftError):
    """A linear solve or quadrature failed numerically."""
