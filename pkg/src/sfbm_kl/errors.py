"""Exception hierarchy.

Validation problems derive from :class:`ValueError` so callers can treat them as
bad input; numerical failures derive from :class:`NumericalError`. The command
line maps the first group to exit code 2 and the second to exit code 3.
"""


class DomainError(ValueError):
    """An argument lies outside the admissible domain of an operation."""


class SingularityError(DomainError):
    """A kernel was evaluated on its singular set."""


class WindowError(DomainError):
    """A fit window is outside the trusted part of a spectrum."""


class NumericalError(RuntimeError):
    """Base class for failures of a numerical procedure."""


class ConvergenceError(NumericalError):
    """A quadrature or iteration exhausted its budget."""


class NoMinimumError(NumericalError):
    """The saddle-point objective has no interior minimum."""


class ZeroHitError(NumericalError):
    """Plain Monte Carlo produced no sample inside the ball."""


class FactorizationError(NumericalError):
    """Cholesky factorization failed after all jitter escalations."""
