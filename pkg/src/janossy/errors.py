"""Exception hierarchy shared by every module."""


class JanossyError(Exception):
    """Base class for computation errors (the CLI maps these to exit code 1)."""


class DomainError(JanossyError, ValueError):
    """Argument outside the validated range of an operation."""


class ConvergenceError(JanossyError):
    """An iteration failed to converge.

    The best iterate seen is kept on ``best`` so callers can inspect it.
    """

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class StiffnessError(JanossyError):
    """Adaptive step size underflowed."""


class ConditioningError(JanossyError):
    """A linear operator is too close to singular for double precision."""


class UnsupportedPotentialError(JanossyError):
    """Potential is not even/one-cut/regular."""


class ConstraintInfeasibleError(JanossyError):
    """Pinned endpoint too deep in the bulk for a one-cut constrained measure."""


class ResolutionError(JanossyError):
    """Discretization too coarse (e.g. loss of positivity in a recurrence)."""


class ConsistencyError(JanossyError):
    """Two independent routes to the same quantity disagree."""
