"""Exception types shared across the package."""


class SingrootError(Exception):
    """Base class for all package errors."""


class DimensionError(SingrootError, ValueError):
    """Operand shapes or variable counts do not agree."""


class BreadthError(SingrootError):
    """The point is not a corank-one (breadth-one) point at the given tolerance.

    ``corank`` is the number of singular values that fell below the
    threshold: 0 means the point looks regular, 2 or more means the null
    space is too large for the breadth-one algorithms.
    """

    def __init__(self, message, corank=None):
        super().__init__(message)
        self.corank = corank


class RankError(SingrootError):
    """A matrix that must have full column rank is numerically rank deficient."""


class DegenerateError(SingrootError):
    """A singular vector cannot be normalised to leading entry one."""


class NoStabilization(SingrootError):
    """An order-by-order construction hit its cap without terminating."""


class ConvergenceError(SingrootError):
    """An iterative numerical kernel failed to converge."""
