"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: :class:`InputError` -> 10,
:class:`GridError` -> 11, anything else -> 12.
"""


class SvpcError(Exception):
    """Base class for all errors raised by this package."""


class InputError(SvpcError, ValueError):
    """Malformed or unsupported input (bad dimension, unknown parameter, ...)."""


class DimensionError(InputError):
    """Operands have incompatible or unsupported dimensions."""


class GridError(SvpcError):
    """A grid is malformed or incompatible with the requested operation."""


class NotInvariantError(GridError):
    """A sampled function is not invariant under the signed permutation group."""

    def __init__(self, message, deviation=None, node=None):
        super().__init__(message)
        self.deviation = deviation
        self.node = node


class AllInfiniteError(InputError):
    """A function has no finite sample, so its conjugate is identically -inf."""


class NotInImageError(InputError):
    """A lifted point is not in the image of the lifting map."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class SVDConvergenceError(SvpcError):
    """The Jacobi SVD exceeded its sweep cap."""


class LPIterationError(SvpcError):
    """The simplex method exceeded its pivot cap (cycling sentinel)."""


class HyperplaneError(SvpcError):
    """No grid slope achieves the requested supporting-hyperplane accuracy."""

    def __init__(self, message, best):
        super().__init__(message)
        self.best = best
