"""Exception types shared across the package."""


class FormalConnError(Exception):
    """Base class for all library errors."""


class InsufficientPrecision(FormalConnError):
    """A computation would need coefficients at or beyond the truncation order.

    ``needed`` names the first grade (or exponent) that could not be read.
    """

    def __init__(self, message, needed=None):
        super().__init__(message)
        self.needed = needed


class ZeroSeries(FormalConnError):
    """Inversion of a series with no nonzero term below its truncation."""


class ZeroInput(FormalConnError):
    """An operation that needs a nonzero matrix received a zero one."""


class NotInHx(FormalConnError):
    """Root-group generator does not lie in H_x for the given point."""


class NotRegularClass(FormalConnError):
    """The conjugacy class admits no regular strata."""


class NotCompatible(FormalConnError):
    """The point is not compatible with the given Cartan subalgebra."""


class NoSolution(FormalConnError):
    """A graded linear solve that is guaranteed solvable failed (internal)."""


class NotRegular(FormalConnError):
    """The stratum or leading term is not regular."""


class Resonant(FormalConnError):
    """A depth-zero reduction hit a resonant residue."""


class NotNormalizer(FormalConnError):
    """The element does not normalize the torus."""


class InvalidFormalType(FormalConnError):
    """Formal-type data violates its invariants."""


class BaseFieldError(FormalConnError):
    """The computation needs constants outside every cyclotomic field."""


class ParseError(FormalConnError):
    """Malformed input text (series literal or document)."""


class ReductionStuck(FormalConnError):
    """The depth-lowering loop found no admissible move (internal guard)."""
