"""Exception hierarchy shared by every module."""


class SixVertexError(Exception):
    """Base class for all package errors."""


class SingularPoint(SixVertexError, ValueError):
    """A weight or denominator was evaluated too close to a pole."""


class LengthMismatch(SixVertexError, ValueError):
    pass


class IndexOutOfRange(SixVertexError, IndexError):
    pass


class EqualSlots(SixVertexError, ValueError):
    pass


class DimensionMismatch(SixVertexError, ValueError):
    pass


class DenseCutoffExceeded(SixVertexError, ValueError):
    """Dense 2^L x 2^L materialization requested beyond the cutoff."""


class NonInvertible(SixVertexError, ArithmeticError):
    pass


class DegenerateRapidities(SixVertexError, ValueError):
    """Coincident rapidities or sites make a Cauchy-type prefactor blow up."""


class NoConvergence(SixVertexError, RuntimeError):
    pass


class OffShellInput(SixVertexError, ValueError):
    """Rapidities expected to satisfy the Bethe equations do not."""


class ConfigError(SixVertexError, ValueError):
    pass
