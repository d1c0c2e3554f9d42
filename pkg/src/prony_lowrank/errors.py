"""Exception hierarchy shared by all modules."""


class PronyError(Exception):
    """Base class for every error raised by this package."""


class ShapeError(PronyError, ValueError):
    """Vector lengths or matrix sizes do not fit the operation."""


class DegenerateNodes(PronyError, ValueError):
    """Two nodes coincide (closer than the duplicate tolerance)."""


class ZeroAmplitude(PronyError, ValueError):
    pass


class NotNormalized(PronyError, ValueError):
    """A node or amplitude lies outside the unit box."""


class BadScale(PronyError, ValueError):
    pass


class BadNoise(PronyError, ValueError):
    pass


class BadParams(PronyError, ValueError):
    pass


class BadLambda(PronyError, ValueError):
    pass


class ZeroMass(PronyError, ValueError):
    """The zeroth moment vanishes, so no single-node fit exists."""


class NoRealSolution(PronyError, ArithmeticError):
    """The Prony system has no solution with real, distinct nodes."""


class NoRealRoots(PronyError, ArithmeticError):
    """The amplitude quadratic has a negative discriminant."""
