"""Exception types raised across the package."""


class ChvError(Exception):
    pass


class ZeroPoint(ChvError, ValueError):
    """A point too close to the origin, where w is singular."""


class NonPositiveU(ChvError, ValueError):
    """u = c + w is not strictly positive; the shift constant is too small."""


class RangeViolation(ChvError, ValueError):
    """|P(x/|x|)| exceeded 1, which no point of the unit sphere should allow."""


class NonConvergence(ChvError, ArithmeticError):
    pass


class DomainError(ChvError, ArithmeticError):
    """A jet operation was asked to differentiate outside its domain."""


class InsufficientSamples(ChvError, ValueError):
    pass
