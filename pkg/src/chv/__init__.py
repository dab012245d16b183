"""Numerical verification of a singular solution to a conformal Hessian equation in R^5."""
from .errors import (
    ChvError,
    DomainError,
    InsufficientSamples,
    NonConvergence,
    NonPositiveU,
    RangeViolation,
    ZeroPoint,
)
from .verify import CheckReport

__version__ = "0.1.0"

__all__ = [
    "CheckReport",
    "ChvError",
    "DomainError",
    "InsufficientSamples",
    "NonConvergence",
    "NonPositiveU",
    "RangeViolation",
    "ZeroPoint",
]
