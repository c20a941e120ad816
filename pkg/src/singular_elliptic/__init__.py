"""Fundamental solutions of a three-dimensional elliptic operator with singular coefficients."""

from .errors import CoincidentPole, DomainError, NonConvergent, PoleError
from .special_functions import EvalResult, SeriesControl

__version__ = "0.1.0"

__all__ = [
    "CoincidentPole",
    "DomainError",
    "EvalResult",
    "NonConvergent",
    "PoleError",
    "SeriesControl",
]
