"""Exception hierarchy shared by the evaluation routes."""

from __future__ import annotations


class DomainError(ValueError):
    """Arguments fall outside the region where a routine is defined or applicable."""


class PoleError(DomainError):
    """A lower parameter is a nonpositive integer, so the series has a pole."""


class CoincidentPole(DomainError):
    """Field point and pole coincide; the fundamental solutions are infinite there."""


class NonConvergent(ArithmeticError):
    """A series exhausted its term budget before meeting the requested tolerance.

    The partial result (an ``EvalResult`` with ``converged=False``) is kept on
    ``self.partial`` so callers can inspect how far the summation got.
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial
