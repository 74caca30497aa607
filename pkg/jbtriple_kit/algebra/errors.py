"""
Exception hierarchy for the triple algebra.

Everything raised on purpose by jbtriple_kit derives from TripleError so the
runner can tell a failed precondition apart from a programming error.
"""
from __future__ import annotations

from typing import Optional


class TripleError(Exception):
    """Base class for all library errors."""


class FactorSpecError(TripleError, ValueError):
    """Bad factor description (zero dimension, unknown kind, parse failure)."""


class FactorMismatchError(TripleError, ValueError):
    def __init__(self, expected, got):
        super().__init__(f"element belongs to {got}, expected {expected}")
        self.expected = expected
        self.got = got


class DomainError(TripleError, ValueError):
    """A norm precondition does not hold (‖a‖ ≥ 1, ‖a‖‖x‖ ≥ 1, non-unit x, ...)."""


class NotQuasiInvertibleError(TripleError):
    def __init__(self, condition: float, threshold: float):
        super().__init__(
            f"B(x,y) is numerically singular: condition {condition:.3e} > {threshold:.1e}"
        )
        self.condition = condition
        self.threshold = threshold


class NumericalError(TripleError):
    def __init__(self, message: str, value: Optional[complex] = None):
        super().__init__(message if value is None else f"{message} (offending value {value!r})")
        self.value = value


class NonConvergenceError(TripleError):
    def __init__(self, iterations: int, increment: float):
        super().__init__(f"no convergence after {iterations} terms (last increment {increment:.3e})")
        self.iterations = iterations
        self.increment = increment


class SlowConvergenceError(TripleError):
    def __init__(self, iterations: int, lambdas):
        super().__init__(
            f"odd-power iteration will not settle within {iterations} steps; spectral values "
            f"{[round(float(l), 12) for l in lambdas]} sit just below 1, use method='spectral'"
        )
        self.iterations = iterations
        self.lambdas = list(lambdas)


class NotATripotentError(TripleError, ValueError):
    def __init__(self, residual: float):
        super().__init__(f"element is not a tripotent: ‖{{e,e,e}} − e‖ = {residual:.3e}")
        self.residual = residual


class NotMaximalError(TripleError, ValueError):
    def __init__(self, residual: float):
        super().__init__(f"tripotent is not maximal: ‖B(e,e)‖_F = {residual:.3e}")
        self.residual = residual


class EmptyGamma1Error(TripleError):
    """The factor has no unitary tripotent (Matrix p ≠ q or a part without unitaries)."""


class IdentitySkipped(TripleError):
    """An identity trial could not be evaluated; carries the reason, counts as a skip."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class UnknownTestFunctionError(TripleError, KeyError):
    def __init__(self, name: str, known):
        super().__init__(f"unregistered test function {name!r}; known: {', '.join(sorted(known))}")
        self.name = name


class InternalConsistencyError(TripleError):
    """A certificate the mathematics guarantees did not hold numerically."""
