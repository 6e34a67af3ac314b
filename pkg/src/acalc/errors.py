"""Exception hierarchy for acalc."""
from __future__ import annotations


class ACalcError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(ACalcError, ValueError):
    """An algebra definition or argument failed validation."""


class DimensionMismatch(ValidationError):
    pass


class AssociativityViolation(ValidationError):
    def __init__(self, residual: float, triple: tuple[int, int, int]):
        self.residual = residual
        self.triple = triple
        super().__init__(
            f"associativity fails on basis triple {triple}: max residual {residual:.3e}"
        )


class UnityViolation(ValidationError):
    pass


class UnknownPreset(ValidationError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


class AlgebraMismatch(ACalcError, TypeError):
    pass


class NotInvertible(ACalcError, ArithmeticError):
    pass


class NotGenerated(ValidationError):
    pass


class NotCommutative(ACalcError):
    pass


class DimensionTooLarge(ACalcError):
    pass


class BadIndex(ACalcError, ValueError):
    pass


class EvaluationFailure(ACalcError):
    pass


class NonFiniteIntegrand(EvaluationFailure):
    pass


class NonFiniteTerm(ACalcError, ArithmeticError):
    pass


class RelationNotNull(ACalcError, ValueError):
    pass


class CenterMismatch(ACalcError, ValueError):
    pass


class DegenerateSlice(ACalcError, ValueError):
    pass


class NotEntireAndBeyondRadius(ACalcError, ValueError):
    pass


class CoefficientParseError(ACalcError, ValueError):
    """Raised by the coefficient mini-language; carries the offending offset."""

    def __init__(self, message: str, text: str, position: int):
        self.text = text
        self.position = position
        pointer = " " * position + "^"
        super().__init__(f"{message} at position {position}\n  {text}\n  {pointer}")
