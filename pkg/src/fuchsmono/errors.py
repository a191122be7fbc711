"""Exception hierarchy. Each carries a short machine-readable code for the CLI."""
from __future__ import annotations


class FuchsMonoError(Exception):
    code = "ERROR"


class DomainError(FuchsMonoError, ValueError):
    code = "DOMAIN"


class DegenerateError(FuchsMonoError, ValueError):
    code = "DEGENERATE"


class PoleError(DomainError):
    code = "POLE"


class NumericError(FuchsMonoError, ArithmeticError):
    code = "NUMERIC"


class ParameterError(FuchsMonoError, ValueError):
    """A parameter makes a formula's denominator vanish."""

    code = "PARAM_DEGENERATE"

    def __init__(self, quantity: str, msg: str | None = None):
        self.quantity = quantity
        super().__init__(msg or f"degenerate parameters: {quantity} vanishes")


class FuchsRelationError(ParameterError):
    code = "PARAM_FUCHS"


class ReducibleError(FuchsMonoError, ValueError):
    code = "REDUCIBLE"
