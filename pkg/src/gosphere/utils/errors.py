#!/usr/bin/env python3
"""
Error Hierarchy
Every failure the toolkit reports carries a stable code and a details dict
"""

from typing import Any, Dict, Iterable, Optional

import numpy as np


def _plain(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    return value


class GosphereError(Exception):
    """Base class for all toolkit errors."""

    code = "GOSPHERE_ERROR"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = {key: _plain(value) for key, value in (details or {}).items()}

    def to_dict(self) -> Dict[str, Any]:
        return {"error": self.message, "code": self.code, "details": self.details}


class ValidationError(GosphereError):
    """Bad user input or configuration."""

    code = "VALIDATION_ERROR"


class InvalidInputError(GosphereError):
    code = "INVALID_INPUT"


class DimensionMismatchError(InvalidInputError):
    code = "DIMENSION_MISMATCH"


class NotStronglyConvexError(GosphereError):
    """Fundamental tensor indefinite or near-singular at a witness vector."""

    code = "NOT_STRONGLY_CONVEX"

    def __init__(self, message: str, witness: Iterable[float], ratio: Optional[float] = None):
        witness = np.asarray(witness, dtype=float)
        super().__init__(message, {"witness": witness, "eigen_ratio": ratio})
        self.witness = witness
        self.ratio = ratio


class OutOfScopeError(GosphereError):
    code = "OUT_OF_SCOPE"


class NavigationDomainError(GosphereError):
    """The wind is too strong somewhere: F(-W) >= 1."""

    code = "NAVIGATION_DOMAIN"


class NumericalError(GosphereError):
    code = "NUMERICAL_ERROR"


class NotKillingError(GosphereError):
    code = "NOT_KILLING"


class SwitchChartSignal(GosphereError):
    """Raised when a chart point is too close to the chart boundary."""

    code = "SWITCH_CHART"


class InvalidFlagError(GosphereError):
    code = "INVALID_FLAG"


class NotClosedError(GosphereError):
    code = "NOT_CLOSED"


class PreconditionError(GosphereError):
    code = "PRECONDITION_FAILED"


class SearchFailureError(GosphereError):
    code = "SEARCH_FAILURE"


class NotConstantCurvatureError(GosphereError):
    code = "NOT_CONSTANT_CURVATURE"


class ExpressionError(ValidationError):
    code = "EXPRESSION_ERROR"


class ExpressionSyntaxError(ExpressionError):
    code = "EXPRESSION_SYNTAX"

    def __init__(self, message: str, offset: int, expected: Iterable[str]):
        expected = sorted(set(expected))
        super().__init__(f"{message} at offset {offset} (expected one of: {', '.join(expected)})",
                         {"offset": offset, "expected": expected})
        self.offset = offset
        self.expected = expected


class UnknownIdentifierError(ExpressionError):
    code = "UNKNOWN_IDENTIFIER"

    def __init__(self, name: str, offset: int):
        super().__init__(f"Unknown identifier '{name}' at offset {offset}", {"name": name, "offset": offset})
        self.name = name
        self.offset = offset


class ArityError(ExpressionError):
    code = "ARITY_MISMATCH"

    def __init__(self, name: str, expected: int, got: int, offset: int):
        super().__init__(f"Function '{name}' takes {expected} argument(s), got {got}",
                         {"name": name, "expected": expected, "got": got, "offset": offset})
        self.offset = offset
