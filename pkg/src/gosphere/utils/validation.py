#!/usr/bin/env python3
"""
Input Validation
Chainable validator for command arguments plus schema checks for JSON documents
"""

from typing import Any, Dict, List, Optional, Sequence

import jsonschema
import numpy as np

from gosphere.utils.errors import DimensionMismatchError, InvalidInputError, ValidationError


class InputValidator:
    """Input validation utility class"""

    def __init__(self):
        self.errors: List[str] = []

    def require(self, field_name: str, value: Any, custom_message: Optional[str] = None) -> "InputValidator":
        """Validate that a field is present and not empty"""
        if value is None or (isinstance(value, str) and not value.strip()):
            self.errors.append(custom_message or f"{field_name} is required")
        return self

    def validate_enum(self, field_name: str, value: Optional[str], allowed_values: Sequence[str],
                      required: bool = False) -> "InputValidator":
        """Validate enum field"""
        if value is None:
            if required:
                self.errors.append(f"{field_name} is required")
            return self
        if value not in allowed_values:
            self.errors.append(f"{field_name} must be one of: {', '.join(allowed_values)}")
        return self

    def validate_positive_int(self, field_name: str, value: Optional[int], minimum: int = 1) -> "InputValidator":
        if value is None:
            return self
        if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < minimum:
            self.errors.append(f"{field_name} must be an integer >= {minimum}")
        return self

    def validate_range(self, field_name: str, value: Optional[float], low: Optional[float] = None,
                       high: Optional[float] = None, inclusive_high: bool = True) -> "InputValidator":
        """Validate a numeric value lies in [low, high] (or [low, high) when inclusive_high is False)"""
        if value is None:
            return self
        if not np.isfinite(value):
            self.errors.append(f"{field_name} must be finite")
            return self
        if low is not None and value < low:
            self.errors.append(f"{field_name} must be >= {low}")
        if high is not None and (value > high or (not inclusive_high and value >= high)):
            bound = "<=" if inclusive_high else "<"
            self.errors.append(f"{field_name} must be {bound} {high}")
        return self

    def get_errors(self) -> List[str]:
        """Get all validation errors"""
        return self.errors

    def is_valid(self) -> bool:
        """Check if validation passed"""
        return len(self.errors) == 0

    def raise_if_invalid(self) -> None:
        if self.errors:
            raise ValidationError("; ".join(self.errors), {"errors": list(self.errors)})


def validate_document(document: Any, schema: Dict[str, Any], name: str) -> Dict[str, Any]:
    """Validate a JSON document against a schema; returns the document."""
    try:
        jsonschema.validate(instance=document, schema=schema)
    except jsonschema.ValidationError as e:
        path = "/".join(str(part) for part in e.absolute_path) or "<root>"
        raise ValidationError(f"Invalid {name}: {e.message} (at {path})", {"path": path}) from e
    return document


def as_vector(value: Any, name: str, dim: Optional[int] = None) -> np.ndarray:
    """Convert to a finite 1-D float array, optionally checking the dimension."""
    vector = np.asarray(value, dtype=float)
    if vector.ndim != 1:
        raise InvalidInputError(f"{name} must be a vector", {"shape": list(vector.shape)})
    if dim is not None and vector.shape[0] != dim:
        raise DimensionMismatchError(f"{name} has dimension {vector.shape[0]}, expected {dim}",
                                     {"expected": dim, "got": int(vector.shape[0])})
    if not np.all(np.isfinite(vector)):
        raise InvalidInputError(f"{name} has non-finite components", {"value": vector})
    return vector


def parse_vector_text(text: str, name: str) -> np.ndarray:
    """Parse a comma separated vector given on the command line."""
    try:
        return as_vector([float(part) for part in text.split(",")], name)
    except ValueError as e:
        raise ValidationError(f"{name} must be a comma separated list of numbers") from e
