#!/usr/bin/env python3
"""
Navigation Models
Navigation data (F, V, epsilon) and the Randers data (h, W) of the closed-form correspondence
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, List, Optional

import numpy as np

NAVIGATION_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "required": ["W_expr"],
    "properties": {
        "h_spec": {"type": ["string", "null"], "enum": ["round", None]},
        "W_expr": {
            "oneOf": [
                {"type": "string"},
                {"type": "array", "items": {"type": "string"}, "minItems": 2},
            ]
        },
        "epsilon": {"type": "number", "minimum": 0},
        "sphere": {"type": "integer", "minimum": 1},
    },
    "additionalProperties": False,
}


@dataclass(frozen=True)
class NavigationDatum:
    """A metric handle, a wind and its scale

    `base` is either a MinkowskiNorm (single fiber, `field` a fixed vector) or a sphere metric
    (`field` a VectorField on the sphere).
    """

    base: Any
    field: Any
    epsilon: float = 1.0
    label: str = ""

    @property
    def single_fiber(self) -> bool:
        return isinstance(self.field, np.ndarray)

    def wind(self, points: Optional[np.ndarray] = None) -> np.ndarray:
        """epsilon * V, at `points` when the field is not a fixed vector."""
        if self.single_fiber:
            return self.epsilon * self.field
        return self.epsilon * self.field.values(points)

    def to_dict(self) -> Dict[str, Any]:
        field = self.field.tolist() if self.single_fiber else self.field.to_dict()
        base = self.base.describe() if hasattr(self.base, "describe") else str(self.base)
        return {"base": base, "field": field, "epsilon": self.epsilon, "label": self.label}


@dataclass(frozen=True)
class RandersData:
    """Riemannian h and wind W at one point; F = alpha + beta is their navigation image"""

    h: np.ndarray
    W: np.ndarray

    @cached_property
    def hW(self) -> np.ndarray:
        return self.h @ self.W

    @property
    def lam(self) -> float:
        """lambda = <W, W>_h."""
        return float(self.W @ self.hW)

    @property
    def alpha_matrix(self) -> np.ndarray:
        """a with alpha(y)^2 = y^T a y = ((1 - lambda)|y|_h^2 + <y, W>_h^2) / (1 - lambda)^2."""
        shrink = 1.0 - self.lam
        return ((shrink * self.h) + np.outer(self.hW, self.hW)) / shrink ** 2

    @property
    def beta_covector(self) -> np.ndarray:
        """b with beta(y) = b . y = -<y, W>_h / (1 - lambda)."""
        return -self.hW / (1.0 - self.lam)

    @property
    def beta_alpha_norm(self) -> float:
        """|beta|_alpha, always below 1 when lambda < 1."""
        b = self.beta_covector
        return float(np.sqrt(b @ np.linalg.solve(self.alpha_matrix, b)))

    def alpha(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        return np.sqrt(np.einsum("mi,ij,mj->m", points, self.alpha_matrix, points))

    def beta(self, points: np.ndarray) -> np.ndarray:
        return np.atleast_2d(points) @ self.beta_covector

    def values(self, points: np.ndarray) -> np.ndarray:
        return self.alpha(points) + self.beta(points)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "h": self.h.tolist(),
            "W": self.W.tolist(),
            "lambda": self.lam,
            "alpha_matrix": self.alpha_matrix.tolist(),
            "beta_covector": self.beta_covector.tolist(),
        }


@dataclass
class NavigationCheck:
    """Sampled comparison of two evaluations of the same navigated metric"""

    name: str
    samples: int
    max_relative_error: float
    tolerance: float
    worst_point: Optional[List[float]] = None

    @property
    def passed(self) -> bool:
        return self.max_relative_error <= self.tolerance

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "samples": self.samples,
            "max_relative_error": self.max_relative_error,
            "tol": self.tolerance,
            "passed": self.passed,
            "worst_point": self.worst_point,
        }
