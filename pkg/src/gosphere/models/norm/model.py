#!/usr/bin/env python3
"""
Minkowski Norm Models
Metric family specs, norms restricted to a tangent space, fundamental tensors
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional

import numpy as np


class FamilyTag(str, Enum):
    RIEMANNIAN = "riemannian"
    RANDERS = "randers"
    ALPHA_BETA = "alpha_beta"
    ALPHA12 = "alpha12"
    ALPHA12_BETA = "alpha12_beta"
    CUSTOM = "custom"

    @classmethod
    def values(cls) -> List[str]:
        return [member.value for member in cls]


# families whose defining function is given as an expression
EXPRESSION_FAMILIES = (FamilyTag.ALPHA_BETA, FamilyTag.ALPHA12, FamilyTag.ALPHA12_BETA, FamilyTag.CUSTOM)

METRIC_SPEC_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "required": ["family", "dim"],
    "properties": {
        "family": {"type": "string", "enum": FamilyTag.values()},
        "dim": {"type": "integer", "minimum": 1},
        "blocks": {"type": ["array", "null"], "items": {"type": "integer", "minimum": 1}},
        "f_expr": {"type": ["string", "null"]},
        "alpha_matrix": {
            "type": ["array", "null"],
            "items": {"type": "array", "items": {"type": "number"}},
        },
        "beta_covector": {"type": ["array", "null"], "items": {"type": "number"}},
    },
    "additionalProperties": False,
}


@dataclass
class MetricFamilySpec:
    """Serializable description of a norm from one of the supported families"""

    family: str
    dim: int
    blocks: Optional[List[int]] = None
    f_expr: Optional[str] = None
    alpha_matrix: Optional[List[List[float]]] = None
    beta_covector: Optional[List[float]] = None

    def validate(self) -> List[str]:
        """Structural checks; convexity is checked when the norm is built"""
        errors = []
        if self.family not in FamilyTag.values():
            errors.append(f"family must be one of: {', '.join(FamilyTag.values())}")
            return errors
        if not isinstance(self.dim, int) or self.dim < 1:
            errors.append("dim must be a positive integer")
            return errors

        tag = FamilyTag(self.family)
        if tag in EXPRESSION_FAMILIES and not self.f_expr:
            errors.append(f"f_expr is required for family {tag.value}")

        if tag == FamilyTag.ALPHA12:
            if not self.blocks or len(self.blocks) != 2:
                errors.append("alpha12 needs two blocks [d1, d2]")
        if tag == FamilyTag.ALPHA12_BETA:
            if not self.blocks or len(self.blocks) != 3:
                errors.append("alpha12_beta needs three blocks [1, d1, d2]")
            elif self.blocks[0] != 1:
                errors.append("the beta block of alpha12_beta must be one dimensional")
        if self.blocks and sum(self.blocks) != self.dim:
            errors.append(f"block dimensions {self.blocks} must sum to dim {self.dim}")

        if self.alpha_matrix is not None:
            matrix = np.asarray(self.alpha_matrix, dtype=float)
            if matrix.shape != (self.dim, self.dim):
                errors.append(f"alpha_matrix must be {self.dim}x{self.dim}")
            elif not np.allclose(matrix, matrix.T, atol=1e-12):
                errors.append("alpha_matrix must be symmetric")
        if self.beta_covector is not None and len(self.beta_covector) != self.dim:
            errors.append(f"beta_covector must have {self.dim} entries")
        if tag in (FamilyTag.RANDERS, FamilyTag.ALPHA_BETA) and self.beta_covector is None:
            errors.append(f"beta_covector is required for family {tag.value}")
        return errors

    def alpha(self) -> np.ndarray:
        if self.alpha_matrix is None:
            return np.eye(self.dim)
        return np.asarray(self.alpha_matrix, dtype=float)

    def beta(self) -> np.ndarray:
        if self.beta_covector is None:
            beta = np.zeros(self.dim)
            if self.family == FamilyTag.ALPHA12_BETA.value:
                beta[0] = 1.0
            return beta
        return np.asarray(self.beta_covector, dtype=float)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "family": self.family,
            "dim": self.dim,
            "blocks": self.blocks,
            "f_expr": self.f_expr,
            "alpha_matrix": self.alpha_matrix,
            "beta_covector": self.beta_covector,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MetricFamilySpec":
        return cls(
            family=data["family"],
            dim=data["dim"],
            blocks=data.get("blocks"),
            f_expr=data.get("f_expr"),
            alpha_matrix=data.get("alpha_matrix"),
            beta_covector=data.get("beta_covector"),
        )


@dataclass(frozen=True)
class FundamentalTensor:
    """g_y = 1/2 Hess(F^2) at the flagpole y"""

    base: np.ndarray
    matrix: np.ndarray

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        return float(u @ self.matrix @ v)

    def to_dict(self) -> Dict[str, Any]:
        return {"base": self.base.tolist(), "matrix": self.matrix.tolist()}


@dataclass(frozen=True)
class MinkowskiNorm:
    """A norm F on R^dim given by a batch evaluator (m, dim) -> (m,)"""

    dim: int
    value: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    family_tag: FamilyTag = FamilyTag.CUSTOM
    reversible_hint: Optional[bool] = None
    spec: Optional[MetricFamilySpec] = field(default=None, compare=False)
    label: str = ""

    def values(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return np.asarray(self.value(points), dtype=float)

    def describe(self) -> Dict[str, Any]:
        return {
            "family": self.family_tag.value,
            "dim": self.dim,
            "label": self.label,
            "reversible_hint": self.reversible_hint,
            "spec": self.spec.to_dict() if self.spec else None,
        }
