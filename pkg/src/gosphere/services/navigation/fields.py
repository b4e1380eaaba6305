#!/usr/bin/env python3
"""
Vector Fields on Spheres
Ambient fields on S^n in R^(n+1): linear fields p -> Omega p and expression fields in x1..x(n+1),
projected to the tangent space, with their flows and flow differentials
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy.linalg import expm

from gosphere.config.settings import CONFIG
from gosphere.services.expression.nodes import evaluate
from gosphere.services.expression.parser import coordinate_variables, parse_expr, print_expr
from gosphere.utils.errors import ValidationError
from gosphere.utils.logger import get_logger

logger = get_logger(__name__)


def tangent_projection(points: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """v - <v, p> p for unit p."""
    return vectors - np.einsum("mi,mi->m", vectors, points)[:, None] * points


@dataclass(frozen=True)
class VectorField:
    """A vector field on S^n given in ambient coordinates"""

    n: int
    kind: str  # linear | expression | sum
    omega: Optional[np.ndarray] = field(default=None, compare=False)
    expressions: Optional[List[str]] = None
    evaluator: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False, compare=False)
    label: str = ""

    # ------------------------------------------------------------------ constructors

    @classmethod
    def linear(cls, omega, label: str = "") -> "VectorField":
        omega = np.asarray(omega, dtype=float)
        if omega.ndim != 2 or omega.shape[0] != omega.shape[1] or omega.shape[0] < 2:
            raise ValidationError("omega must be a square matrix of size n + 1 >= 2")
        return cls(n=omega.shape[0] - 1, kind="linear", omega=omega, label=label or "linear")

    @classmethod
    def rotation(cls, n: int, i: int = 0, j: int = 1, scale: float = 1.0) -> "VectorField":
        """Rotation in the (x_i, x_j) plane; its length on S^n is at most |scale|."""
        if not (0 <= i < n + 1 and 0 <= j < n + 1 and i != j):
            raise ValidationError(f"rotation plane ({i}, {j}) is not valid on S^{n}")
        omega = np.zeros((n + 1, n + 1))
        omega[i, j] = -scale
        omega[j, i] = scale
        return cls.linear(omega, label=f"rotation({i},{j})*{scale:g}")

    @classmethod
    def hopf(cls, scale: float = 1.0) -> "VectorField":
        """Hopf field p -> scale * J p on S^3, of constant length |scale|."""
        omega = scale * np.array([[0.0, -1.0, 0.0, 0.0],
                                  [1.0, 0.0, 0.0, 0.0],
                                  [0.0, 0.0, 0.0, -1.0],
                                  [0.0, 0.0, 1.0, 0.0]])
        return cls.linear(omega, label=f"hopf*{scale:g}")

    @classmethod
    def from_expressions(cls, n: int, expressions: Sequence[str], label: str = "") -> "VectorField":
        """Components in the ambient coordinates x1..x(n+1)."""
        if len(expressions) != n + 1:
            raise ValidationError(f"A field on S^{n} needs {n + 1} components, got {len(expressions)}")
        names = coordinate_variables("x", n + 1)
        trees = [parse_expr(text, names) for text in expressions]

        def evaluator(points: np.ndarray) -> np.ndarray:
            env = {name: points[:, k] for k, name in enumerate(names)}
            columns = [np.broadcast_to(np.asarray(evaluate(tree, env), dtype=float), (points.shape[0],))
                       for tree in trees]
            return np.stack(columns, axis=1)

        return cls(n=n, kind="expression", expressions=[print_expr(tree) for tree in trees], evaluator=evaluator,
                   label=label or "expression")

    @classmethod
    def named(cls, name: str, n: int, scale: float = 1.0) -> "VectorField":
        if name == "hopf":
            if n != 3:
                raise ValidationError("The Hopf field lives on S^3")
            return cls.hopf(scale)
        if name == "rotation":
            return cls.rotation(n, 0, 1, scale)
        raise ValidationError("field must be 'hopf', 'rotation' or a ';' separated expression list")

    # ------------------------------------------------------------------ algebra

    def scaled(self, factor: float) -> "VectorField":
        if self.kind == "linear":
            return VectorField.linear(factor * self.omega, label=f"{factor:g}*{self.label}")
        inner = self.evaluator
        return VectorField(n=self.n, kind="sum", evaluator=lambda points: factor * inner(points),
                           label=f"{factor:g}*{self.label}")

    def __add__(self, other: "VectorField") -> "VectorField":
        if self.n != other.n:
            raise ValidationError("Fields live on spheres of different dimension")
        if self.kind == "linear" and other.kind == "linear":
            return VectorField.linear(self.omega + other.omega, label=f"{self.label}+{other.label}")
        first, second = self.raw, other.raw
        return VectorField(n=self.n, kind="sum", evaluator=lambda points: first(points) + second(points),
                           label=f"{self.label}+{other.label}")

    # ------------------------------------------------------------------ evaluation

    def raw(self, points: np.ndarray) -> np.ndarray:
        if self.kind == "linear":
            return points @ self.omega.T
        return self.evaluator(points)

    def values(self, points) -> np.ndarray:
        """Tangent vectors V(p) at every row p of points (unit vectors in R^(n+1))."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self.n + 1:
            raise ValidationError(f"Points on S^{self.n} have {self.n + 1} ambient coordinates")
        return tangent_projection(points, self.raw(points))

    @property
    def is_rotation(self) -> bool:
        """Linear with antisymmetric omega, so the flow is a rotation of R^(n+1)."""
        return self.kind == "linear" and bool(np.allclose(self.omega, -self.omega.T, atol=1e-14))

    def flow(self, points, times) -> np.ndarray:
        """rho_t(p) for every row p with its own time t (times broadcast against rows)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        times = np.broadcast_to(np.asarray(times, dtype=float), (points.shape[0],))
        if self.is_rotation:
            return np.stack([expm(t * self.omega) @ p for p, t in zip(points, times)])
        return self._rk4_flow(points, times)

    def _rk4_flow(self, points: np.ndarray, times: np.ndarray) -> np.ndarray:
        step = CONFIG["FLOW_STEP"]
        counts = np.maximum(np.ceil(np.abs(times) / step).astype(int), 1)
        h = (times / counts)[:, None]
        state = points.copy()
        for k in range(int(counts.max())):
            active = (k < counts)[:, None]
            k1 = self.values(state)
            k2 = self.values(state + 0.5 * h * k1)
            k3 = self.values(state + 0.5 * h * k2)
            k4 = self.values(state + h * k3)
            advanced = state + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
            advanced /= np.linalg.norm(advanced, axis=1, keepdims=True)
            state = np.where(active, advanced, state)
        return state

    def flow_differential(self, points, vectors, times, delta: float = 1e-5) -> np.ndarray:
        """d rho_t(p) v by central differences along great circles through p."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
        if self.is_rotation:
            times = np.broadcast_to(np.asarray(times, dtype=float), (points.shape[0],))
            return np.stack([expm(t * self.omega) @ v for v, t in zip(vectors, times)])
        ahead = points + delta * vectors
        behind = points - delta * vectors
        ahead /= np.linalg.norm(ahead, axis=1, keepdims=True)
        behind /= np.linalg.norm(behind, axis=1, keepdims=True)
        return (self.flow(ahead, times) - self.flow(behind, times)) / (2.0 * delta)

    def max_length(self, points: np.ndarray) -> float:
        return float(np.max(np.linalg.norm(self.values(points), axis=1)))

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"n": self.n, "kind": self.kind, "label": self.label}
        if self.omega is not None:
            data["omega"] = self.omega.tolist()
        if self.expressions is not None:
            data["expressions"] = list(self.expressions)
        return data
