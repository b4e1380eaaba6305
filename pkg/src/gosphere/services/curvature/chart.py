#!/usr/bin/env python3
"""
Sphere Metrics and Charts
Finsler metrics on S^n in ambient coordinates, and their pullbacks to the stereographic atlas
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np

from gosphere.config.settings import CONFIG
from gosphere.models.geometry.model import Chart
from gosphere.services.expression.nodes import evaluate
from gosphere.services.expression.parser import coordinate_variables, parse_expr, print_expr
from gosphere.services.navigation.fields import VectorField
from gosphere.services.navigation.service import NavigationService, sphere_points, tangent_samples
from gosphere.utils.errors import NavigationDomainError, ValidationError
from gosphere.utils.logger import get_logger
from gosphere.utils.sampling import make_rng

logger = get_logger(__name__)

AmbientFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SphereMetric:
    """F(p, v) for p on S^n and v tangent at p, both in R^(n+1)"""

    n: int
    kind: str  # round | randers | navigated
    evaluator: AmbientFn = field(repr=False, compare=False)
    vector_field: Optional[VectorField] = None
    epsilon: float = 0.0
    base: Optional["SphereMetric"] = None
    label: str = ""

    def values(self, points, vectors) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
        return self.evaluator(points, vectors)

    @property
    def wind(self) -> Optional[VectorField]:
        """epsilon * V for navigation images, None for the round metric."""
        if self.vector_field is None:
            return None
        return self.vector_field.scaled(self.epsilon)

    def describe(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "kind": self.kind,
            "label": self.label,
            "epsilon": self.epsilon,
            "field": self.vector_field.to_dict() if self.vector_field else None,
            "base": self.base.describe() if self.base else None,
        }


def round_metric(n: int) -> SphereMetric:
    if n < 1:
        raise ValidationError("sphere dimension must be >= 1")
    return SphereMetric(n=n, kind="round", evaluator=lambda points, vectors: np.linalg.norm(vectors, axis=1),
                        label=f"round S^{n}")


def randers_metric(n: int, wind_field: VectorField, epsilon: float = 1.0) -> SphereMetric:
    """Closed-form navigation image of the round metric by eps * V."""
    if wind_field.n != n:
        raise ValidationError(f"Field lives on S^{wind_field.n}, metric on S^{n}")

    def evaluator(points: np.ndarray, vectors: np.ndarray) -> np.ndarray:
        wind = epsilon * wind_field.values(points)
        lam = np.einsum("mi,mi->m", wind, wind)
        if np.any(lam >= 1.0):
            raise NavigationDomainError("lambda = |W|^2 must be < 1", {"lambda": float(np.max(lam))})
        shrink = 1.0 - lam
        pairing = np.einsum("mi,mi->m", vectors, wind)
        squares = np.einsum("mi,mi->m", vectors, vectors)
        alpha = np.sqrt(np.maximum(shrink * squares + pairing ** 2, 0.0)) / shrink
        return alpha - pairing / shrink

    return SphereMetric(n=n, kind="randers", evaluator=evaluator, vector_field=wind_field, epsilon=epsilon,
                        base=round_metric(n), label=f"randers(round, {epsilon:g}*{wind_field.label})")


def navigated_metric(base: SphereMetric, wind_field: VectorField, epsilon: float,
                     navigation: Optional[NavigationService] = None) -> SphereMetric:
    """Navigation image of `base` by eps * V; navigation images of the round metric stay in closed form."""
    if base.kind == "round":
        return randers_metric(base.n, wind_field, epsilon)
    if base.kind == "randers":
        return randers_metric(base.n, base.wind + wind_field.scaled(epsilon), 1.0)
    navigation = navigation or NavigationService()

    def evaluator(points: np.ndarray, vectors: np.ndarray) -> np.ndarray:
        return navigation.solve(lambda w: base.values(points, w), vectors, epsilon * wind_field.values(points))

    return SphereMetric(n=base.n, kind="navigated", evaluator=evaluator, vector_field=wind_field, epsilon=epsilon,
                        base=base, label=f"navigate({base.label}, {epsilon:g}*{wind_field.label})")


# ---------------------------------------------------------------------- stereographic atlas

def to_ambient(charts: np.ndarray, x: np.ndarray) -> np.ndarray:
    """North: p = (2x, 1 - r^2)/(1 + r^2); south: p = (2x, r^2 - 1)/(1 + r^2)."""
    x = np.atleast_2d(x)
    r2 = np.einsum("mi,mi->m", x, x)
    sign = np.where(np.asarray(charts) == Chart.SOUTH, -1.0, 1.0)
    last = sign * (1.0 - r2) / (1.0 + r2)
    return np.concatenate([2.0 * x / (1.0 + r2)[:, None], last[:, None]], axis=1)


def ambient_jacobian(charts: np.ndarray, x: np.ndarray) -> np.ndarray:
    """d p / d x, shape (m, n + 1, n)."""
    x = np.atleast_2d(x)
    m, n = x.shape
    r2 = np.einsum("mi,mi->m", x, x)
    denom = 1.0 + r2
    sign = np.where(np.asarray(charts) == Chart.SOUTH, -1.0, 1.0)
    jacobian = np.empty((m, n + 1, n))
    jacobian[:, :n, :] = (2.0 / denom)[:, None, None] * np.eye(n) \
        - (4.0 / denom ** 2)[:, None, None] * np.einsum("mi,mj->mij", x, x)
    jacobian[:, n, :] = -(sign * 4.0 / denom ** 2)[:, None] * x
    return jacobian


def to_chart(points: np.ndarray, charts: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Chart coordinates; by default the chart in which |x| <= 1."""
    points = np.atleast_2d(points)
    if charts is None:
        charts = np.where(points[:, -1] >= 0.0, Chart.NORTH, Chart.SOUTH)
    charts = np.asarray(charts)
    sign = np.where(charts == Chart.SOUTH, -1.0, 1.0)
    return charts, points[:, :-1] / (1.0 + sign * points[:, -1])[:, None]


def chart_differential(charts: np.ndarray, points: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """dx for a tangent vector v at p."""
    points = np.atleast_2d(points)
    vectors = np.atleast_2d(vectors)
    sign = np.where(np.asarray(charts) == Chart.SOUTH, -1.0, 1.0)
    denom = 1.0 + sign * points[:, -1]
    return vectors[:, :-1] / denom[:, None] - (sign * vectors[:, -1] / denom ** 2)[:, None] * points[:, :-1]


def transition(x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Same point and vector in the other stereographic chart: x' = x/|x|^2."""
    x = np.atleast_2d(x)
    y = np.atleast_2d(y)
    r2 = np.einsum("mi,mi->m", x, x)[:, None]
    xy = np.einsum("mi,mi->m", x, y)[:, None]
    return x / r2, y / r2 - 2.0 * xy * x / r2 ** 2


@dataclass(frozen=True)
class ChartMetric:
    """F(x, y) in chart coordinates: the stereographic atlas of a sphere metric, or one flat chart"""

    n: int
    sphere: Optional[SphereMetric] = None
    chart_fn: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = field(default=None, repr=False,
                                                                                  compare=False)
    label: str = ""

    @classmethod
    def on_sphere(cls, sphere: SphereMetric) -> "ChartMetric":
        return cls(n=sphere.n, sphere=sphere, label=sphere.label)

    @classmethod
    def flat(cls, n: int) -> "ChartMetric":
        return cls(n=n, chart_fn=lambda x, y: np.linalg.norm(y, axis=1), label=f"euclidean R^{n}")

    @classmethod
    def expression(cls, n: int, text: str) -> "ChartMetric":
        """F given as an expression in x1..xn, y1..yn on a single chart."""
        xs = coordinate_variables("x", n)
        ys = coordinate_variables("y", n)
        tree = parse_expr(text, xs + ys)

        def chart_fn(x: np.ndarray, y: np.ndarray) -> np.ndarray:
            env = {name: x[:, k] for k, name in enumerate(xs)}
            env.update({name: y[:, k] for k, name in enumerate(ys)})
            return np.broadcast_to(np.asarray(evaluate(tree, env), dtype=float), (len(x),)).copy()

        return cls(n=n, chart_fn=chart_fn, label=print_expr(tree))

    @property
    def atlas(self) -> bool:
        return self.sphere is not None

    def values(self, charts, x, y) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        y = np.atleast_2d(np.asarray(y, dtype=float))
        if not self.atlas:
            return self.chart_fn(x, y)
        charts = np.broadcast_to(np.asarray(charts), (len(x),))
        points = to_ambient(charts, x)
        vectors = np.einsum("mij,mj->mi", ambient_jacobian(charts, x), y)
        return self.sphere.values(points, vectors)

    def positions(self, charts, x) -> np.ndarray:
        """Ambient points for atlas metrics, chart coordinates otherwise."""
        x = np.atleast_2d(x)
        if not self.atlas:
            return x
        return to_ambient(np.broadcast_to(np.asarray(charts), (len(x),)), x)

    def check_transition(self, sample_count: int = 32, seed: Optional[int] = None) -> float:
        """max relative disagreement of F between the two charts."""
        if not self.atlas:
            return 0.0
        seed = CONFIG["SEED"] if seed is None else seed
        points = sphere_points(self.n, sample_count, seed)
        # keep away from both poles, where one of the charts is singular
        points = points[np.abs(points[:, -1]) < 0.9]
        vectors = tangent_samples(points, make_rng(seed))
        north = np.full(len(points), Chart.NORTH)
        south = np.full(len(points), Chart.SOUTH)
        _, x_north = to_chart(points, north)
        y_north = chart_differential(north, points, vectors)
        x_south, y_south = transition(x_north, y_north)
        first = self.values(north, x_north, y_north)
        second = self.values(south, x_south, y_south)
        return float(np.max(np.abs(first - second) / first))
