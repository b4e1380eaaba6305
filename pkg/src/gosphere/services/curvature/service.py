#!/usr/bin/env python3
"""
Curvature Service
Geometry of Finsler metrics on S^n through the stereographic atlas: spray coefficients, geodesics,
flag curvature, prime closed geodesics of Killing fields, the eps-tuning of navigation images,
directed distances, the antipodal map and a few consistency diagnostics built on them
"""

import csv
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq, least_squares, minimize_scalar

from gosphere.config.settings import CONFIG
from gosphere.models.geometry.model import (
    AntipodalRecord,
    Chart,
    ClosedGeodesicRecord,
    CriticalPointCheck,
    Curve,
    CurvatureNet,
    EpsilonTuning,
    FlagInput,
    ReversibilityRecord,
)
from gosphere.models.norm.model import FamilyTag, MinkowskiNorm
from gosphere.services.curvature.chart import (
    ChartMetric,
    SphereMetric,
    chart_differential,
    navigated_metric,
    to_ambient,
    to_chart,
    transition,
)
from gosphere.services.navigation.fields import VectorField
from gosphere.services.navigation.service import NavigationService, sphere_points
from gosphere.services.norms.service import NormService
from gosphere.utils.errors import (
    InvalidFlagError,
    InvalidInputError,
    NotClosedError,
    NotConstantCurvatureError,
    NumericalError,
    PreconditionError,
    SearchFailureError,
    SwitchChartSignal,
    ValidationError,
)
from gosphere.utils.logger import get_logger
from gosphere.utils.numdiff import gradient_batch, hessian_batch, time_derivatives
from gosphere.utils.sampling import make_rng, orthonormal_complement, sample_net, unit_directions
from gosphere.utils.validation import as_vector

logger = get_logger(__name__)

TRANSITION_TOL = 1e-8
FLAG_CHUNK = 16


def _other(charts: np.ndarray) -> np.ndarray:
    return np.where(charts == Chart.NORTH, Chart.SOUTH, Chart.NORTH)


def _unit_point(value, n: int, name: str) -> np.ndarray:
    point = as_vector(value, name, n + 1)
    length = np.linalg.norm(point)
    if abs(length - 1.0) > 1e-8:
        raise InvalidInputError(f"{name} must lie on the unit sphere", {"norm": length})
    return point / length


@dataclass
class GeodesicSegment:
    chart: int
    t_start: float
    t_end: float
    solution: Any = field(repr=False)


@dataclass
class GeodesicPath:
    """Integrated geodesic: dense solutions chart by chart"""

    n: int
    atlas: bool
    segments: List[GeodesicSegment]
    label: str = ""
    speed_drift: float = 0.0

    @property
    def t_end(self) -> float:
        return self.segments[-1].t_end

    @property
    def switches(self) -> int:
        return len(self.segments) - 1

    def state(self, times) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        times = np.atleast_1d(np.asarray(times, dtype=float))
        ends = np.array([segment.t_end for segment in self.segments])
        owner = np.minimum(np.searchsorted(ends, times, side="left"), len(self.segments) - 1)
        charts = np.empty(len(times), dtype=int)
        states = np.empty((len(times), 2 * self.n))
        for index, segment in enumerate(self.segments):
            rows = owner == index
            if np.any(rows):
                charts[rows] = segment.chart
                states[rows] = segment.solution(times[rows]).T
        return charts, states[:, :self.n], states[:, self.n:]

    def points(self, times) -> np.ndarray:
        charts, x, _ = self.state(times)
        return to_ambient(charts, x) if self.atlas else x

    def curve(self) -> Curve:
        return Curve(0.0, self.t_end, self.points, label=self.label)


class CurvatureService:
    """Chart-based Finsler geometry on spheres"""

    def __init__(self, navigation_service: Optional[NavigationService] = None,
                 norm_service: Optional[NormService] = None):
        self.navigation = navigation_service or NavigationService()
        self.norms = norm_service or NormService()
        self.radius = CONFIG["CHART_SWITCH_RADIUS"]
        self.spray_step = CONFIG["SPRAY_STEP"]
        self.curvature_step = CONFIG["CURVATURE_STEP"]
        self.levels = CONFIG["RICHARDSON_LEVELS"]

    # ------------------------------------------------------------------ metrics

    def chart_metric(self, sphere: SphereMetric, sample_count: int = 8, seed: Optional[int] = None) -> ChartMetric:
        """Atlas of a sphere metric, with the transition and the fiber axioms checked on samples."""
        metric = ChartMetric.on_sphere(sphere)
        disagreement = metric.check_transition(seed=seed)
        if not disagreement < TRANSITION_TOL:
            raise ValidationError(f"Charts disagree on F (relative {disagreement:.3e})",
                                  {"disagreement": disagreement})
        seed = CONFIG["SEED"] if seed is None else seed
        directions = sample_net(sphere.n, 16, seed)
        for point in sample_net(sphere.n + 1, sample_count, seed, structured=False):
            fiber = self.fiber_norm(sphere, point)
            defect = self.norms.check_homogeneity(fiber, directions)
            if not defect < CONFIG["HOMOGENEITY_TOL"]:
                raise ValidationError(f"F is not positively homogeneous at {point.tolist()}", {"defect": defect})
            self.norms.check_strong_convexity(fiber, directions)
        logger.info("Built atlas for %s (transition defect %.2e)", sphere.label, disagreement)
        return metric

    def fiber_norm(self, sphere: SphereMetric, point) -> MinkowskiNorm:
        """F(p, .) on T_p S^n in an orthonormal tangent basis."""
        point = _unit_point(point, sphere.n, "p")
        basis = orthonormal_complement(point)
        return MinkowskiNorm(dim=sphere.n, family_tag=FamilyTag.CUSTOM, label=f"{sphere.label} at p",
                             value=lambda w: sphere.values(np.repeat(point[None, :], len(w), axis=0), w @ basis))

    def chart_field(self, wind_field: VectorField, epsilon: float, charts: np.ndarray, x: np.ndarray) -> np.ndarray:
        """eps V in chart coordinates."""
        points = to_ambient(charts, x)
        return chart_differential(charts, points, epsilon * wind_field.values(points))

    def _switch(self, metric: ChartMetric, charts: np.ndarray, x: np.ndarray, y: np.ndarray):
        if not metric.atlas:
            return charts, x, y
        far = np.linalg.norm(x, axis=1) > self.radius
        if np.any(far):
            charts, x, y = charts.copy(), x.copy(), y.copy()
            x[far], y[far] = transition(x[far], y[far])
            charts[far] = _other(charts[far])
        return charts, x, y

    # ------------------------------------------------------------------ spray

    def _spray(self, metric: ChartMetric, charts: np.ndarray, x: np.ndarray, y: np.ndarray,
               levels: Optional[int] = None) -> np.ndarray:
        m, n = x.shape
        charts = np.broadcast_to(np.asarray(charts), (m,))

        def square(z: np.ndarray) -> np.ndarray:
            rows = np.repeat(charts, len(z) // m)
            return metric.values(rows, z[:, :n], z[:, n:]) ** 2

        x_steps = self.spray_step * (1.0 + np.linalg.norm(x, axis=1))
        y_steps = self.spray_step * np.linalg.norm(y, axis=1)
        steps = np.concatenate([np.repeat(x_steps[:, None], n, axis=1), np.repeat(y_steps[:, None], n, axis=1)],
                               axis=1)
        grad, hess = hessian_batch(square, np.concatenate([x, y], axis=1), steps, levels or self.levels)
        rhs = np.einsum("mkl,mk->ml", hess[:, :n, n:], y) - grad[:, :n]
        tensor = 0.25 * (hess[:, n:, n:] + np.swapaxes(hess[:, n:, n:], 1, 2))
        return 0.25 * np.linalg.solve(tensor, rhs[..., None])[..., 0]

    def spray_coefficients(self, metric: ChartMetric, x, y, chart: int = Chart.NORTH) -> np.ndarray:
        """G^i = 1/4 g^il ([F^2]_{x^k y^l} y^k - [F^2]_{x^l})."""
        x = as_vector(x, "x", metric.n)
        y = as_vector(y, "y", metric.n)
        if not np.linalg.norm(y) > CONFIG["ZERO_VECTOR_TOL"]:
            raise InvalidInputError("The spray needs y != 0")
        if metric.atlas and np.linalg.norm(x) > self.radius:
            raise SwitchChartSignal("Point is outside the chart interior, switch charts",
                                    {"x": x, "chart": Chart.NAMES[chart]})
        return self._spray(metric, np.array([chart]), x[None, :], y[None, :])[0]

    def _fundamental(self, metric: ChartMetric, charts: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        m = len(x)

        def square(vectors: np.ndarray) -> np.ndarray:
            reps = len(vectors) // m
            return metric.values(np.repeat(charts, reps), np.repeat(x, reps, axis=0), vectors) ** 2

        _, hess = hessian_batch(square, y, self.spray_step * np.linalg.norm(y, axis=1), self.levels)
        return 0.25 * (hess + np.swapaxes(hess, 1, 2))

    # ------------------------------------------------------------------ flag curvature

    def make_flag(self, metric: ChartMetric, x, y, u, chart: int = Chart.NORTH) -> FlagInput:
        """Flag with the edge u projected g_y-orthogonally to y."""
        x = as_vector(x, "x", metric.n)
        y = as_vector(y, "y", metric.n)
        u = as_vector(u, "u", metric.n)
        if not np.linalg.norm(y) > CONFIG["ZERO_VECTOR_TOL"]:
            raise InvalidFlagError("Flagpole must be nonzero")
        charts = np.array([chart])
        tensor = self._fundamental(metric, charts, x[None, :], y[None, :])[0]
        edge = u - (y @ tensor @ u) / (y @ tensor @ y) * y
        if not np.linalg.norm(edge) > 1e-10 * np.linalg.norm(u):
            raise InvalidFlagError("Edge u is parallel to the flagpole y", {"y": y, "u": u})
        return FlagInput(x=x, y=y, u=edge, chart=chart)

    def flag_net(self, metric: ChartMetric, count: int, seed: Optional[int] = None) -> List[FlagInput]:
        """Random flags at random points, each in the chart where |x| <= 1."""
        seed = CONFIG["SEED"] if seed is None else seed
        rng = make_rng(seed)
        n = metric.n
        if metric.atlas:
            charts, xs = to_chart(sample_net(n + 1, count, seed, structured=False))
        else:
            charts, xs = np.full(count, Chart.FLAT), rng.uniform(-1.0, 1.0, (count, n))
        ys = unit_directions(n, count, rng)
        us = unit_directions(n, count, rng)
        flags = []
        for chart, x, y, u in zip(charts, xs, ys, us):
            if abs(y @ u) > 0.99:
                u = orthonormal_complement(y)[0]
            flags.append(self.make_flag(metric, x, y, u, int(chart)))
        return flags

    def _curvatures(self, metric: ChartMetric, charts: np.ndarray, x: np.ndarray, y: np.ndarray,
                    u: np.ndarray) -> np.ndarray:
        m, n = x.shape

        def spray(z: np.ndarray) -> np.ndarray:
            rows = np.repeat(charts, len(z) // m)
            return self._spray(metric, rows, z[:, :n], z[:, n:])

        x_steps = self.curvature_step * (1.0 + np.linalg.norm(x, axis=1))
        y_steps = self.curvature_step * np.linalg.norm(y, axis=1)
        steps = np.concatenate([np.repeat(x_steps[:, None], n, axis=1), np.repeat(y_steps[:, None], n, axis=1)],
                               axis=1)
        # grad[m, a, i] = dG^i/dz_a, hess[m, a, b, i] = d2G^i/dz_a dz_b
        grad, hess = hessian_batch(spray, np.concatenate([x, y], axis=1), steps, levels=2)
        spray_values = self._spray(metric, charts, x, y)
        dgx = grad[:, :n, :]
        dgy = grad[:, n:, :]
        riemann = (2.0 * np.swapaxes(dgx, 1, 2)
                   - np.einsum("mj,mjki->mik", y, hess[:, :n, n:, :])
                   + 2.0 * np.einsum("mj,mjki->mik", spray_values, hess[:, n:, n:, :])
                   - np.einsum("mji,mkj->mik", dgy, dgy))
        tensor = self._fundamental(metric, charts, x, y)
        ru = np.einsum("mik,mk->mi", riemann, u)
        numerator = np.einsum("mi,mij,mj->m", ru, tensor, u)
        gyy = np.einsum("mi,mij,mj->m", y, tensor, y)
        guu = np.einsum("mi,mij,mj->m", u, tensor, u)
        gyu = np.einsum("mi,mij,mj->m", y, tensor, u)
        denominator = gyy * guu - gyu ** 2
        degenerate = np.flatnonzero(~(denominator > 1e-12 * gyy * guu))
        if degenerate.size:
            raise InvalidFlagError("Flag plane is degenerate", {"row": int(degenerate[0])})
        return numerator / denominator

    def flag_curvatures(self, metric: ChartMetric, flags: Sequence[FlagInput]) -> np.ndarray:
        values = []
        for start in range(0, len(flags), FLAG_CHUNK):
            chunk = flags[start:start + FLAG_CHUNK]
            charts = np.array([flag.chart for flag in chunk])
            stack = [np.array([getattr(flag, name) for flag in chunk]) for name in ("x", "y", "u")]
            values.append(self._curvatures(metric, charts, *stack))
        return np.concatenate(values) if values else np.zeros(0)

    def flag_curvature(self, metric: ChartMetric, flag: FlagInput) -> float:
        """K(x, y, P) = <R_y u, u>_y / (F(y)^2 <u, u>_y - <y, u>_y^2)."""
        return float(self.flag_curvatures(metric, [flag])[0])

    def curvature_net(self, metric: ChartMetric, count: int, expected: float = 1.0, tolerance: float = 5e-4,
                      seed: Optional[int] = None) -> CurvatureNet:
        flags = self.flag_net(metric, count, seed)
        values = self.flag_curvatures(metric, flags)
        logger.info("Flag curvature of %s on %d flags: [%.6f, %.6f]", metric.label, count, values.min(), values.max())
        return CurvatureNet(name=f"K({metric.label})", values=values.tolist(), reference=[expected] * count,
                            tolerance=tolerance, flags=[flag.to_dict() for flag in flags])

    def navigate_flag(self, base: ChartMetric, navigated: ChartMetric, wind_field: VectorField, epsilon: float,
                      flag: FlagInput) -> FlagInput:
        """(x, y, span{y, u}) -> (x, y + F(y) eps V(x), span{y~, u})."""
        charts = np.array([flag.chart])
        x = flag.x[None, :]
        wind = self.chart_field(wind_field, epsilon, charts, x)[0]
        tilde = flag.y + base.values(charts, x, flag.y[None, :])[0] * wind
        return self.make_flag(navigated, flag.x, tilde, flag.u, flag.chart)

    def curvature_preservation(self, base: SphereMetric, wind_field: VectorField, epsilon: float = 1.0,
                               count: int = 50, seed: Optional[int] = None, tolerance: float = 1e-3) -> CurvatureNet:
        """K of F at (x, y, P) against K~ of the Killing navigation image at (x, y~, P~)."""
        self.navigation.check_killing(base, wind_field)
        base_chart = self.chart_metric(base)
        image = navigated_metric(base, wind_field, epsilon, self.navigation)
        image_chart = self.chart_metric(image)
        flags = self.flag_net(base_chart, count, seed)
        original = self.flag_curvatures(base_chart, flags)
        moved = [self.navigate_flag(base_chart, image_chart, wind_field, epsilon, flag) for flag in flags]
        navigated = self.flag_curvatures(image_chart, moved)
        return CurvatureNet(name="curvature_preservation", values=navigated.tolist(), reference=original.tolist(),
                            tolerance=tolerance, flags=[flag.to_dict() for flag in flags])

    # ------------------------------------------------------------------ geodesics

    def geodesic(self, metric: ChartMetric, x0, y0, duration: float, chart: int = Chart.NORTH) -> GeodesicPath:
        """Integrate x'' = -2 G(x, x') from a unit vector, switching charts at the chart radius."""
        n = metric.n
        x0 = as_vector(x0, "x0", n)
        y0 = as_vector(y0, "y0", n)
        chart = chart if metric.atlas else Chart.FLAT
        speed = float(metric.values(np.array([chart]), x0[None, :], y0[None, :])[0])
        if abs(speed - 1.0) > 1e-8:
            raise PreconditionError("Initial vector must have unit length F(x0, y0) = 1", {"speed": speed})
        charts, x, y = self._switch(metric, np.array([chart]), x0[None, :], y0[None, :])
        chart, state = int(charts[0]), np.concatenate([x[0], y[0]])

        def rhs(t: float, s: np.ndarray) -> np.ndarray:
            accel = -2.0 * self._spray(metric, np.array([chart]), s[None, :n], s[None, n:])[0]
            return np.concatenate([s[n:], accel])

        def leaving(t: float, s: np.ndarray) -> float:
            return float(np.linalg.norm(s[:n]) - self.radius)

        leaving.terminal = True
        leaving.direction = 1.0

        segments: List[GeodesicSegment] = []
        t = 0.0
        while True:
            solution = solve_ivp(rhs, (t, duration), state, method="DOP853", rtol=CONFIG["GEODESIC_RTOL"],
                                 atol=CONFIG["GEODESIC_ATOL"], dense_output=True,
                                 events=leaving if metric.atlas else None)
            if solution.status == -1:
                raise NumericalError(f"Geodesic integration failed: {solution.message}",
                                     {"t": solution.t[-1], "chart": Chart.NAMES[chart], "x": solution.y[:n, -1]})
            segments.append(GeodesicSegment(chart, float(solution.t[0]), float(solution.t[-1]), solution.sol))
            if solution.status != 1:
                break
            if len(segments) > 1000:
                raise NumericalError("Geodesic keeps switching charts", {"t": solution.t[-1]})
            t = float(solution.t[-1])
            new_x, new_y = transition(solution.y[:n, -1][None, :], solution.y[n:, -1][None, :])
            chart = int(_other(np.array([chart]))[0])
            state = np.concatenate([new_x[0], new_y[0]])

        path = GeodesicPath(n=n, atlas=metric.atlas, segments=segments, label=f"geodesic({metric.label})")
        times = np.linspace(0.0, duration, 33)
        charts, xs, ys = path.state(times)
        path.speed_drift = float(np.max(np.abs(metric.values(charts, xs, ys) - 1.0)))
        logger.info("Integrated geodesic of %s to t=%g (%d chart switches, speed drift %.2e)",
                    metric.label, duration, path.switches, path.speed_drift)
        return path

    def geodesic_residual(self, metric: ChartMetric, curve: Curve, count: int = 25,
                          h: float = 1e-3) -> Tuple[float, float]:
        """Largest |x'' + 2G(x, x')| / F(x')^2 and largest |F(x') - 1| along an ambient (or flat) curve."""
        times = np.linspace(curve.t_start + 2 * h, curve.t_end - 2 * h, count)
        if metric.atlas:
            charts, _ = to_chart(curve.points(times))

            def coordinates(t: np.ndarray) -> np.ndarray:
                return to_chart(curve.points(t), charts)[1]
        else:
            charts = np.full(count, Chart.FLAT)
            coordinates = curve.points

        velocity, accel = time_derivatives(coordinates, times, h=h)
        x = coordinates(times)
        speed = metric.values(charts, x, velocity)
        residual = np.linalg.norm(accel + 2.0 * self._spray(metric, charts, x, velocity), axis=1) / speed ** 2
        return float(np.max(residual)), float(np.max(np.abs(speed - 1.0)))

    def _rk4(self, metric: ChartMetric, charts: np.ndarray, x: np.ndarray, y: np.ndarray, h,
             levels: Optional[int]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        h = np.broadcast_to(np.asarray(h, dtype=float), (len(x),))[:, None]

        def accel(xx: np.ndarray, yy: np.ndarray) -> np.ndarray:
            return -2.0 * self._spray(metric, charts, xx, yy, levels)

        a1 = accel(x, y)
        y2 = y + 0.5 * h * a1
        a2 = accel(x + 0.5 * h * y, y2)
        y3 = y + 0.5 * h * a2
        a3 = accel(x + 0.5 * h * y2, y3)
        y4 = y + h * a3
        a4 = accel(x + h * y3, y4)
        new_x = x + h * (y + 2.0 * y2 + 2.0 * y3 + y4) / 6.0
        new_y = y + h * (a1 + 2.0 * a2 + 2.0 * a3 + a4) / 6.0
        return self._switch(metric, charts, new_x, new_y)

    def _shoot(self, metric: ChartMetric, charts: np.ndarray, x: np.ndarray, y: np.ndarray, h, count: int,
               levels: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """`count` fixed RK4 steps of size h (per row) for a batch of geodesics."""
        for _ in range(count):
            charts, x, y = self._rk4(metric, charts, x, y, h, levels)
        return charts, x, y

    def _unit_rays(self, metric: ChartMetric, point: np.ndarray, vectors: np.ndarray):
        """Chart states of the unit-speed geodesics from `point` with ambient initial directions `vectors`."""
        m = len(vectors)
        charts, x = to_chart(point[None, :])
        charts = np.repeat(charts, m)
        x = np.repeat(x, m, axis=0)
        y = chart_differential(charts, np.repeat(point[None, :], m, axis=0), vectors)
        y /= metric.values(charts, x, y)[:, None]
        return charts, x, y

    # ------------------------------------------------------------------ closed geodesics of Killing fields

    def _require_constant_length(self, metric: SphereMetric, wind_field: VectorField, sign: float) -> None:
        points = sphere_points(metric.n, CONFIG["NORM_SAMPLES"], CONFIG["SEED"])
        lengths = metric.values(points, sign * wind_field.values(points))
        spread = float(np.ptp(lengths) / np.max(lengths))
        if spread > CONFIG["KILLING_TOL"]:
            raise PreconditionError(f"Field {wind_field.label} does not have constant F-length (spread {spread:.3e})",
                                    {"spread": spread})

    def _orbit(self, wind_field: VectorField, sign: float, start: np.ndarray) -> Tuple[float, float]:
        """First return time of the flow of sign * V to `start`, and the return error."""
        step = 10.0 * CONFIG["FLOW_STEP"]
        states = [start[None, :], start[None, :]]
        gaps = [0.0, 0.0]
        left = False
        k = 0
        while (k + 1) * step <= CONFIG["RETURN_HORIZON"]:
            k += 1
            state = wind_field.flow(states[1], sign * step)
            gap = float(np.linalg.norm(state[0] - start))
            left = left or gap > 10.0 * step
            if left and k >= 3 and gaps[1] <= gaps[0] and gaps[1] < gap:
                anchor = states[0]
                refined = minimize_scalar(
                    lambda t: float(np.linalg.norm(wind_field.flow(anchor, sign * t)[0] - start)),
                    bounds=(0.0, 2.0 * step), method="bounded", options={"xatol": 1e-12})
                if refined.fun <= CONFIG["RETURN_TOL"]:
                    return (k - 2) * step + float(refined.x), float(refined.fun)
            states = [states[1], state]
            gaps = [gaps[1], gap]
        raise NotClosedError(f"Flow of {wind_field.label} does not return within t={CONFIG['RETURN_HORIZON']}",
                             {"start": start})

    def _orbit_samples(self, wind_field: VectorField, sign: float, start: np.ndarray, period: float,
                       count: int = 256) -> Tuple[np.ndarray, np.ndarray]:
        times = period * np.arange(count) / count
        points = wind_field.flow(np.repeat(start[None, :], count, axis=0), sign * times)
        return points, sign * wind_field.values(points)

    def closed_geodesic_length(self, metric: SphereMetric, wind_field: VectorField, direction: str = "-",
                               start=None) -> ClosedGeodesicRecord:
        """F-length of the prime closed integral curve of +V or -V through `start`."""
        if direction not in ("+", "-"):
            raise ValidationError("direction must be '+' or '-'")
        sign = 1.0 if direction == "+" else -1.0
        self.navigation.check_killing(metric, wind_field)
        self._require_constant_length(metric, wind_field, sign)
        start = np.eye(metric.n + 1)[0] if start is None else _unit_point(start, metric.n, "start")
        period, error = self._orbit(wind_field, sign, start)
        points, velocity = self._orbit_samples(wind_field, sign, start, period)
        # periodic trapezoid rule
        length = period * float(np.mean(metric.values(points, velocity)))
        logger.info("Prime closed geodesic of %sV for %s: period %.9f, length %.9f", direction, metric.label, period,
                    length)
        return ClosedGeodesicRecord(direction=direction, length=length, epsilon=metric.epsilon, period=period,
                                    return_error=error, start=start.tolist())

    def harmonic_length_check(self, metric: SphereMetric, wind_field: VectorField) -> Tuple[float, float, float]:
        """(lambda+, lambda-, 1/lambda+ + 1/lambda- - 1/pi)."""
        plus = self.closed_geodesic_length(metric, wind_field, "+").length
        minus = self.closed_geodesic_length(metric, wind_field, "-").length
        return plus, minus, 1.0 / plus + 1.0 / minus - 1.0 / math.pi

    def tune_epsilon(self, metric: SphereMetric, wind_field: VectorField, target: float = 2.0 * math.pi,
                     profile_points: int = 9) -> EpsilonTuning:
        """eps' with lambda(eps') = target, lambda(eps) the length of -V for the navigation image by eps V."""
        self.navigation.check_killing(metric, wind_field)
        self._require_constant_length(metric, wind_field, -1.0)
        start = np.eye(metric.n + 1)[0]
        period, _ = self._orbit(wind_field, -1.0, start)
        points, velocity = self._orbit_samples(wind_field, -1.0, start, period)

        def length(epsilon: float) -> float:
            image = navigated_metric(metric, wind_field, epsilon, self.navigation)
            return period * float(np.mean(image.values(points, velocity)))

        lambda_zero = length(0.0)
        if lambda_zero > target * (1.0 + 1e-12):
            raise PreconditionError(
                f"lambda-(0) = {lambda_zero:.9f} exceeds the target {target:.9f} "
                "(a metric with K = 1 has lambda- <= 2 pi)",
                {"lambda_zero": lambda_zero, "target": target})
        samples = sphere_points(metric.n, CONFIG["NORM_SAMPLES"], CONFIG["SEED"])
        headroom = max(float(np.max(metric.values(samples, -wind_field.values(samples)))),
                       float(np.max(metric.values(points, velocity))))
        epsilon_max = 1.0 / headroom
        if abs(lambda_zero - target) <= 1e-12 * target:
            epsilon = 0.0
        else:
            upper = epsilon_max * (1.0 - 1e-6)
            if length(upper) < target:
                raise NumericalError("lambda(eps) does not reach the target below 1/F(-V)",
                                     {"lambda_upper": length(upper), "epsilon_max": epsilon_max})
            epsilon = brentq(lambda e: length(e) - target, 0.0, upper, xtol=1e-13, rtol=4 * np.finfo(float).eps)

        grid = np.linspace(0.0, 0.95 * epsilon_max, profile_points)
        profile = [[float(e), length(float(e))] for e in grid]
        check = self.closed_geodesic_length(navigated_metric(metric, wind_field, epsilon, self.navigation),
                                            wind_field, "-").length
        logger.info("Tuned eps' = %.10f for %s (lambda(0) = %.9f, check %.9f)", epsilon, metric.label, lambda_zero,
                    check)
        return EpsilonTuning(epsilon=float(epsilon), target=target, lambda_zero=lambda_zero, epsilon_max=epsilon_max,
                             profile=profile, check_length=check)

    # ------------------------------------------------------------------ distances

    def _direction_spacing(self, n: int, count: int) -> float:
        area = 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)
        return (area / count) ** (1.0 / (n - 1)) if n > 1 else math.pi

    def _direction_net(self, n: int, count: int, seed: Optional[int]) -> np.ndarray:
        if n == 2:
            angles = 2.0 * math.pi * np.arange(count) / count
            return np.stack([np.cos(angles), np.sin(angles)], axis=1)
        return unit_directions(n, count, make_rng(CONFIG["SEED"] if seed is None else seed))

    def _refine_hit(self, metric: ChartMetric, origin: np.ndarray, target: np.ndarray, basis: np.ndarray,
                    direction: np.ndarray, t_guess: float) -> Tuple[float, float]:
        """Shooting solve for (direction, t) with c(t) = target near a coarse candidate."""
        n = metric.n
        frame = orthonormal_complement(direction).T
        count = max(int(math.ceil(t_guess / CONFIG["DISTANCE_STEP"])), 8)

        def endpoints(params: np.ndarray) -> np.ndarray:
            params = np.atleast_2d(params)
            directions = direction + params[:, :n - 1] @ frame.T
            directions /= np.linalg.norm(directions, axis=1, keepdims=True)
            charts, x, y = self._unit_rays(metric, origin, directions @ basis)
            charts, x, _ = self._shoot(metric, charts, x, y, params[:, -1] / count, count)
            return metric.positions(charts, x)

        def residual(params: np.ndarray) -> np.ndarray:
            return endpoints(params)[0] - target

        def jacobian(params: np.ndarray) -> np.ndarray:
            delta = 1e-6
            shifts = np.concatenate([np.eye(n), -np.eye(n)]) * delta
            values = endpoints(params[None, :] + shifts)
            return ((values[:n] - values[n:]) / (2.0 * delta)).T

        lower = np.full(n, -np.inf)
        upper = np.full(n, np.inf)
        lower[-1], upper[-1] = 1e-6, CONFIG["DISTANCE_HORIZON"]
        guess = np.zeros(n)
        guess[-1] = t_guess
        solution = least_squares(residual, guess, jac=jacobian, bounds=(lower, upper), method="trf",
                                 xtol=1e-12, ftol=1e-14, gtol=1e-14, max_nfev=40)
        return float(solution.x[-1]), float(np.linalg.norm(solution.fun))

    def distance(self, metric: ChartMetric, x1, x2, directions: Optional[int] = None,
                 seed: Optional[int] = None) -> float:
        """
        Directed distance d(x1, x2) as the earliest arrival at x2 of the unit-speed geodesics from x1 over a
        direction net, refined by least squares on the initial direction.
        """
        if not metric.atlas:
            raise ValidationError("distance needs a sphere metric")
        n = metric.n
        origin = _unit_point(x1, n, "x1")
        target = _unit_point(x2, n, "x2")
        hit_tol = CONFIG["DISTANCE_HIT_TOL"]
        if np.linalg.norm(origin - target) < hit_tol:
            raise InvalidInputError("distance needs x1 != x2")
        count = directions or CONFIG["DISTANCE_DIRECTIONS"] * (n - 1)
        step = CONFIG["DISTANCE_STEP"]
        total = int(math.ceil(CONFIG["DISTANCE_HORIZON"] / step))
        spacing = self._direction_spacing(n, count)
        gate = 0.05 + math.pi * spacing
        margin = 0.25

        basis = orthonormal_complement(origin)
        net = self._direction_net(n, count, seed)
        charts, x, y = self._unit_rays(metric, origin, net @ basis)
        gaps = [np.full(count, np.linalg.norm(origin - target))]
        pending: List[Tuple[int, float, int]] = []
        best = math.inf

        for k in range(1, total + 1):
            charts, x, y = self._rk4(metric, charts, x, y, step, levels=1)
            gaps.append(np.linalg.norm(metric.positions(charts, x) - target, axis=1))
            if k >= 2:
                before, middle, after = gaps[k - 2], gaps[k - 1], gaps[k]
                found = np.flatnonzero((middle <= gate) & (middle <= before) & (middle < after))
                pending.extend((k - 1, float(middle[ray]), int(ray)) for ray in found)
            if pending and (k * step > pending[0][0] * step + margin or k == total):
                best = min(best, self._refine_pending(metric, origin, target, basis, net, pending, step, spacing))
                pending = []
                if best < math.inf:
                    break

        if best == math.inf:
            raise SearchFailureError("No geodesic from x1 reaches x2 within the horizon",
                                     {"x1": origin, "x2": target, "directions": count})
        logger.info("d(%s, %s) = %.9f for %s", origin.round(6).tolist(), target.round(6).tolist(), best, metric.label)
        return best

    def _refine_pending(self, metric: ChartMetric, origin: np.ndarray, target: np.ndarray, basis: np.ndarray,
                        net: np.ndarray, pending: List[Tuple[int, float, int]], step: float, spacing: float,
                        limit: int = 4) -> float:
        chosen: List[Tuple[int, float, int]] = []
        for candidate in sorted(pending):
            if len(chosen) == limit:
                break
            index, _, ray = candidate
            if all(abs(index - other[0]) > 3 or np.linalg.norm(net[ray] - net[other[2]]) > 2.0 * spacing
                   for other in chosen):
                chosen.append(candidate)
        best = math.inf
        for index, _, ray in chosen:
            try:
                length, miss = self._refine_hit(metric, origin, target, basis, net[ray], index * step)
            except (NumericalError, np.linalg.LinAlgError) as e:
                logger.debug("Refinement of ray %d failed: %s", ray, e)
                continue
            if miss <= CONFIG["DISTANCE_HIT_TOL"]:
                best = min(best, length)
        return best

    def symmetry_pairs(self, n: int, count: int = 1, seed: Optional[int] = None) -> List[Tuple[np.ndarray, np.ndarray]]:
        """Point pairs at round distance pi and pi/2, plus `count` random pairs."""
        eye = np.eye(n + 1)
        pairs = [(eye[n], -eye[n]), (eye[n], eye[0])]
        points = sample_net(n + 1, 2 * count, CONFIG["SEED"] if seed is None else seed, structured=False)
        pairs.extend((points[2 * k], points[2 * k + 1]) for k in range(count))
        return pairs

    def distance_symmetry_check(self, metric: ChartMetric, pairs: Optional[Sequence] = None,
                                directions: Optional[int] = None, seed: Optional[int] = None) -> float:
        """max |d(x1, x2) - d(x2, x1)| over the pairs."""
        pairs = self.symmetry_pairs(metric.n, seed=seed) if pairs is None else pairs
        worst = 0.0
        for first, second in pairs:
            forward = self.distance(metric, first, second, directions, seed)
            backward = self.distance(metric, second, first, directions, seed)
            worst = max(worst, abs(forward - backward))
        return worst

    # ------------------------------------------------------------------ antipodal map

    def _endpoints_at_pi(self, metric: ChartMetric, points: np.ndarray, directions: int,
                         seed: Optional[int]) -> np.ndarray:
        """Endpoints at time pi of `directions` unit geodesics from every point, shape (points, directions, n + 1)."""
        n = metric.n
        rng = make_rng(CONFIG["SEED"] if seed is None else seed)
        count = int(math.ceil(math.pi / 0.01))
        charts, xs, ys = [], [], []
        for point in points:
            vectors = unit_directions(n, directions, rng) @ orthonormal_complement(point)
            c, x, y = self._unit_rays(metric, point, vectors)
            charts.append(c)
            xs.append(x)
            ys.append(y)
        charts, x, _ = self._shoot(metric, np.concatenate(charts), np.concatenate(xs), np.concatenate(ys),
                                   math.pi / count, count)
        return metric.positions(charts, x).reshape(len(points), directions, n + 1)

    def _antipodes(self, metric: ChartMetric, points: np.ndarray, directions: int,
                   seed: Optional[int]) -> Tuple[np.ndarray, np.ndarray]:
        ends = self._endpoints_at_pi(metric, points, directions, seed)
        psi = ends.mean(axis=1)
        psi /= np.linalg.norm(psi, axis=1, keepdims=True)
        spread = np.max(np.linalg.norm(ends - psi[:, None, :], axis=2), axis=1)
        return psi, spread

    def antipodal_check(self, metric: ChartMetric, sample_count: int = 4, directions: int = 8,
                        seed: Optional[int] = None, check_curvature: bool = True,
                        measure_distance: bool = False) -> List[AntipodalRecord]:
        """psi(x) = common endpoint at time pi of the unit geodesics from x, and psi^2 against the identity."""
        if not metric.atlas:
            raise ValidationError("antipodal_check needs a sphere metric")
        seed = CONFIG["SEED"] if seed is None else seed
        if check_curvature:
            net = self.curvature_net(metric, 4, seed=seed, tolerance=1e-3)
            if not net.passed:
                raise PreconditionError(f"Flag curvature is not 1 on the sample net (max error {net.max_error:.3e})",
                                        {"max_error": net.max_error})
        points = sample_net(metric.n + 1, sample_count, seed, structured=False)
        psi, spread = self._antipodes(metric, points, directions, seed)
        limit = CONFIG["ANTIPODAL_SPREAD"]
        if np.any(spread > limit):
            worst = int(np.argmax(spread))
            raise NotConstantCurvatureError(
                f"Geodesics from one point disagree at time pi (spread {spread[worst]:.3e})",
                {"x": points[worst], "spread": float(spread[worst])})
        twice, _ = self._antipodes(metric, psi, directions, seed + 1)
        records = []
        for k, point in enumerate(points):
            distance = self.distance(metric, point, psi[k], seed=seed) if measure_distance else None
            records.append(AntipodalRecord(x=point.tolist(), psi=psi[k].tolist(), spread=float(spread[k]),
                                           psi_squared_error=float(np.linalg.norm(twice[k] - point)),
                                           psi_distance=distance))
        logger.info("Antipodal map of %s: max spread %.2e, max |psi^2(x) - x| %.2e", metric.label, spread.max(),
                    max(record.psi_squared_error for record in records))
        return records

    # ------------------------------------------------------------------ diagnostics

    def killing_critical_check(self, metric: ChartMetric, wind_field: VectorField, point) -> CriticalPointCheck:
        """|grad F(X(.))| at x, with the geodesic residual of the integral curve of X through x."""
        if not metric.atlas:
            raise ValidationError("killing_critical_check needs a sphere metric")
        point = _unit_point(point, metric.n, "x")
        if not np.linalg.norm(wind_field.values(point[None, :])) > 1e-10:
            raise PreconditionError("The field vanishes at x", {"x": point})
        charts, x = to_chart(point[None, :])

        def length(z: np.ndarray) -> np.ndarray:
            rows = np.repeat(charts, len(z))
            return metric.values(rows, z, self.chart_field(wind_field, 1.0, rows, z))

        gradient = gradient_batch(length, x, CONFIG["GRADIENT_STEP"], self.levels)[0]
        field_length = float(length(x)[0])

        times = np.linspace(-0.1, 0.1, 5)
        rows = np.repeat(charts, len(times))

        def orbit(t: np.ndarray) -> np.ndarray:
            return to_chart(wind_field.flow(np.repeat(point[None, :], len(t), axis=0), t), rows)[1]

        velocity, accel = time_derivatives(orbit, times, h=1e-3)
        coordinates = orbit(times)
        speed = metric.values(rows, coordinates, velocity)
        residual = np.linalg.norm(accel + 2.0 * self._spray(metric, rows, coordinates, velocity), axis=1) / speed ** 2
        return CriticalPointCheck(point=point.tolist(), field_length=field_length,
                                  gradient_norm=float(np.linalg.norm(gradient)), ode_residual=float(np.max(residual)))

    def kim_min_consistency(self, metrics: Dict[str, SphereMetric], sample_count: int = 16,
                            seed: Optional[int] = None) -> List[ReversibilityRecord]:
        """Reversible metrics with K = 1 on samples must have vanishing Cartan tensor on samples."""
        seed = CONFIG["SEED"] if seed is None else seed
        records = []
        for name, sphere in metrics.items():
            asymmetry, cartan = 0.0, 0.0
            for point in sample_net(sphere.n + 1, 3, seed, structured=False):
                fiber = self.fiber_norm(sphere, point)
                asymmetry = max(asymmetry, self.norms.check_reversible(fiber, sample_count, seed)[1])
                cartan = max(cartan, self.norms.max_cartan(fiber, sample_count, seed))
            net = self.curvature_net(self.chart_metric(sphere), 6, seed=seed)
            records.append(ReversibilityRecord(name=name, asymmetry=asymmetry, curvature_spread=net.max_error,
                                               cartan=cartan, reversible=asymmetry < CONFIG["REVERSIBLE_TOL"],
                                               curvature_one=net.max_error < 1e-3))
        return records

    # ------------------------------------------------------------------ export

    def export_curve_csv(self, curve: Union[GeodesicPath, Curve], file_path: str, count: int = 101) -> int:
        """Write t, chart id and chart coordinates of a sampled curve; returns the number of rows."""
        if isinstance(curve, GeodesicPath):
            times = np.linspace(0.0, curve.t_end, count)
            charts, x, _ = curve.state(times)
        else:
            times = curve.grid(count)
            charts, x = to_chart(curve.points(times))
        with open(file_path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["t", "chart"] + [f"x{k + 1}" for k in range(x.shape[1])])
            for t, chart, row in zip(times, charts, x):
                writer.writerow([repr(float(t)), Chart.NAMES[int(chart)]] + [repr(float(value)) for value in row])
        logger.info("Exported %d curve samples to %s", len(times), file_path)
        return len(times)
