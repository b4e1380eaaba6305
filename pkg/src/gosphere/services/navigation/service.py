#!/usr/bin/env python3
"""
Navigation Service
Zermelo navigation (F, V) -> F~, the closed-form Randers correspondence, composition of winds,
Killing tests and the transport of geodesics by Killing flows
"""

from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq, newton

from gosphere.config.settings import CONFIG
from gosphere.models.geometry.model import Curve
from gosphere.models.navigation.model import NavigationCheck, NavigationDatum, RandersData
from gosphere.models.norm.model import FamilyTag, MinkowskiNorm
from gosphere.services.navigation.fields import VectorField, tangent_projection
from gosphere.utils.errors import (
    NavigationDomainError,
    NotKillingError,
    NumericalError,
    PreconditionError,
    ValidationError,
)
from gosphere.utils.logger import get_logger
from gosphere.utils.numdiff import time_derivatives
from gosphere.utils.sampling import make_rng, sample_net, unit_directions
from gosphere.utils.validation import as_vector

logger = get_logger(__name__)

BatchNorm = Callable[[np.ndarray], np.ndarray]


def sphere_points(n: int, count: int, seed: Optional[int]) -> np.ndarray:
    """Structured and random points on S^n."""
    return sample_net(n + 1, count, seed)


def tangent_samples(points: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One random unit tangent vector at every point."""
    raw = unit_directions(points.shape[1], points.shape[0], rng)
    tangent = tangent_projection(points, raw)
    return tangent / np.linalg.norm(tangent, axis=1, keepdims=True)


class NavigationService:
    """Evaluation and checks of navigation data"""

    def __init__(self):
        self.rtol = CONFIG["NAVIGATION_RTOL"]
        self.maxiter = CONFIG["NAVIGATION_MAXITER"]

    # ------------------------------------------------------------------ root solves

    def _headroom(self, norm_fn: BatchNorm, wind: np.ndarray) -> np.ndarray:
        headroom = norm_fn(-wind)
        bad = np.flatnonzero(~(headroom < 1.0))
        if bad.size:
            raise NavigationDomainError("Wind too strong: F(-V) >= 1",
                                        {"row": int(bad[0]), "F(-V)": float(headroom[bad[0]])})
        return headroom

    def solve(self, norm_fn: BatchNorm, w: np.ndarray, wind: np.ndarray) -> np.ndarray:
        """Unique t > 0 with F(w - t V) = t for every row (row k of w and wind share a base point)."""
        w = np.atleast_2d(w)
        wind = np.broadcast_to(wind, w.shape)
        headroom = self._headroom(norm_fn, wind)
        base = norm_fn(w)
        upper = base / (1.0 - headroom)
        zero = base <= 0.0

        def residual(t):
            return norm_fn(w - np.asarray(t)[:, None] * wind) - t

        def slope(t):
            delta = 1e-6 * np.maximum(upper, 1e-300)
            return (residual(t + delta) - residual(t - delta)) / (2.0 * delta)

        if len(w) == 1:
            root = 0.0 if zero[0] else self._bracketed(lambda t: float(residual(np.array([t]))[0]), upper[0])
            return np.array([root])

        # t -> F(w - tV) - t is convex and decreasing up to the root, so Newton from 0 converges monotonically
        tolerance = self.rtol * max(float(np.max(upper)), 1e-300)
        roots, converged, _ = newton(residual, np.zeros(len(w)), fprime=slope, tol=tolerance, maxiter=self.maxiter,
                                     full_output=True, disp=False)
        roots = np.asarray(roots, dtype=float)
        suspect = ~np.asarray(converged) | ~np.isfinite(roots) | (roots < 0.0) | (roots > upper * (1 + 1e-9))
        suspect &= ~zero
        for row in np.flatnonzero(suspect):
            roots[row] = self._bracketed(lambda t: float(residual(np.full(len(w), t))[row]), upper[row])
        roots[zero] = 0.0
        return roots

    def _bracketed(self, fn: Callable[[float], float], upper: float) -> float:
        try:
            return brentq(fn, 0.0, upper, xtol=1e-300, rtol=max(self.rtol, 4 * np.finfo(float).eps),
                          maxiter=200)
        except (ValueError, RuntimeError) as e:
            raise NumericalError("Navigation root bracket failed", {"upper": upper, "reason": str(e)}) from e

    # ------------------------------------------------------------------ navigation data

    def navigate_eval(self, datum: NavigationDatum, x, w) -> float:
        """F~(x, w): the t > 0 with F(x, w - t eps V(x)) = t, by bracketed root finding."""
        if datum.single_fiber:
            w = as_vector(w, "w", datum.base.dim)
            wind = datum.wind()
            norm_fn = datum.base.values
        else:
            x = as_vector(x, "x", datum.field.n + 1)
            w = as_vector(w, "w", datum.field.n + 1)
            wind = datum.wind(x[None, :])[0]
            at_x = x[None, :]
            norm_fn = lambda vectors: datum.base.values(np.repeat(at_x, len(vectors), axis=0), vectors)  # noqa: E731
        if not np.any(w != 0.0):
            return 0.0
        headroom = float(self._headroom(norm_fn, wind[None, :])[0])
        base = float(norm_fn(w[None, :])[0])
        upper = base / (1.0 - headroom)
        return self._bracketed(lambda t: float(norm_fn((w - t * wind)[None, :])[0]) - t, upper)

    def navigate_values(self, datum: NavigationDatum, points: Optional[np.ndarray], vectors) -> np.ndarray:
        """Batch F~ at rows (p_k, w_k); `points` is ignored in single-fiber mode."""
        vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
        if datum.single_fiber:
            return self.solve(datum.base.values, vectors, datum.wind())
        points = np.atleast_2d(points)
        return self.solve(lambda w: datum.base.values(points, w), vectors, datum.wind(points))

    def validate_datum(self, datum: NavigationDatum, sample_count: Optional[int] = None,
                       seed: Optional[int] = None) -> float:
        """Largest F(-eps V) over the sample points; raises when it reaches 1."""
        if datum.epsilon < 0:
            raise ValidationError("epsilon must be nonnegative")
        if datum.single_fiber:
            return float(self._headroom(datum.base.values, datum.wind()[None, :])[0])
        count = CONFIG["NORM_SAMPLES"] if sample_count is None else sample_count
        points = sphere_points(datum.field.n, count, CONFIG["SEED"] if seed is None else seed)
        return float(np.max(self._headroom(lambda w: datum.base.values(points, w), datum.wind(points))))

    def navigated_norm(self, norm: MinkowskiNorm, wind) -> MinkowskiNorm:
        """F~ on one tangent space as a MinkowskiNorm."""
        wind = as_vector(wind, "V", norm.dim)
        self._headroom(norm.values, wind[None, :])
        return MinkowskiNorm(dim=norm.dim, value=lambda points: self.solve(norm.values, points, wind),
                             family_tag=FamilyTag.CUSTOM, reversible_hint=not np.any(wind != 0.0) or None,
                             label=f"navigate({norm.label or norm.family_tag.value})")

    def compose(self, datum: NavigationDatum, field, epsilon: float = 1.0) -> NavigationDatum:
        """(F, W1) followed by (F~, W2) is (F, W1 + W2)."""
        if datum.single_fiber:
            combined = datum.epsilon * datum.field + epsilon * as_vector(field, "W2", datum.field.shape[0])
        else:
            combined = datum.field.scaled(datum.epsilon) + field.scaled(epsilon)
        return NavigationDatum(base=datum.base, field=combined, epsilon=1.0, label=f"{datum.label}+W2")

    # ------------------------------------------------------------------ Randers correspondence

    def randers_from_navigation(self, h, W) -> RandersData:
        """alpha + beta with alpha = sqrt((1-lam)|y|_h^2 + <y,W>_h^2)/(1-lam), beta = -<y,W>_h/(1-lam)."""
        h = np.asarray(h, dtype=float)
        W = as_vector(W, "W", h.shape[0])
        if h.shape != (len(W), len(W)) or not np.allclose(h, h.T, atol=1e-12):
            raise ValidationError("h must be a symmetric matrix matching W")
        if np.linalg.eigvalsh(h)[0] <= 0.0:
            raise ValidationError("h must be positive definite")
        data = RandersData(h=h, W=W)
        if not data.lam < 1.0:
            raise NavigationDomainError("lambda = <W, W>_h must be < 1", {"lambda": data.lam})
        return data

    def randers_check(self, data: RandersData, sample_count: int = 200, seed: Optional[int] = None,
                      tolerance: float = 1e-9) -> NavigationCheck:
        """Closed-form alpha + beta against implicit navigation of (|.|_h, W)."""
        h = data.h
        norm_fn = lambda y: np.sqrt(np.einsum("mi,ij,mj->m", y, h, y))  # noqa: E731
        rng = make_rng(CONFIG["SEED"] if seed is None else seed)
        samples = unit_directions(len(data.W), sample_count, rng)
        implicit = self.solve(norm_fn, samples, data.W)
        closed = data.values(samples)
        error = np.abs(closed - implicit) / implicit
        worst = int(np.argmax(error))
        return NavigationCheck("randers_closed_form", sample_count, float(error[worst]), tolerance,
                               samples[worst].tolist())

    def round_trip_check(self, norm: MinkowskiNorm, wind, sample_count: int = 200, seed: Optional[int] = None,
                         tolerance: float = 1e-10) -> NavigationCheck:
        """Navigate (F, V) then (F~, -V); the result must be F."""
        wind = as_vector(wind, "V", norm.dim)
        forward = self.navigated_norm(norm, wind)
        rng = make_rng(CONFIG["SEED"] if seed is None else seed)
        samples = unit_directions(norm.dim, sample_count, rng)
        back = self.solve(forward.values, samples, -wind)
        original = norm.values(samples)
        error = np.abs(back - original) / original
        worst = int(np.argmax(error))
        return NavigationCheck("round_trip", sample_count, float(error[worst]), tolerance, samples[worst].tolist())

    # ------------------------------------------------------------------ Killing fields

    def killing_defect(self, metric, field: VectorField, sample_count: Optional[int] = None,
                       times=(0.3, 1.1, -0.7), seed: Optional[int] = None) -> float:
        """max |F(rho_t p, d rho_t v) - F(p, v)| / F(p, v) over sampled (p, v, t)."""
        count = CONFIG["NORM_SAMPLES"] if sample_count is None else sample_count
        seed = CONFIG["SEED"] if seed is None else seed
        points = sphere_points(field.n, count, seed)
        vectors = tangent_samples(points, make_rng(seed))
        original = metric.values(points, vectors)
        worst = 0.0
        for t in times:
            moved = field.flow(points, t)
            pushed = field.flow_differential(points, vectors, t)
            defect = np.abs(metric.values(moved, pushed) - original) / original
            worst = max(worst, float(np.max(defect)))
        return worst

    def check_killing(self, metric, field: VectorField, sample_count: Optional[int] = None,
                      seed: Optional[int] = None) -> float:
        defect = self.killing_defect(metric, field, sample_count, seed=seed)
        if defect > CONFIG["KILLING_TOL"]:
            raise NotKillingError(f"Field {field.label} is not Killing for the metric (defect {defect:.3e})",
                                  {"defect": defect})
        return defect

    def killing_transport(self, metric, curve: Curve, field: VectorField, epsilon: float = 1.0,
                          check: bool = True, speed_samples: int = 17) -> Curve:
        """t -> rho_t(c(t)) where rho is the flow of eps V."""
        if check:
            self.check_killing(metric, field)
            times = curve.grid(speed_samples)[1:-1]
            position = lambda t: curve.points(t)  # noqa: E731
            velocity, _ = time_derivatives(position, times, h=1e-3)
            speed = metric.values(curve.points(times), velocity)
            drift = float(np.max(np.abs(speed - 1.0)))
            if drift > 1e-6:
                raise PreconditionError(f"Curve is not unit speed (drift {drift:.3e})", {"drift": drift})
        if epsilon == 0.0:
            return Curve(curve.t_start, curve.t_end, curve.sampler, label=curve.label)

        def sampler(times: np.ndarray) -> np.ndarray:
            return field.flow(curve.points(times), epsilon * np.asarray(times, dtype=float))

        logger.debug("Transporting %s by the flow of %g * %s", curve.label, epsilon, field.label)
        return Curve(curve.t_start, curve.t_end, sampler, label=f"rho({curve.label})")

