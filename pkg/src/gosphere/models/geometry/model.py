#!/usr/bin/env python3
"""
Sphere Geometry Models
Flags, curves and closed-geodesic records in the stereographic atlas
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np


class Chart:
    """Stereographic charts of S^n"""

    NORTH = 0  # x = p[:n] / (1 + p_n), covers p_n > -1
    SOUTH = 1  # x = p[:n] / (1 - p_n), covers p_n < 1
    FLAT = 2  # single global chart (Euclidean or expression metrics)

    NAMES = {NORTH: "N", SOUTH: "S", FLAT: "R"}


@dataclass(frozen=True)
class FlagInput:
    """Flagpole y and transverse edge u at the chart point x"""

    x: np.ndarray
    y: np.ndarray
    u: np.ndarray
    chart: int = Chart.NORTH

    def to_dict(self) -> Dict[str, Any]:
        return {"chart": Chart.NAMES[self.chart], "x": self.x.tolist(), "y": self.y.tolist(),
                "u": self.u.tolist()}


@dataclass
class Curve:
    """A curve on the sphere, sampled through `sampler(t) -> (len(t), n + 1)` ambient points"""

    t_start: float
    t_end: float
    sampler: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    label: str = ""

    def points(self, times) -> np.ndarray:
        return np.asarray(self.sampler(np.atleast_1d(np.asarray(times, dtype=float))))

    def grid(self, count: int) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, count)

    def to_dict(self, count: int = 9) -> Dict[str, Any]:
        times = self.grid(count)
        return {"label": self.label, "t_start": self.t_start, "t_end": self.t_end,
                "samples": [[float(t)] + row.tolist() for t, row in zip(times, self.points(times))]}


@dataclass
class ClosedGeodesicRecord:
    """Prime closed integral curve of +-V with its F-length"""

    direction: str  # "+" or "-"
    length: float
    epsilon: float
    period: float
    return_error: float
    start: Optional[List[float]] = None

    def validate(self) -> List[str]:
        errors = []
        if self.direction not in ("+", "-"):
            errors.append("direction must be '+' or '-'")
        if not self.length > 0:
            errors.append("length must be positive")
        return errors

    def to_dict(self) -> Dict[str, Any]:
        return {
            "direction": self.direction,
            "length": self.length,
            "epsilon": self.epsilon,
            "period": self.period,
            "return_error": self.return_error,
            "start": self.start,
        }


@dataclass
class AntipodalRecord:
    """Endpoints at time pi of the unit geodesics from one sample point"""

    x: List[float]
    psi: List[float]
    spread: float
    psi_squared_error: float
    psi_distance: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "x": self.x,
            "psi": self.psi,
            "spread": self.spread,
            "psi_squared_error": self.psi_squared_error,
            "psi_distance": self.psi_distance,
        }


@dataclass
class CurvatureNet:
    """Sampled flag curvatures against reference values (1, 0, or the curvatures of a second metric)"""

    name: str
    values: List[float]
    reference: List[float]
    tolerance: float
    flags: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def errors(self) -> np.ndarray:
        return np.abs(np.asarray(self.values) - np.asarray(self.reference))

    @property
    def max_error(self) -> float:
        return float(np.max(self.errors)) if self.values else 0.0

    @property
    def passed(self) -> bool:
        return self.max_error < self.tolerance

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "samples": len(self.values),
            "max_error": self.max_error,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "values": list(self.values),
            "reference": list(self.reference),
        }


@dataclass
class EpsilonTuning:
    """Scale eps' at which the prime closed geodesic of -V has the target length"""

    epsilon: float
    target: float
    lambda_zero: float
    epsilon_max: float
    profile: List[List[float]] = field(default_factory=list)
    check_length: Optional[float] = None

    @property
    def monotone(self) -> bool:
        lengths = [row[1] for row in self.profile]
        return all(b > a for a, b in zip(lengths, lengths[1:]))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "epsilon": self.epsilon,
            "target": self.target,
            "lambda_zero": self.lambda_zero,
            "epsilon_max": self.epsilon_max,
            "monotone": self.monotone,
            "profile": self.profile,
            "check_length": self.check_length,
        }


@dataclass
class CriticalPointCheck:
    """|grad F(X(.))| at a point together with the geodesic residual of the integral curve of X"""

    point: List[float]
    field_length: float
    gradient_norm: float
    ode_residual: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "point": self.point,
            "field_length": self.field_length,
            "gradient_norm": self.gradient_norm,
            "ode_residual": self.ode_residual,
        }


@dataclass
class ReversibilityRecord:
    """One metric of a reversible-and-K=1-implies-Riemannian consistency run"""

    name: str
    asymmetry: float
    curvature_spread: float
    cartan: float
    reversible: bool
    curvature_one: bool

    @property
    def holds(self) -> bool:
        return not (self.reversible and self.curvature_one) or self.cartan < 1e-3

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "asymmetry": self.asymmetry,
            "curvature_spread": self.curvature_spread,
            "cartan": self.cartan,
            "reversible": self.reversible,
            "curvature_one": self.curvature_one,
            "holds": self.holds,
        }
