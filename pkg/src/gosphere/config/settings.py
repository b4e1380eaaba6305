#!/usr/bin/env python3
"""
Runtime Configuration
Numerical constants and environment overrides shared by every command
"""

import math
import os
from typing import Any, Dict, List


def _env_int(name: str, default: int) -> int:
    try:
        return int(os.getenv(name, str(default)))
    except ValueError:
        return default


def _env_float(name: str, default: float) -> float:
    try:
        return float(os.getenv(name, repr(default)))
    except ValueError:
        return default


CONFIG: Dict[str, Any] = {
    "VERSION": "1.0.0",
    "SCHEMA_VERSION": 1,
    # Reproducibility & execution
    "SEED": _env_int("GOSPHERE_SEED", 20180606),
    "WORKERS": _env_int("GOSPHERE_WORKERS", 1),
    "LOG_LEVEL": os.getenv("GOSPHERE_LOG_LEVEL", "WARNING").upper(),
    "LOG_FORMAT": os.getenv("GOSPHERE_LOG_FORMAT", "console").lower(),
    # Norm numerics
    "ZERO_VECTOR_TOL": 1e-12,
    "HESSIAN_STEP": 1e-2,
    "GRADIENT_STEP": 1e-3,
    "CARTAN_STEP": 1e-2,
    "RICHARDSON_LEVELS": 3,
    "CONVEXITY_RATIO": 1e-9,
    "HOMOGENEITY_TOL": 1e-8,
    "REVERSIBLE_TOL": 1e-9,
    "NORM_SAMPLES": _env_int("GOSPHERE_NORM_SAMPLES", 64),
    # Lie algebra checks
    "STRUCTURE_ZERO_TOL": 1e-13,
    "ALGEBRA_TOL": 1e-12,
    "WEAK_SYMMETRY_TOL": 1e-6,
    "WEAK_SYMMETRY_BUDGET": 24,
    # Geodesic orbit verdicts
    "GO_SAMPLES": _env_int("GOSPHERE_SAMPLES", 256),
    "GO_TOL": _env_float("GOSPHERE_GO_TOL", 1e-8),
    "FAIL_THRESHOLD": _env_float("GOSPHERE_FAIL_THRESHOLD", 1e-4),
    "EQUIVARIANCE_STEP": 1e-3,
    "SYMMETRY_RANK_TOL": 1e-7,
    "INVARIANCE_TOL": 1e-6,
    # Navigation
    "NAVIGATION_RTOL": 1e-12,
    "NAVIGATION_MAXITER": 60,
    "FLOW_STEP": 1e-3,
    "KILLING_TOL": 1e-6,
    # Chart geometry
    "CHART_SWITCH_RADIUS": 2.0,
    "SPRAY_STEP": 1e-2,
    "CURVATURE_STEP": 1e-2,
    "GEODESIC_RTOL": 1e-10,
    "GEODESIC_ATOL": 1e-12,
    "RETURN_TOL": 1e-6,
    "RETURN_HORIZON": 50.0,
    "DISTANCE_DIRECTIONS": _env_int("GOSPHERE_DISTANCE_DIRECTIONS", 720),
    "DISTANCE_HORIZON": 2.0 * math.pi + 0.5,
    "DISTANCE_STEP": 0.02,
    "DISTANCE_HIT_TOL": 1e-4,
    "ANTIPODAL_SPREAD": 1e-3,
    "EPSILON_TOL": 1e-7,
}


def validate_environment() -> None:
    """Validate environment overrides before any command runs."""
    problems: List[str] = []

    int_vars = {
        "GOSPHERE_SEED": "random seed",
        "GOSPHERE_WORKERS": "worker threads",
        "GOSPHERE_SAMPLES": "GO sample count",
        "GOSPHERE_NORM_SAMPLES": "convexity sample count",
        "GOSPHERE_DISTANCE_DIRECTIONS": "distance shooting directions",
    }
    for var, description in int_vars.items():
        value = os.getenv(var)
        if value is None:
            continue
        try:
            parsed = int(value)
        except ValueError:
            problems.append(f"{var} ({description}) must be an integer")
            continue
        if var != "GOSPHERE_SEED" and parsed < 1:
            problems.append(f"{var} ({description}) must be positive")

    for var in ("GOSPHERE_GO_TOL", "GOSPHERE_FAIL_THRESHOLD"):
        value = os.getenv(var)
        if value is None:
            continue
        try:
            if float(value) <= 0:
                problems.append(f"{var} must be positive")
        except ValueError:
            problems.append(f"{var} must be a number")

    if CONFIG["LOG_LEVEL"] not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        problems.append("GOSPHERE_LOG_LEVEL must be a standard logging level")
    if CONFIG["LOG_FORMAT"] not in ("console", "json"):
        problems.append("GOSPHERE_LOG_FORMAT must be 'console' or 'json'")
    if CONFIG["GO_TOL"] >= CONFIG["FAIL_THRESHOLD"]:
        problems.append("GOSPHERE_GO_TOL must be smaller than GOSPHERE_FAIL_THRESHOLD")

    if problems:
        raise ValueError(f"Invalid environment configuration: {'; '.join(problems)}")


def config_echo() -> Dict[str, Any]:
    """Subset of the configuration echoed into reports."""
    keys = ("VERSION", "SEED", "GO_TOL", "FAIL_THRESHOLD", "HESSIAN_STEP", "GRADIENT_STEP", "CARTAN_STEP",
            "RICHARDSON_LEVELS", "FLOW_STEP", "CHART_SWITCH_RADIUS")
    return {key: CONFIG[key] for key in keys}
