#!/usr/bin/env python3
"""
Navigation Controller
Handles: navigate (closed-form Randers against implicit navigation, round trips, Killing transport of geodesics)
"""

import math
from argparse import Namespace
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from gosphere.config.settings import CONFIG
from gosphere.models.geometry.model import Curve
from gosphere.models.navigation.model import NAVIGATION_SCHEMA, NavigationDatum
from gosphere.models.report.model import ExitCode, RunReport
from gosphere.services.curvature.chart import navigated_metric, round_metric
from gosphere.services.curvature.service import CurvatureService
from gosphere.services.navigation.fields import VectorField
from gosphere.services.navigation.service import NavigationService, sphere_points, tangent_samples
from gosphere.services.norms.service import NormService
from gosphere.utils.errors import GosphereError
from gosphere.utils.logger import get_logger
from gosphere.utils.response import read_json
from gosphere.utils.sampling import make_rng
from gosphere.utils.validation import InputValidator, validate_document

logger = get_logger(__name__)
norm_service = NormService()
navigation_service = NavigationService()
curvature_service = CurvatureService(navigation_service, norm_service)

NAMED_FIELDS = ("hopf", "rotation")
CORRESPONDENCE_TOL = 1e-9
GEODESIC_RESIDUAL_TOL = 1e-5
SPEED_DRIFT_TOL = 1e-7


def field_from_text(text: Union[str, Sequence[str]], n: int, scale: float = 1.0) -> VectorField:
    """'hopf', 'rotation', or ambient components in x1..x(n+1) separated by ';'."""
    if isinstance(text, str) and text.strip() in NAMED_FIELDS:
        return VectorField.named(text.strip(), n, scale)
    parts = [part.strip() for part in text.split(";")] if isinstance(text, str) else list(text)
    field = VectorField.from_expressions(n, parts)
    return field if scale == 1.0 else field.scaled(scale)


def great_circle(point: np.ndarray, direction: np.ndarray, t_end: float = math.pi) -> Curve:
    """Unit-speed great circle t -> cos t p + sin t v."""
    direction = direction / np.linalg.norm(direction)

    def sampler(times: np.ndarray) -> np.ndarray:
        return np.cos(times)[:, None] * point[None, :] + np.sin(times)[:, None] * direction[None, :]

    return Curve(0.0, t_end, sampler, label="great circle")


def _navigation_inputs(args: Namespace) -> Tuple[int, VectorField, float]:
    if args.nav_file:
        document = validate_document(read_json(args.nav_file), NAVIGATION_SCHEMA, "navigation data")
        n = document.get("sphere", args.sphere or 2)
        return n, field_from_text(document["W_expr"], n), float(document.get("epsilon", 1.0))
    n = args.sphere or 2
    validator = InputValidator()
    validator.validate_positive_int("sphere", n)
    validator.validate_range("epsilon", args.epsilon, low=0.0)
    validator.raise_if_invalid()
    return n, field_from_text(args.field or "rotation", n), 0.3 if args.epsilon is None else args.epsilon


class NavigationController:
    """Zermelo navigation checks on round spheres"""

    @staticmethod
    def navigate(args: Namespace) -> RunReport:
        """
        Navigate the round sphere by eps V and check the Randers correspondence and Killing transport
        gosphere navigate --sphere 3 --field hopf --epsilon 0.3
        """
        command = "navigate"
        seed = CONFIG["SEED"] if args.seed is None else args.seed
        try:
            n, field, epsilon = _navigation_inputs(args)
            count = args.samples or 200
            base = round_metric(n)
            datum = NavigationDatum(base=base, field=field, epsilon=epsilon, label=f"{field.label} on S^{n}")
            headroom = navigation_service.validate_datum(datum, seed=seed)
            image = navigated_metric(base, field, epsilon, navigation_service)

            points = sphere_points(n, count, seed)
            vectors = tangent_samples(points, make_rng(seed))
            implicit = navigation_service.navigate_values(datum, points, vectors)
            closed = image.values(points, vectors)
            correspondence = float(np.max(np.abs(closed - implicit) / implicit))

            wind = epsilon * field.values(points[:1])[0]
            randers = navigation_service.randers_check(
                navigation_service.randers_from_navigation(np.eye(n + 1), wind), count, seed)
            round_trip = navigation_service.round_trip_check(norm_service.euclidean(n + 1), wind, count, seed)
            killing = {
                "base": navigation_service.killing_defect(base, field, seed=seed),
                "image": navigation_service.killing_defect(image, field, seed=seed),
            }

            checks: List[bool] = [correspondence < CORRESPONDENCE_TOL, randers.passed, round_trip.passed]
            data: Dict[str, Any] = {
                "datum": datum.to_dict(),
                "headroom": headroom,
                "randers": image.describe(),
                "correspondence_error": correspondence,
                "randers_check": randers.to_dict(),
                "round_trip": round_trip.to_dict(),
                "killing_defect": killing,
            }

            transport: Optional[Dict[str, Any]] = None
            if killing["base"] <= CONFIG["KILLING_TOL"]:
                transported = navigation_service.killing_transport(base, great_circle(points[0], vectors[0]), field,
                                                                   epsilon)
                residual, drift = curvature_service.geodesic_residual(curvature_service.chart_metric(image),
                                                                      transported)
                transport = {"geodesic_residual": residual, "speed_drift": drift,
                             "curve": transported.to_dict()}
                checks.extend([residual < GEODESIC_RESIDUAL_TOL, drift < SPEED_DRIFT_TOL])
                if args.csv:
                    transport["csv_rows"] = curvature_service.export_curve_csv(transported, args.csv)
            else:
                logger.info("Field %s is not Killing for the round metric; transport skipped", field.label)
            data["transport"] = transport

            passed = all(checks)
            return RunReport(command=command, data=data, passed=passed, seed=seed,
                             exit_code=ExitCode.PASS if passed else ExitCode.VERDICT_FAILED)

        except GosphereError as e:
            logger.warning("navigate failed: %s", e.message)
            return RunReport.failure(command, e.message, e.code, e.details)
        except Exception as e:
            logger.error("Unexpected error in navigate: %s", e)
            return RunReport.failure(command, "Internal error", "INTERNAL_ERROR", {"reason": str(e)})
