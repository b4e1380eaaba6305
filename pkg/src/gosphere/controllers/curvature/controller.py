#!/usr/bin/env python3
"""
Curvature Controller
Handles: flag (curvature preservation under Killing navigation), tune-epsilon (prime closed geodesic of
length 2 pi, antipodal map) and distances (directed distances, asymmetry, triangle inequality)
"""

import math
from argparse import Namespace
from typing import Any, Dict, List, Tuple

import numpy as np

from gosphere.config.settings import CONFIG
from gosphere.controllers.navigation.controller import curvature_service, field_from_text
from gosphere.models.report.model import ExitCode, RunReport
from gosphere.services.curvature.chart import navigated_metric, randers_metric, round_metric
from gosphere.utils.errors import GosphereError
from gosphere.utils.logger import get_logger
from gosphere.utils.validation import InputValidator, parse_vector_text

logger = get_logger(__name__)

FLAG_COUNT = 50
PRESERVATION_TOL = 1e-3
UNIT_CURVATURE_TOL = 5e-4
LENGTH_TOL = 1e-5
HARMONIC_TOL = 1e-4
PSI_SQUARED_TOL = 1e-3
SYMMETRY_TOL = 2e-3
TRIANGLE_SLACK = 1e-6


def _sphere_args(args: Namespace, default_sphere: int, default_field: str, default_epsilon: float):
    n = args.sphere or default_sphere
    epsilon = default_epsilon if args.epsilon is None else args.epsilon
    validator = InputValidator()
    validator.validate_positive_int("sphere", n, minimum=2)
    validator.validate_range("epsilon", epsilon, low=0.0)
    validator.raise_if_invalid()
    return n, field_from_text(args.field or default_field, n), epsilon


def triangle_points(n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Corners a, b, c with b off every minimizing round geodesic from a to c."""
    eye = np.eye(n + 1)
    return eye[n], (eye[1] + eye[n]) / math.sqrt(2.0), eye[0]


class CurvatureController:
    """Flag curvature, closed geodesics and distances on navigated spheres"""

    @staticmethod
    def flag(args: Namespace) -> RunReport:
        """
        K on flags of the round sphere against K~ on the navigated flags, and K~ = 1
        gosphere flag --sphere 2 --field rotation --epsilon 0.3
        """
        command = "flag"
        seed = CONFIG["SEED"] if args.seed is None else args.seed
        try:
            n, field, epsilon = _sphere_args(args, 2, "rotation", 0.3)
            count = args.flags or FLAG_COUNT
            base = round_metric(n)
            preservation = curvature_service.curvature_preservation(base, field, epsilon, count, seed,
                                                                    PRESERVATION_TOL)
            image = curvature_service.chart_metric(navigated_metric(base, field, epsilon))
            unit = curvature_service.curvature_net(image, count, 1.0, UNIT_CURVATURE_TOL, seed)
            data: Dict[str, Any] = {"metric": image.label, "preservation": preservation.to_dict(),
                                    "unit_curvature": unit.to_dict()}
            passed = preservation.passed and unit.passed
            if args.critical:
                critical = curvature_service.killing_critical_check(image, field.scaled(epsilon),
                                                                    parse_vector_text(args.critical, "critical"))
                data["critical_point"] = critical.to_dict()

            return RunReport(command=command, data=data, passed=passed, seed=seed,
                             exit_code=ExitCode.PASS if passed else ExitCode.VERDICT_FAILED)

        except GosphereError as e:
            logger.warning("flag failed: %s", e.message)
            return RunReport.failure(command, e.message, e.code, e.details)
        except Exception as e:
            logger.error("Unexpected error in flag: %s", e)
            return RunReport.failure(command, "Internal error", "INTERNAL_ERROR", {"reason": str(e)})

    @staticmethod
    def tune_epsilon(args: Namespace) -> RunReport:
        """
        Plant a Randers sphere navigated by -eps0 V, then recover eps' with lambda-(eps') = target
        gosphere tune-epsilon --sphere 3 --field hopf --target-lambda 6.283185307
        """
        command = "tune-epsilon"
        seed = CONFIG["SEED"] if args.seed is None else args.seed
        try:
            n, field, planted = _sphere_args(args, 3, "hopf", 0.3)
            target = 2.0 * math.pi if args.target_lambda is None else args.target_lambda
            InputValidator().validate_range("target_lambda", target, low=0.0).raise_if_invalid()

            base = randers_metric(n, field, -planted)
            tuning = curvature_service.tune_epsilon(base, field, target)
            plus, minus, harmonic = curvature_service.harmonic_length_check(base, field)
            data: Dict[str, Any] = {
                "base": base.describe(),
                "planted_epsilon": planted,
                "tuning": tuning.to_dict(),
                "lambda_plus": plus,
                "lambda_minus": minus,
                "harmonic_defect": harmonic,
            }
            checks = [abs(tuning.check_length - target) < LENGTH_TOL, abs(harmonic) < HARMONIC_TOL, tuning.monotone]
            if abs(target - 2.0 * math.pi) < 1e-8:
                data["planted_error"] = abs(tuning.epsilon - planted)

            if args.antipodal:
                tuned = curvature_service.chart_metric(navigated_metric(base, field, tuning.epsilon))
                records = curvature_service.antipodal_check(tuned, seed=seed, measure_distance=args.measure_distance)
                untuned = curvature_service.antipodal_check(curvature_service.chart_metric(base), seed=seed)
                data["antipodal"] = {
                    "tuned": [record.to_dict() for record in records],
                    "untuned": [record.to_dict() for record in untuned],
                }
                checks.append(max(record.psi_squared_error for record in records) < PSI_SQUARED_TOL)

            passed = all(checks)
            return RunReport(command=command, data=data, passed=passed, seed=seed,
                             exit_code=ExitCode.PASS if passed else ExitCode.VERDICT_FAILED)

        except GosphereError as e:
            logger.warning("tune-epsilon failed: %s", e.message)
            return RunReport.failure(command, e.message, e.code, e.details)
        except Exception as e:
            logger.error("Unexpected error in tune-epsilon: %s", e)
            return RunReport.failure(command, "Internal error", "INTERNAL_ERROR", {"reason": str(e)})

    @staticmethod
    def distances(args: Namespace) -> RunReport:
        """
        Directed distances between sample pairs, their asymmetry and a triangle inequality
        gosphere distances --sphere 2 --field rotation --epsilon 0.3 --directions 360
        """
        command = "distances"
        seed = CONFIG["SEED"] if args.seed is None else args.seed
        try:
            n, field, epsilon = _sphere_args(args, 2, "rotation", 0.3)
            InputValidator().validate_positive_int("directions", args.directions, minimum=8).raise_if_invalid()
            sphere = round_metric(n) if epsilon == 0.0 else navigated_metric(round_metric(n), field, epsilon)
            metric = curvature_service.chart_metric(sphere)

            rows: List[Dict[str, Any]] = []
            for first, second in curvature_service.symmetry_pairs(n, args.pairs or 1, seed):
                forward = curvature_service.distance(metric, first, second, args.directions, seed)
                backward = curvature_service.distance(metric, second, first, args.directions, seed)
                rows.append({"x1": first.tolist(), "x2": second.tolist(), "forward": forward, "backward": backward,
                             "asymmetry": abs(forward - backward)})
            asymmetry = max(row["asymmetry"] for row in rows)

            a, b, c = triangle_points(n)
            direct = curvature_service.distance(metric, a, c, args.directions, seed)
            detour = (curvature_service.distance(metric, a, b, args.directions, seed)
                      + curvature_service.distance(metric, b, c, args.directions, seed))
            reversible = epsilon == 0.0
            data: Dict[str, Any] = {
                "metric": metric.label,
                "pairs": rows,
                "max_asymmetry": asymmetry,
                "reversible": reversible,
                "triangle": {"direct": direct, "detour": detour, "holds": direct <= detour + TRIANGLE_SLACK},
            }
            checks = [data["triangle"]["holds"]]
            if reversible:
                checks.append(asymmetry < SYMMETRY_TOL)
            if args.consistency:
                records = curvature_service.kim_min_consistency({"round": round_metric(n), "navigated": sphere},
                                                                seed=seed)
                data["consistency"] = [record.to_dict() for record in records]
                checks.append(all(record.holds for record in records))

            passed = all(checks)
            return RunReport(command=command, data=data, passed=passed, seed=seed,
                             exit_code=ExitCode.PASS if passed else ExitCode.VERDICT_FAILED)

        except GosphereError as e:
            logger.warning("distances failed: %s", e.message)
            return RunReport.failure(command, e.message, e.code, e.details)
        except Exception as e:
            logger.error("Unexpected error in distances: %s", e)
            return RunReport.failure(command, "Internal error", "INTERNAL_ERROR", {"reason": str(e)})
