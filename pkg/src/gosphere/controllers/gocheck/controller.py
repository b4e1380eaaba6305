#!/usr/bin/env python3
"""
GO Check Controller
Handles: go-check (one presentation, one norm) and classify (the verdict table over presentations)
"""

from argparse import Namespace
from typing import Any, Dict, List

from gosphere.config.settings import CONFIG
from gosphere.controllers.norm.controller import norm_service, spec_from_args
from gosphere.models.certificate.model import Verdict
from gosphere.models.presentation.model import SpaceName, SpherePresentation
from gosphere.models.report.model import ExitCode, RunReport
from gosphere.services.gocheck.service import GOCheckService
from gosphere.services.liealg.service import LieAlgService
from gosphere.utils.errors import GosphereError, ValidationError
from gosphere.utils.logger import get_logger
from gosphere.utils.sampling import make_rng
from gosphere.utils.validation import InputValidator, parse_vector_text

logger = get_logger(__name__)
liealg_service = LieAlgService(norm_service)
gocheck_service = GOCheckService(norm_service, liealg_service)

RANDOM_NORMS = 3


def _presentation(name: str, n) -> SpherePresentation:
    return liealg_service.build_presentation(name, n or SpaceName.MIN_RANK.get(name, 2))


def _validate_common(args: Namespace) -> None:
    validator = InputValidator()
    validator.validate_positive_int("n", args.n)
    validator.validate_positive_int("samples", args.samples)
    validator.validate_range("tol", args.tol, low=0.0)
    validator.raise_if_invalid()


class GOCheckController:
    """Geodesic orbit verdicts"""

    @staticmethod
    def go_check(args: Namespace) -> RunReport:
        """
        GO verdict for a presentation and a norm (given, or a seeded random invariant one)
        gosphere go-check --space sp_u1 --n 2 --samples 256
        """
        command = "go-check"
        seed = CONFIG["SEED"] if args.seed is None else args.seed
        try:
            validator = InputValidator()
            validator.require("space", args.space, "space is required (--space)")
            validator.raise_if_invalid()
            _validate_common(args)

            presentation = _presentation(args.space, args.n)
            spec = spec_from_args(args, presentation.m_dim)
            if spec is None:
                spec = gocheck_service.random_invariant_norm(presentation, make_rng(seed), generic=args.generic)
            norm = norm_service.make_family(spec, CONFIG["NORM_SAMPLES"], seed)
            verdict = gocheck_service.go_verdict(presentation, norm, args.samples, args.tol, seed)

            data: Dict[str, Any] = {
                "presentation": presentation.to_dict() if args.full else presentation.display_name,
                "norm": spec.to_dict(),
                "result": verdict.to_dict(include_certificates=args.certificates),
            }
            if args.u:
                data["spray"] = gocheck_service.spray_vector(presentation, norm,
                                                             parse_vector_text(args.u, "u")).to_dict()
            return RunReport(command=command, data=data, passed=verdict.passed, seed=seed,
                             exit_code=ExitCode.PASS if verdict.passed else ExitCode.VERDICT_FAILED)

        except GosphereError as e:
            logger.warning("go-check failed: %s", e.message)
            return RunReport.failure(command, e.message, e.code, e.details)
        except Exception as e:
            logger.error("Unexpected error in go-check: %s", e)
            return RunReport.failure(command, "Internal error", "INTERNAL_ERROR", {"reason": str(e)})

    @staticmethod
    def classify(args: Namespace) -> RunReport:
        """
        GO verdicts over one or all supported presentations, with the expected outcome for each norm
        gosphere classify --space sp --n 2 --norm-file generic.json
        """
        command = "classify"
        seed = CONFIG["SEED"] if args.seed is None else args.seed
        try:
            _validate_common(args)
            spaces = [args.space] if args.space else list(SpaceName.ALL)
            if args.n and not args.space:
                raise ValidationError("--n needs --space; classify over all spaces uses each minimal rank")
            rng = make_rng(seed)

            rows: List[Dict[str, Any]] = []
            for name in spaces:
                presentation = _presentation(name, args.n)
                given = spec_from_args(args, presentation.m_dim)
                specs = [given] if given is not None else [
                    gocheck_service.random_invariant_norm(presentation, rng, generic=args.generic)
                    for _ in range(args.norms or RANDOM_NORMS)
                ]
                for index, spec in enumerate(specs):
                    norm = norm_service.make_family(spec, CONFIG["NORM_SAMPLES"], seed)
                    defect = gocheck_service.check_invariant(presentation, norm, seed=seed)
                    if defect > CONFIG["INVARIANCE_TOL"]:
                        raise ValidationError(f"Norm is not Ad(H)-invariant on {presentation.display_name}",
                                              {"invariance_defect": defect, "norm": spec.to_dict()})
                    verdict = gocheck_service.go_verdict(presentation, norm, args.samples, args.tol, seed)
                    expected, symmetry = gocheck_service.expected_verdict(presentation, norm, seed=seed)
                    rows.append({
                        "presentation": presentation.display_name,
                        "norm_index": index,
                        "norm": spec.to_dict(),
                        "invariance_defect": defect,
                        "verdict": verdict.verdict,
                        "max_residual3": verdict.max_residual3,
                        "max_residual4": verdict.max_residual4,
                        "conditions_agree": verdict.conditions_agree,
                        "witness": verdict.witness.to_dict() if verdict.witness else None,
                        "expected_go": expected,
                        "symmetry": symmetry or None,
                        "matches_expected": verdict.passed == expected,
                    })

            passed = all(row["verdict"] == Verdict.PASS for row in rows)
            logger.info("classify: %d rows, %d PASS", len(rows), sum(row["verdict"] == Verdict.PASS for row in rows))
            return RunReport(command=command, data={"rows": rows, "all_match_expected":
                                                   all(row["matches_expected"] for row in rows)},
                             passed=passed, seed=seed, exit_code=ExitCode.PASS if passed else ExitCode.VERDICT_FAILED)

        except GosphereError as e:
            logger.warning("classify failed: %s", e.message)
            return RunReport.failure(command, e.message, e.code, e.details)
        except Exception as e:
            logger.error("Unexpected error in classify: %s", e)
            return RunReport.failure(command, "Internal error", "INTERNAL_ERROR", {"reason": str(e)})
