#!/usr/bin/env python3
"""
Norm Controller
Handles: norm-check (homogeneity, strong convexity, reversibility and Cartan size of a family norm)
"""

from argparse import Namespace
from typing import Optional

from gosphere.config.settings import CONFIG
from gosphere.models.norm.model import METRIC_SPEC_SCHEMA, FamilyTag, MetricFamilySpec
from gosphere.models.report.model import ExitCode, RunReport
from gosphere.services.norms.service import NormService
from gosphere.utils.errors import GosphereError, NotStronglyConvexError
from gosphere.utils.logger import get_logger
from gosphere.utils.response import read_json
from gosphere.utils.sampling import sample_net
from gosphere.utils.validation import InputValidator, parse_vector_text, validate_document

logger = get_logger(__name__)
norm_service = NormService()


def spec_from_args(args: Namespace, dim: Optional[int] = None) -> Optional[MetricFamilySpec]:
    """Metric spec from --norm-file, or from --family/--f-expr/--dim/--blocks/--beta; None if neither is given."""
    if getattr(args, "norm_file", None):
        document = validate_document(read_json(args.norm_file), METRIC_SPEC_SCHEMA, "metric spec")
        return MetricFamilySpec.from_dict(document)
    if not getattr(args, "family", None) and not getattr(args, "f_expr", None):
        return None

    family = args.family or FamilyTag.CUSTOM.value
    validator = InputValidator()
    validator.validate_enum("family", family, FamilyTag.values(), required=True)
    validator.validate_positive_int("dim", args.dim or dim)
    validator.require("dim", args.dim or dim, "dim is required (--dim) for a norm given on the command line")
    validator.raise_if_invalid()
    blocks = [int(part) for part in parse_vector_text(args.blocks, "blocks")] if args.blocks else None
    beta = parse_vector_text(args.beta, "beta").tolist() if getattr(args, "beta", None) else None
    return MetricFamilySpec(family=family, dim=args.dim or dim, blocks=blocks, f_expr=args.f_expr,
                            beta_covector=beta)


class NormController:
    """Minkowski norm checks"""

    @staticmethod
    def norm_check(args: Namespace) -> RunReport:
        """
        Build a norm from its spec and sample-check the Minkowski axioms
        gosphere norm-check --family alpha12 --dim 7 --blocks 3,4 --f-expr "sqrt(s1+s2)"
        """
        command = "norm-check"
        seed = CONFIG["SEED"] if args.seed is None else args.seed
        try:
            spec = spec_from_args(args)
            if spec is None:
                return RunReport.failure(command, "A norm is required (--norm-file or --family/--f-expr)",
                                         "VALIDATION_ERROR")
            count = args.samples or CONFIG["NORM_SAMPLES"]
            try:
                norm = norm_service.make_family(spec, count, seed)
            except NotStronglyConvexError as e:
                logger.warning("Norm fails strong convexity: %s", e.message)
                return RunReport(command=command, passed=False, exit_code=ExitCode.VERDICT_FAILED, seed=seed,
                                 data={"spec": spec.to_dict(), "strongly_convex": False,
                                       "witness": e.witness.tolist(), "eigen_ratio": e.ratio})

            points = sample_net(spec.dim, count, seed)
            reversible, asymmetry = norm_service.check_reversible(norm, count, seed)
            data = {
                "spec": spec.to_dict(),
                "strongly_convex": True,
                "homogeneity_defect": norm_service.check_homogeneity(norm, points),
                "reversible": reversible,
                "asymmetry": asymmetry,
                "max_cartan": norm_service.max_cartan(norm, min(count, 32), seed),
                "samples": len(points),
            }
            return RunReport(command=command, data=data, passed=True, seed=seed)

        except GosphereError as e:
            logger.warning("norm-check failed: %s", e.message)
            return RunReport.failure(command, e.message, e.code, e.details)
        except Exception as e:
            logger.error("Unexpected error in norm-check: %s", e)
            return RunReport.failure(command, "Internal error", "INTERNAL_ERROR", {"reason": str(e)})
