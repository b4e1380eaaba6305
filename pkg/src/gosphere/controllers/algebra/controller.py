#!/usr/bin/env python3
"""
Algebra Controller
Handles: algebra-build (structure constants, reductive split and archive of a sphere presentation)
"""

from argparse import Namespace

import numpy as np

from gosphere.config.settings import CONFIG
from gosphere.models.presentation.model import SpaceName
from gosphere.models.report.model import ExitCode, RunReport
from gosphere.services.liealg.service import LieAlgService
from gosphere.utils.errors import GosphereError
from gosphere.utils.logger import get_logger
from gosphere.utils.response import write_json
from gosphere.utils.sampling import make_rng
from gosphere.utils.validation import InputValidator

logger = get_logger(__name__)
liealg_service = LieAlgService()

SYMPLECTIC = (SpaceName.SP, SpaceName.SP_U1, SpaceName.SP_SP1)


class AlgebraController:
    """Presentation building and structural checks"""

    @staticmethod
    def algebra_build(args: Namespace) -> RunReport:
        """
        Build G/H, check every structural identity and optionally archive the presentation
        gosphere algebra-build --space sp_u1 --n 2 --archive sp_u1.json
        """
        command = "algebra-build"
        seed = CONFIG["SEED"] if args.seed is None else args.seed
        try:
            validator = InputValidator()
            validator.require("space", args.space, "space is required (--space)")
            validator.validate_positive_int("n", args.n)
            validator.raise_if_invalid()

            realization = args.realization or "real4"
            n = args.n or SpaceName.MIN_RANK.get(args.space, 2)
            presentation = liealg_service.build_presentation(args.space, n, realization)
            passed, defects = liealg_service.check_presentation(presentation)
            data = {
                "presentation": presentation.display_name,
                "dim_g": presentation.decomposition.algebra.dim,
                "dim_h": presentation.decomposition.h_dim,
                "dim_m": presentation.m_dim,
                "m_blocks": [list(block) for block in presentation.m_blocks],
                "realization": realization,
                "trace_scale": presentation.decomposition.algebra.trace_scale,
                "defects": defects,
                "expected_go_verdict": presentation.expected_go_verdict,
            }
            if presentation.name in SYMPLECTIC:
                data["realization_agreement"] = liealg_service.realization_agreement(presentation.name, presentation.n)
            if args.weak_symmetry:
                u = make_rng(seed).normal(size=presentation.m_dim)
                data["weak_symmetry"] = liealg_service.check_weakly_symmetric(presentation, u / np.linalg.norm(u),
                                                                              seed=seed).to_dict()
            if args.archive:
                write_json(args.archive, presentation.to_dict())
                data["archive"] = args.archive
                logger.info("Archived %s to %s", presentation.display_name, args.archive)

            return RunReport(command=command, data=data, passed=passed, seed=seed,
                             exit_code=ExitCode.PASS if passed else ExitCode.VERDICT_FAILED)

        except GosphereError as e:
            logger.warning("algebra-build failed: %s", e.message)
            return RunReport.failure(command, e.message, e.code, e.details)
        except Exception as e:
            logger.error("Unexpected error in algebra-build: %s", e)
            return RunReport.failure(command, "Internal error", "INTERNAL_ERROR", {"reason": str(e)})
