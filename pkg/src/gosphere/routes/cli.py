#!/usr/bin/env python3
"""
Command Routes - Command Line Surface
Maps every subcommand to its controller; reports go to stdout and, with --json, to a file
"""

import argparse
import time
from typing import Callable, List, Optional, Tuple

from gosphere.controllers.algebra.controller import AlgebraController
from gosphere.controllers.curvature.controller import CurvatureController
from gosphere.controllers.gocheck.controller import GOCheckController
from gosphere.controllers.navigation.controller import NavigationController
from gosphere.controllers.norm.controller import NormController
from gosphere.models.norm.model import FamilyTag
from gosphere.models.presentation.model import SpaceName
from gosphere.models.report.model import ExitCode, RunReport
from gosphere.utils.logger import configure_logging, get_logger
from gosphere.utils.response import write_json

logger = get_logger(__name__)

EXPRESSION_HELP = (
    "smooth expression: numbers, + - * / ^, unary minus, sqrt, exp, log and parentheses "
    "(no abs, min or max, so the Hessian of F^2 exists)"
)
FIELD_HELP = "'hopf' (S^3), 'rotation', or ambient components in x1..x(n+1) separated by ';'"


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, help="random seed (default GOSPHERE_SEED)")
    parser.add_argument("--json", dest="json_path", help="also write the JSON report to this path")
    parser.add_argument("--timings", action="store_true", help="record wall-clock timings in the report")
    parser.add_argument("--verbose", "-v", action="store_true", help="log progress at INFO level")


def _norm_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--norm-file", "--norm", dest="norm_file", help="metric spec JSON file")
    parser.add_argument("--family", choices=FamilyTag.values(), help="metric family")
    parser.add_argument("--dim", type=int, help="dimension of the norm")
    parser.add_argument("--blocks", help="block sizes, e.g. 3,4")
    parser.add_argument("--f-expr", dest="f_expr", help=f"family function in s1, s2, s3; {EXPRESSION_HELP}")
    parser.add_argument("--beta", help="covector of the linear term, comma separated")


def _sphere_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--sphere", type=int, help="dimension n of S^n")
    parser.add_argument("--field", help=f"vector field: {FIELD_HELP}; {EXPRESSION_HELP}")
    parser.add_argument("--epsilon", type=float, help="navigation scale eps")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gosphere",
        description="Geodesic-orbit checks and Killing navigation for homogeneous Finsler spheres.",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    spaces = SpaceName.ALL + SpaceName.EXCEPTIONAL

    norm_check = commands.add_parser("norm-check", help="check the Minkowski axioms of a family norm")
    _norm_arguments(norm_check)
    norm_check.add_argument("--samples", type=int, help="sample directions")
    norm_check.set_defaults(handler=NormController.norm_check)

    algebra_build = commands.add_parser("algebra-build", help="build and check a sphere presentation G/H")
    algebra_build.add_argument("--space", choices=spaces, required=True)
    algebra_build.add_argument("--n", type=int, help="rank parameter")
    algebra_build.add_argument("--realization", choices=["real4", "complex2"], help="quaternion realization")
    algebra_build.add_argument("--weak-symmetry", action="store_true", help="search an element reversing a sample")
    algebra_build.add_argument("--archive", help="write the presentation JSON to this path")
    algebra_build.set_defaults(handler=AlgebraController.algebra_build)

    for name, handler, help_text in (
        ("go-check", GOCheckController.go_check, "GO verdict for one presentation and norm"),
        ("classify", GOCheckController.classify, "GO verdict table over presentations"),
    ):
        sub = commands.add_parser(name, help=help_text)
        sub.add_argument("--space", choices=spaces, required=name == "go-check")
        sub.add_argument("--n", type=int, help="rank parameter")
        _norm_arguments(sub)
        sub.add_argument("--samples", type=int, help="sample count (default GOSPHERE_SAMPLES)")
        sub.add_argument("--tol", type=float, help="PASS tolerance on residual4 (default GOSPHERE_GO_TOL)")
        sub.add_argument("--generic", action="store_true",
                         help="random Sp(n)/Sp(n-1) norms without the Sp(n)Sp(1) symmetry")
        sub.set_defaults(handler=handler)
        if name == "go-check":
            sub.add_argument("--certificates", action="store_true", help="include every per-sample certificate")
            sub.add_argument("--full", action="store_true", help="include the full presentation")
            sub.add_argument("--u", help="also report the spray vector at this m-vector")
        else:
            sub.add_argument("--norms", type=int, help="random norms per presentation (default 3)")

    navigate = commands.add_parser("navigate", help="navigation of the round sphere and its Randers image")
    _sphere_arguments(navigate)
    navigate.add_argument("--nav-file", help="navigation data JSON file")
    navigate.add_argument("--samples", type=int, help="sample count (default 200)")
    navigate.add_argument("--csv", help="export the transported geodesic to this CSV path")
    navigate.set_defaults(handler=NavigationController.navigate)

    flag = commands.add_parser("flag", help="flag curvature preservation under Killing navigation")
    _sphere_arguments(flag)
    flag.add_argument("--flags", type=int, help="number of flags (default 50)")
    flag.add_argument("--critical", help="also check a critical point of F(V) at this ambient point")
    flag.set_defaults(handler=CurvatureController.flag)

    tune = commands.add_parser("tune-epsilon", help="recover eps' with prime closed geodesic length target")
    _sphere_arguments(tune)
    tune.add_argument("--target-lambda", type=float, help="target length (default 2 pi)")
    tune.add_argument("--antipodal", action="store_true", help="check the antipodal map at eps' and at eps = 0")
    tune.add_argument("--measure-distance", action="store_true", help="measure d(x, psi(x)) by shooting")
    tune.set_defaults(handler=CurvatureController.tune_epsilon)

    distances = commands.add_parser("distances", help="directed distances, asymmetry and triangle inequality")
    _sphere_arguments(distances)
    distances.add_argument("--directions", type=int, help="shooting directions")
    distances.add_argument("--pairs", type=int, help="random pairs besides the fixed ones (default 1)")
    distances.add_argument("--consistency", action="store_true",
                           help="check reversible K = 1 metrics have vanishing Cartan tensor")
    distances.set_defaults(handler=CurvatureController.distances)

    for sub in commands.choices.values():
        _common(sub)
    return parser


def _parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    return build_parser().parse_args(argv)


def run_command(argv: Optional[List[str]] = None) -> Tuple[RunReport, int]:
    """Parse argv, run the command and write the optional JSON report."""
    try:
        args = _parse_args(argv)
    except SystemExit as e:
        if e.code in (0, None):
            raise
        return RunReport.failure("usage", "Invalid command line", "USAGE_ERROR"), ExitCode.USAGE_ERROR

    configure_logging("INFO" if args.verbose else None)
    handler: Callable[[argparse.Namespace], RunReport] = args.handler
    started = time.perf_counter()
    report = handler(args)
    if args.timings and report.error is None:
        report.timings = {"total_seconds": time.perf_counter() - started}
    logger.info("%s finished with exit code %d", args.command, report.exit_code)

    if args.json_path:
        try:
            write_json(args.json_path, report.to_dict())
        except OSError as e:
            logger.error("Cannot write report to %s: %s", args.json_path, e)
            return RunReport.failure(args.command, f"Cannot write {args.json_path}", "IO_ERROR"), \
                ExitCode.USAGE_ERROR
    return report, report.exit_code

