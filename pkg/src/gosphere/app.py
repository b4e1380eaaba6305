#!/usr/bin/env python3
"""
gosphere - Command Line Entry Point
Validates the environment, runs one command and prints its report
"""

import sys
from typing import List, Optional

from gosphere.config.settings import validate_environment
from gosphere.models.report.model import ExitCode
from gosphere.routes.cli import run_command
from gosphere.utils.logger import get_logger
from gosphere.utils.response import render_text

logger = get_logger(__name__)


def main(argv: Optional[List[str]] = None) -> int:
    try:
        validate_environment()
    except ValueError as e:
        logger.error("Environment validation failed: %s", e)
        print(f"gosphere: {e}", file=sys.stderr)
        return ExitCode.USAGE_ERROR

    report, code = run_command(argv)
    print(render_text(report.to_dict()))
    return code


if __name__ == "__main__":
    sys.exit(main())
