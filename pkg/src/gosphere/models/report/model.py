#!/usr/bin/env python3
"""
Run Report Model
What one command produced: its data, verdict and exit code
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional

from gosphere.utils.response import create_error_report, create_report


class ExitCode:
    PASS = 0
    VERDICT_FAILED = 1
    USAGE_ERROR = 2


@dataclass
class RunReport:
    command: str
    data: Dict[str, Any] = field(default_factory=dict)
    passed: bool = True
    exit_code: int = ExitCode.PASS
    seed: Optional[int] = None
    timings: Optional[Dict[str, float]] = None
    error: Optional[Dict[str, Any]] = None

    @classmethod
    def failure(cls, command: str, message: str, code: str, details: Optional[Dict[str, Any]] = None,
                exit_code: int = ExitCode.USAGE_ERROR) -> "RunReport":
        return cls(command=command, passed=False, exit_code=exit_code,
                   error={"error": message, "code": code, "details": details or {}})

    def to_dict(self) -> Dict[str, Any]:
        if self.error is not None:
            return create_error_report(self.command, self.error["error"], self.error["code"],
                                       self.error.get("details"))
        return create_report(self.command, self.data, self.passed, self.seed, self.timings)
