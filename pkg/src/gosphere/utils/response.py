#!/usr/bin/env python3
"""
Report Helpers
Deterministic JSON reports; numbers only, sorted keys, no timestamps
"""

from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import orjson

from gosphere.config.settings import CONFIG, config_echo

JSON_OPTIONS = orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY


def _default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, (set, frozenset, tuple)):
        return list(value)
    if hasattr(value, "to_dict"):
        return value.to_dict()
    raise TypeError(f"Type is not JSON serializable: {type(value).__name__}")


def create_report(command: str, data: Dict[str, Any], passed: bool, seed: Optional[int] = None,
                  timings: Optional[Dict[str, float]] = None) -> Dict[str, Any]:
    """Create standardized command report"""
    report = {
        "schema": CONFIG["SCHEMA_VERSION"],
        "command": command,
        "success": passed,
        "seed": CONFIG["SEED"] if seed is None else seed,
        "config": config_echo(),
        "data": data,
    }
    if timings is not None:
        report["timings"] = timings
    return report


def create_error_report(command: str, message: str, error_code: Optional[str] = None,
                        details: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Create standardized error report"""
    error_body = {"error": message, "code": error_code or "INTERNAL_ERROR"}
    if details:
        error_body["details"] = details
    return {"schema": CONFIG["SCHEMA_VERSION"], "command": command, "success": False, "error": error_body}


def dumps(report: Dict[str, Any]) -> bytes:
    return orjson.dumps(report, default=_default, option=JSON_OPTIONS)


def loads(payload: bytes) -> Any:
    return orjson.loads(payload)


def write_json(path: str, report: Dict[str, Any]) -> None:
    Path(path).write_bytes(dumps(report) + b"\n")


def read_json(path: str) -> Any:
    return orjson.loads(Path(path).read_bytes())


def render_text(report: Dict[str, Any]) -> str:
    """Human readable rendering of a report for stdout."""
    lines: List[str] = []
    status = "PASS" if report.get("success") else "FAIL"
    lines.append(f"gosphere {report.get('command', '?')}: {status}")
    if "error" in report:
        error = report["error"]
        lines.append(f"  error [{error.get('code')}]: {error.get('error')}")
        return "\n".join(lines)
    _render_mapping(report.get("data", {}), lines, indent=2)
    return "\n".join(lines)


def _render_mapping(data: Dict[str, Any], lines: List[str], indent: int) -> None:
    pad = " " * indent
    for key in sorted(data):
        value = data[key]
        if isinstance(value, dict):
            lines.append(f"{pad}{key}:")
            _render_mapping(value, lines, indent + 2)
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            lines.append(f"{pad}{key}: [{len(value)} records]")
        elif isinstance(value, float):
            lines.append(f"{pad}{key}: {value:.6g}")
        else:
            lines.append(f"{pad}{key}: {value}")
