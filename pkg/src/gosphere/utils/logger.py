#!/usr/bin/env python3
"""
Logging Setup
structlog on top of stdlib logging; all output goes to stderr
"""

import logging
import os
import re
import sys
from typing import Any, Dict, Optional

import structlog

from gosphere.config.settings import CONFIG

SENSITIVE_KEYS = ["password", "token", "secret", "key", "auth", "credential"]

_configured = False


def _sanitize(logger: Any, method_name: str, event_dict: Dict[str, Any]) -> Dict[str, Any]:
    """Redact secret-looking fields and home-directory paths."""
    home = os.path.expanduser("~")
    for field, value in list(event_dict.items()):
        if any(key in field.lower() for key in SENSITIVE_KEYS):
            event_dict[field] = "[REDACTED]"
        elif isinstance(value, str) and home not in ("", "/") and home in value:
            event_dict[field] = value.replace(home, "~")
    event = event_dict.get("event")
    if isinstance(event, str):
        for key in SENSITIVE_KEYS:
            event = re.sub(rf"({key}[\s=:]+)[^\s,}}]+", r"\1[REDACTED]", event, flags=re.IGNORECASE)
        event_dict["event"] = event
    return event_dict


def configure_logging(level: Optional[str] = None, fmt: Optional[str] = None) -> None:
    """Configure structlog and the stdlib root handler. Safe to call again to change the level."""
    global _configured
    level_name = (level or CONFIG["LOG_LEVEL"]).upper()
    renderer_name = (fmt or CONFIG["LOG_FORMAT"]).lower()

    root = logging.getLogger()
    if not _configured:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("%(message)s"))
        root.addHandler(handler)
    root.setLevel(getattr(logging, level_name, logging.WARNING))

    renderer = (
        structlog.processors.JSONRenderer()
        if renderer_name == "json"
        else structlog.dev.ConsoleRenderer(colors=False)
    )
    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            _sanitize,
            renderer,
        ],
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=False,
    )
    _configured = True


def get_logger(name: str) -> structlog.stdlib.BoundLogger:
    """Module logger; configures logging lazily on first use."""
    if not _configured:
        configure_logging()
    return structlog.get_logger(name)
