"""
Logging setup shared by all varstring modules.

Modules do ``logger = get_logger(__name__)`` at import time. The package
logger gets one stream handler; its level comes from the
VARSTRING_LOG_LEVEL environment variable unless configure_logging is called.
"""

import logging
import os
from typing import Optional, Union

ROOT_LOGGER_NAME = "varstring"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
LOG_LEVEL_ENV = "VARSTRING_LOG_LEVEL"

_configured = False


def _resolve_level(level: Union[str, int, None]) -> int:
    if level is None:
        level = os.environ.get(LOG_LEVEL_ENV, "WARNING")
    if isinstance(level, int):
        return level
    resolved = logging.getLevelName(str(level).upper())
    return resolved if isinstance(resolved, int) else logging.WARNING


def configure_logging(level: Union[str, int, None] = None) -> logging.Logger:
    """
    Attach the package handler (once) and set the package log level.

    Args:
        level: Level name or number; None reads VARSTRING_LOG_LEVEL

    Returns:
        The package root logger
    """
    global _configured
    root = logging.getLogger(ROOT_LOGGER_NAME)
    if not _configured:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(handler)
        root.propagate = False
        _configured = True
    root.setLevel(_resolve_level(level))
    return root


def get_logger(name: Optional[str] = None) -> logging.Logger:
    """Return a logger under the varstring hierarchy."""
    if not _configured:
        configure_logging()
    if not name or name == ROOT_LOGGER_NAME:
        return logging.getLogger(ROOT_LOGGER_NAME)
    if not name.startswith(ROOT_LOGGER_NAME + "."):
        name = f"{ROOT_LOGGER_NAME}.{name}"
    return logging.getLogger(name)
