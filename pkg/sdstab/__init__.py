"""Sampled-data feedback stabilizer synthesis and certification."""

from __future__ import annotations

import logging
import os
from typing import Optional

__version__ = "0.3.0"

LOG_LEVEL_ENV = "SDSTAB_LOG_LEVEL"

_handler: Optional[logging.Handler] = None


def configure_logging(level: Optional[str] = None) -> logging.Logger:
    """Attach a single stream handler to the package logger."""

    global _handler

    log_level_name = (level or os.getenv(LOG_LEVEL_ENV, "INFO")).upper()
    log_level = getattr(logging, log_level_name, None)
    if not isinstance(log_level, int):
        log_level = logging.INFO

    package_logger = logging.getLogger(__name__)
    if _handler is None:
        _handler = logging.StreamHandler()
        _handler.setFormatter(
            logging.Formatter(
                "%(asctime)s [%(levelname)s] %(name)s: %(message)s",
                "%Y-%m-%d %H:%M:%S",
            )
        )
        package_logger.addHandler(_handler)

    package_logger.setLevel(log_level)
    return package_logger


__all__ = ["configure_logging", "__version__"]
