from __future__ import annotations

import logging
import sys
from typing import TextIO

import structlog

LEVELS = ('debug', 'info', 'warning', 'error')


def configure_logging(level: str = 'warning', stream: TextIO | None = None) -> None:
    """
    Route structlog events at or above ``level`` to ``stream`` (stderr by default)
    as key-value lines. Only applications call this; library modules just
    ``structlog.get_logger(__name__)``.
    """
    structlog.configure(
        processors=[
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt='iso'),
            structlog.processors.KeyValueRenderer(
                key_order=['timestamp', 'level', 'event'], sort_keys=True
            ),
        ],
        wrapper_class=structlog.make_filtering_bound_logger(
            logging.getLevelName(level.upper())
        ),
        logger_factory=structlog.PrintLoggerFactory(file=stream or sys.stderr),
        cache_logger_on_first_use=False,
    )
