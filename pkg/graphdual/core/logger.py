# graphdual/core/logger.py
from __future__ import annotations
import logging
import sys
from fractions import Fraction
from typing import Any

import numpy as np
import structlog
from structlog.typing import EventDict, WrappedLogger

from graphdual.core.settings import settings


def _plain(value: Any) -> Any:
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def plain_values(_: WrappedLogger, __: str, event_dict: EventDict) -> EventDict:
    """Render exact rationals as ``p/q`` and numpy values as Python ones."""
    return {k: v if k == "exc_info" else _plain(v) for k, v in event_dict.items()}


def bind_seed(entropy: int) -> None:
    # every later line of the run carries the entropy needed to replay it
    structlog.contextvars.bind_contextvars(seed=entropy)


def setup_logging(level_name: str | None = None) -> None:
    level = getattr(logging, (level_name or settings.LOG_LEVEL).upper(), logging.INFO)

    # stderr keeps stdout free for reports
    logging.basicConfig(level=level, format="%(message)s", stream=sys.stderr)

    processors = [
        structlog.contextvars.merge_contextvars,
        structlog.processors.add_log_level,
        structlog.processors.TimeStamper(fmt="iso", utc=True),
        plain_values,
    ]
    console = settings.LOG_FORMAT == "console" or (settings.LOG_FORMAT == "auto" and settings.DEV_MODE)
    if console:
        processors.append(structlog.processors.ExceptionRenderer())
        processors.append(structlog.processors.KeyValueRenderer(sort_keys=True, key_order=["event", "command"]))
    else:
        processors.append(structlog.processors.dict_tracebacks)
        processors.append(structlog.processors.JSONRenderer())

    structlog.configure(
        processors=processors,
        wrapper_class=structlog.make_filtering_bound_logger(level),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=True,
    )
