import logging
import logging.config
from pathlib import Path
from typing import Any

import numpy as np
import structlog

from app.settings import settings

LOG_FILE = "walkscope.json"


def plain_values(_, __, event_dict: dict[str, Any]) -> dict[str, Any]:
    """numpy scalars and small arrays arrive through extra={}; make them JSON values."""
    for key, value in event_dict.items():
        if isinstance(value, np.generic):
            event_dict[key] = value.item()
        elif isinstance(value, np.ndarray) and value.size <= 32:
            event_dict[key] = value.tolist()
    return event_dict


SHARED_PROCESSORS = [
    structlog.contextvars.merge_contextvars,
    structlog.stdlib.add_logger_name,
    structlog.stdlib.add_log_level,
    structlog.stdlib.ExtraAdder(),
    plain_values,
    structlog.processors.TimeStamper(fmt="iso"),
    structlog.processors.StackInfoRenderer(),
    structlog.processors.format_exc_info,
]


def _handlers(log_level: str, json_format: bool, log_dir: str | None) -> dict[str, dict]:
    # stdout is reserved for command results (estimate JSON, manifest digest)
    handlers = {
        "console": {
            "level": log_level,
            "class": "logging.StreamHandler",
            "stream": "ext://sys.stderr",
            "formatter": "json" if json_format else "colored",
        },
    }
    if log_dir:
        path = Path(log_dir)
        path.mkdir(parents=True, exist_ok=True)
        handlers["file"] = {
            "level": log_level,
            "class": "logging.handlers.RotatingFileHandler",
            "filename": str(path / LOG_FILE),
            "mode": "a",
            "maxBytes": 10 * 1024 * 1024,  # 10MB
            "backupCount": 5,
            "formatter": "json",
            "encoding": "utf-8",
        }
    return handlers


def configure_logging(level: str | None = None, log_dir: str | None = None):
    """
    Route the stdlib logging tree through structlog's ProcessorFormatter.

    Console output is human readable unless LOG_JSON_FORMAT is set. The
    rotating file under LOG_DIR always receives JSON lines, with contextvars
    bound by the runner (graph_id, method, trial) on every record. An empty
    LOG_DIR disables the file.
    """
    log_level = (level or settings.LOG_LEVEL).upper()
    handlers = _handlers(
        log_level,
        settings.LOG_JSON_FORMAT,
        settings.LOG_DIR if log_dir is None else log_dir,
    )

    logging.config.dictConfig(
        {
            "version": 1,
            "disable_existing_loggers": False,
            "formatters": {
                "json": {
                    "()": structlog.stdlib.ProcessorFormatter,
                    "processor": structlog.processors.JSONRenderer(),
                    "foreign_pre_chain": SHARED_PROCESSORS,
                },
                "colored": {
                    "()": structlog.stdlib.ProcessorFormatter,
                    "processor": structlog.dev.ConsoleRenderer(colors=True),
                    "foreign_pre_chain": SHARED_PROCESSORS,
                },
            },
            "handlers": handlers,
            "loggers": {
                "": {
                    "handlers": list(handlers),
                    "level": log_level,
                    "propagate": True,
                },
                # SNAP downloads log per chunk at DEBUG
                "httpcore": {"level": "WARNING"},
                "httpx": {"level": "WARNING"},
            },
        }
    )

    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            *SHARED_PROCESSORS,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.stdlib.ProcessorFormatter.wrap_for_formatter,
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )
