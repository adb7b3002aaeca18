"""Logging helpers shared across entry points.

Records carry structured fields through ``extra=``; the JSON formatter emits
all of them, the text formatter a fixed, readable subset. NumPy scalars and
arrays in those fields serialise as plain JSON numbers and lists.
"""

from __future__ import annotations

import json
import logging
import time
from collections.abc import Iterator
from contextlib import contextmanager
from datetime import UTC, datetime
from hashlib import sha256
from pathlib import Path
from typing import Any

import numpy as np

DEFAULT_LOG_FORMAT = "json"
LOG_FORMATS = frozenset({"json", "text"})

# Attributes every LogRecord has; anything else arrived through ``extra=``.
_RECORD_ATTRS = frozenset(
    vars(logging.LogRecord("", logging.NOTSET, "", 0, "", None, None))
) | {"message", "asctime", "component"}

_TEXT_FIELDS = (
    "subcommand",
    "path",
    "n_dyads",
    "estimator",
    "bandwidth",
    "rep",
    "reps",
    "workers",
    "duration_ms",
)


def setup_logging(
    *,
    component: str,
    level: str | int | None = None,
    default_level: str = "WARNING",
    log_format: str | None = None,
) -> None:
    """Route root logging to stderr, tagging every record with ``component``."""

    handler = logging.StreamHandler()
    handler.addFilter(_ComponentFilter(component))
    if _normalize_format(log_format) == "text":
        handler.setFormatter(_TextFormatter())
    else:
        handler.setFormatter(_JsonFormatter())

    resolved = _resolve_level(level)
    if resolved is None:
        resolved = _resolve_level(default_level) or logging.WARNING
    logging.basicConfig(level=resolved, handlers=[handler], force=True)


@contextmanager
def log_timing(
    logger: logging.Logger,
    message: str,
    *,
    level: int = logging.INFO,
    **fields: Any,
) -> Iterator[dict[str, Any]]:
    """Log ``message`` with ``duration_ms`` once the block finishes.

    The yielded dict holds ``fields``; entries added inside the block are
    logged too. Nothing is logged when the block raises.
    """
    extra = dict(fields)
    started = time.perf_counter()
    yield extra
    extra["duration_ms"] = round((time.perf_counter() - started) * 1000, 3)
    logger.log(level, message, extra=extra)


def config_fingerprint(payload: Any) -> str:
    """First 16 hex digits of the SHA-256 of ``payload`` as canonical JSON."""

    serialized = json.dumps(payload, sort_keys=True, default=_json_default)
    return sha256(serialized.encode("utf-8")).hexdigest()[:16]


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return value.as_posix()
    return str(value)


class _ComponentFilter(logging.Filter):
    def __init__(self, component: str) -> None:
        super().__init__()
        self.component = component

    def filter(self, record: logging.LogRecord) -> bool:
        record.component = self.component
        return True


class _JsonFormatter(logging.Formatter):
    """One JSON object per line."""

    def format(self, record: logging.LogRecord) -> str:
        payload: dict[str, Any] = {
            "timestamp": datetime.fromtimestamp(record.created, tz=UTC).isoformat(),
            "level": record.levelname,
            "component": getattr(record, "component", record.name),
            "logger": record.name,
            "message": record.getMessage(),
        }
        payload.update(_extra_fields(record))
        if record.exc_info:
            payload["exc_info"] = self.formatException(record.exc_info)
        if record.stack_info:
            payload["stack"] = self.formatStack(record.stack_info)
        return json.dumps(payload, ensure_ascii=False, default=_json_default)


class _TextFormatter(logging.Formatter):
    """``time level component message | key=value ...`` for terminals."""

    def __init__(self) -> None:
        super().__init__(fmt="%(asctime)s %(levelname)s %(component)s %(message)s")

    def format(self, record: logging.LogRecord) -> str:
        if not hasattr(record, "component"):
            record.component = record.name
        base = super().format(record)
        pairs = [
            f"{name}={_text_value(getattr(record, name))}"
            for name in _TEXT_FIELDS
            if getattr(record, name, None) is not None
        ]
        return f"{base} | {' '.join(pairs)}" if pairs else base


def _extra_fields(record: logging.LogRecord) -> dict[str, Any]:
    return {
        key: value
        for key, value in vars(record).items()
        if key not in _RECORD_ATTRS and not key.startswith("_")
    }


def _text_value(value: Any) -> str:
    if isinstance(value, float | np.floating):
        return f"{value:g}"
    return str(value)


def _resolve_level(value: str | int | None) -> int | None:
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        return logging.getLevelNamesMapping().get(value.strip().upper())
    return None


def _normalize_format(value: str | None) -> str:
    normalized = (value or DEFAULT_LOG_FORMAT).strip().lower()
    return normalized if normalized in LOG_FORMATS else DEFAULT_LOG_FORMAT


__all__ = [
    "config_fingerprint",
    "log_timing",
    "setup_logging",
]
