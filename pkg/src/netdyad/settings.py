"""Centralized settings management for netdyad surfaces.

These settings are shared by the CLI, the Monte Carlo harness and the
estimators. They lean on :mod:`pydantic_settings` so `.env` files and
environment variables stay in sync across entry points.
"""

from __future__ import annotations

import logging
import os
from functools import lru_cache
from typing import Any

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .constants import (
    DEFAULT_BA_SEED_LAMBDA,
    DEFAULT_CONDITION_LIMIT,
    DEFAULT_PSD_EPSILON,
    DEFAULT_SHELL_BLOCK_SIZE,
)

logger = logging.getLogger(__name__)

WORKERS_ENV = "NETDYAD_WORKERS"
LOG_LEVEL_ENV = "NETDYAD_LOG_LEVEL"
LOG_FORMAT_ENV = "NETDYAD_LOG_FORMAT"
CONDITION_LIMIT_ENV = "NETDYAD_CONDITION_LIMIT"
PSD_EPSILON_ENV = "NETDYAD_PSD_EPSILON"
SHELL_BLOCK_SIZE_ENV = "NETDYAD_SHELL_BLOCK_SIZE"
BA_SEED_LAMBDA_ENV = "NETDYAD_BA_SEED_LAMBDA"
VALID_LOG_FORMATS = {"json", "text"}


class NetdyadSettings(BaseSettings):
    """Typed configuration shared by the CLI and library entry points."""

    workers: int | None = Field(default=None)
    log_level: str | None = Field(default=None)
    log_format: str | None = Field(default=None)
    condition_limit: float = Field(default=DEFAULT_CONDITION_LIMIT, gt=1.0)
    psd_epsilon: float = Field(default=DEFAULT_PSD_EPSILON, ge=0.0)
    shell_block_size: int = Field(default=DEFAULT_SHELL_BLOCK_SIZE, ge=1)
    ba_seed_lambda: float = Field(default=DEFAULT_BA_SEED_LAMBDA, gt=0.0)

    model_config = SettingsConfigDict(
        env_prefix="NETDYAD_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
        case_sensitive=False,
    )

    @field_validator("workers", mode="before")
    @classmethod
    def _coerce_workers(cls, value: Any):
        return _coerce_positive_int(value, WORKERS_ENV, fallback=None)

    @field_validator("log_level", mode="before")
    @classmethod
    def _coerce_log_level(cls, value: Any):
        return _coerce_log_level(value)

    @field_validator("log_format", mode="before")
    @classmethod
    def _coerce_log_format(cls, value: Any):
        return _coerce_log_format(value)

    @field_validator("condition_limit", mode="before")
    @classmethod
    def _coerce_condition_limit(cls, value: Any):
        result = _coerce_positive_float(
            value, CONDITION_LIMIT_ENV, fallback=DEFAULT_CONDITION_LIMIT
        )
        if result <= 1.0:
            logger.warning(
                "Invalid %s=%s, falling back to %s",
                CONDITION_LIMIT_ENV,
                value,
                DEFAULT_CONDITION_LIMIT,
            )
            return DEFAULT_CONDITION_LIMIT
        return result

    @field_validator("psd_epsilon", mode="before")
    @classmethod
    def _coerce_psd_epsilon(cls, value: Any):
        return _coerce_non_negative_float(
            value, PSD_EPSILON_ENV, fallback=DEFAULT_PSD_EPSILON
        )

    @field_validator("shell_block_size", mode="before")
    @classmethod
    def _coerce_shell_block_size(cls, value: Any):
        return _coerce_positive_int(
            value, SHELL_BLOCK_SIZE_ENV, fallback=DEFAULT_SHELL_BLOCK_SIZE
        )

    @field_validator("ba_seed_lambda", mode="before")
    @classmethod
    def _coerce_ba_seed_lambda(cls, value: Any):
        return _coerce_positive_float(
            value, BA_SEED_LAMBDA_ENV, fallback=DEFAULT_BA_SEED_LAMBDA
        )

    def determine_worker_count(self, requested: int | None = None) -> int:
        """Explicit request, then ``NETDYAD_WORKERS``, then the CPU count."""
        if requested is not None and requested >= 1:
            return requested
        return self.workers or (os.cpu_count() or 1)


def _coerce_positive_int(
    value: Any, env_name: str, *, fallback: int | None
) -> int | None:
    if value in (None, ""):
        return fallback
    try:
        parsed = int(value)
    except (TypeError, ValueError):
        logger.warning(
            "Invalid %s=%s, falling back to %s",
            env_name,
            value,
            _format_fallback(fallback),
        )
        return fallback
    if parsed <= 0:
        logger.warning(
            "Invalid %s=%s, falling back to %s",
            env_name,
            value,
            _format_fallback(fallback),
        )
        return fallback
    return parsed


def _coerce_positive_float(value: Any, env_name: str, *, fallback: float) -> float:
    parsed = _coerce_non_negative_float(value, env_name, fallback=fallback)
    if parsed == 0:
        logger.warning("Invalid %s=%s, falling back to %s", env_name, value, fallback)
        return fallback
    return parsed


def _coerce_non_negative_float(value: Any, env_name: str, *, fallback: float) -> float:
    if value in (None, ""):
        return fallback
    try:
        parsed = float(value)
    except (TypeError, ValueError):
        logger.warning(
            "Invalid %s=%s, falling back to %s",
            env_name,
            value,
            fallback,
        )
        return fallback
    if parsed < 0 or parsed != parsed:
        logger.warning(
            "Invalid %s=%s, falling back to %s",
            env_name,
            value,
            fallback,
        )
        return fallback
    return parsed


def _format_fallback(value: int | None) -> str | int:
    return value if value is not None else "auto"


def _coerce_log_level(value: Any) -> str | None:
    if value in (None, ""):
        return None
    if isinstance(value, str):
        normalized = value.strip().upper()
        if normalized in logging.getLevelNamesMapping():
            return normalized
    logger.warning(
        "Invalid %s=%s, falling back to None",
        LOG_LEVEL_ENV,
        value,
    )
    return None


def _coerce_log_format(value: Any) -> str | None:
    if value in (None, ""):
        return None
    if isinstance(value, str):
        normalized = value.strip().lower()
        if normalized in VALID_LOG_FORMATS:
            return normalized
    logger.warning(
        "Invalid %s=%s, falling back to auto",
        LOG_FORMAT_ENV,
        value,
    )
    return None


_SETTINGS_OVERRIDE: dict[str, Any] | None = None


@lru_cache(maxsize=1)
def _load_settings() -> NetdyadSettings:
    if _SETTINGS_OVERRIDE is not None:
        return NetdyadSettings(**_SETTINGS_OVERRIDE)
    return NetdyadSettings()


def get_settings() -> NetdyadSettings:
    """Return the cached :class:`NetdyadSettings` instance."""

    return _load_settings()


def reload_settings(**overrides: Any) -> NetdyadSettings:
    """Clear the cached settings and rebuild them.

    Args:
        overrides: Optional keyword overrides useful for tests.
    """

    global _SETTINGS_OVERRIDE
    _load_settings.cache_clear()
    _SETTINGS_OVERRIDE = overrides or None
    return _load_settings()


__all__ = [
    "NetdyadSettings",
    "get_settings",
    "reload_settings",
]
