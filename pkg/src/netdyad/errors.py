"""Exception hierarchy for netdyad.

Every domain error is a :class:`ValueError` so callers that only care about
"bad input" can keep catching the builtin.
"""

from __future__ import annotations

from pathlib import Path


class NetdyadError(ValueError):
    """Base class for all netdyad validation and estimation errors."""


class GraphValidationError(NetdyadError):
    """Raised when a node graph has self-loops, duplicates or bad node ids."""

    def __init__(self, message: str, *, pair: tuple[int, int] | None = None) -> None:
        super().__init__(message)
        self.pair = pair


class DataFormatError(NetdyadError):
    """Raised for malformed input files; carries file/line context."""

    def __init__(
        self,
        message: str,
        *,
        path: str | Path | None = None,
        line: int | None = None,
    ) -> None:
        self.path = str(path) if path is not None else None
        self.line = line
        self.detail = message
        super().__init__(self._render())

    def _render(self) -> str:
        if self.path is None:
            return self.detail
        if self.line is None:
            return f"{self.path}: {self.detail}"
        return f"{self.path}:{self.line}: {self.detail}"


class RankDeficiencyError(NetdyadError):
    """Raised when the design matrix is (numerically) rank deficient."""

    def __init__(self, smallest_singular_value: float, condition_number: float) -> None:
        self.smallest_singular_value = smallest_singular_value
        self.condition_number = condition_number
        super().__init__(
            "design matrix is rank deficient (no multicollinearity allowed): "
            f"smallest singular value {smallest_singular_value:.3e}, "
            f"condition number of X'X {condition_number:.3e}"
        )


class NotPositiveSemidefiniteError(NetdyadError):
    """Raised when a confidence interval is requested from a negative variance."""


__all__ = [
    "DataFormatError",
    "GraphValidationError",
    "NetdyadError",
    "NotPositiveSemidefiniteError",
    "RankDeficiencyError",
]
