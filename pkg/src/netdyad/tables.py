"""Tabular rendering of results: CSV (full precision) or aligned text (4 decimals).

``to_frame`` turns any result record into a :class:`pandas.DataFrame`;
``emit_table`` renders it and optionally writes it to disk.
"""

from __future__ import annotations

import json
import logging
import math
from collections.abc import Sequence
from dataclasses import asdict
from functools import singledispatch
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from .constants import OUTPUT_FORMATS, SPEC_ALIASES, TEXT_FLOAT_FORMAT
from .errors import NetdyadError
from .observability import config_fingerprint
from .types import DensenessReport, EstimateReport, GraphStats, McTable
from .variance import normal_critical_value, standard_errors

logger = logging.getLogger(__name__)

MC_COLUMNS = ("estimator", "coverage", "avg_length", "mean_se", "bias_pct")
DRAW_COLUMNS = (
    "rep",
    "estimator",
    "beta_hat",
    "se",
    "ci_length",
    "covered",
    "psd_repaired",
)
_SPEC_NAMES = {kind: alias for alias, kind in SPEC_ALIASES.items()}


@singledispatch
def to_frame(result: Any) -> pd.DataFrame:
    raise NetdyadError(f"cannot tabulate a {type(result).__name__}")


@to_frame.register
def _(result: pd.DataFrame) -> pd.DataFrame:
    return result


@to_frame.register
def _(result: McTable) -> pd.DataFrame:
    rows = [
        {name: getattr(summary, name) for name in MC_COLUMNS}
        for summary in result.summaries
    ]
    return pd.DataFrame(rows, columns=list(MC_COLUMNS))


@to_frame.register
def _(result: EstimateReport) -> pd.DataFrame:
    """Long layout: one ``(term, statistic, value)`` row per reported number."""
    fit = result.fit
    critical = normal_critical_value(result.level)
    rows: list[tuple[str, str, float]] = []
    errors = {estimate.kind: standard_errors(estimate) for estimate in result.estimates}
    for k, term in enumerate(fit.data.column_names):
        beta = float(fit.beta_hat[k])
        rows.append((term, "estimate", beta))
        for kind, se in errors.items():
            rows.append((term, f"se_{kind}", float(se[k])))
        for kind, se in errors.items():
            rows.append((term, f"ci_low_{kind}", beta - critical * float(se[k])))
            rows.append((term, f"ci_high_{kind}", beta + critical * float(se[k])))
    return pd.DataFrame(rows, columns=["term", "statistic", "value"])


@to_frame.register
def _(result: DensenessReport) -> pd.DataFrame:
    n_rows = max(len(result.shell_density), len(result.delta))
    return pd.DataFrame(
        {
            "s": np.arange(n_rows),
            "shell_density": _pad(result.shell_density, n_rows),
            "delta": _pad(result.delta, n_rows),
            "composite": _pad(result.composite, n_rows),
        }
    )


@to_frame.register
def _(result: GraphStats) -> pd.DataFrame:
    row = asdict(result)
    row["kind"] = _SPEC_NAMES.get(result.kind, result.kind)
    order = [
        "kind",
        "param",
        "n_nodes",
        "draws",
        "node_d_max",
        "node_d_ave",
        "d_act",
        "dyad_d_max",
        "dyad_d_ave",
    ]
    return pd.DataFrame([row], columns=order)


@to_frame.register(list)
@to_frame.register(tuple)
def _(result: Sequence[Any]) -> pd.DataFrame:
    if not result:
        raise NetdyadError("nothing to tabulate")
    if all(isinstance(item, McTable) for item in result):
        return grid_frame(result)
    return pd.concat([to_frame(item) for item in result], ignore_index=True)


def grid_frame(tables: Sequence[McTable]) -> pd.DataFrame:
    """Stack several Monte Carlo tables with ``spec,param,n_nodes`` cell columns."""
    frames = []
    for table in tables:
        frame = to_frame(table)
        _insert_cell_columns(frame, table)
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)


def draws_frame(table: McTable, *, cell: bool = False) -> pd.DataFrame:
    """Per-replication estimator records, one row per (rep, estimator).

    With ``cell=True`` the ``spec,param,n_nodes`` columns of the study lead.
    """
    rows = [
        (
            result.rep_index,
            record.estimator,
            record.beta_hat,
            record.se,
            record.ci_length,
            int(record.covered),
            int(record.psd_repaired),
        )
        for result in table.replications
        for record in result.records
    ]
    frame = pd.DataFrame(rows, columns=list(DRAW_COLUMNS))
    if cell:
        _insert_cell_columns(frame, table)
    return frame


def render_table(result: Any, fmt: str = "csv") -> str:
    """Render ``result`` as CSV text or as an aligned text table."""
    if fmt not in OUTPUT_FORMATS:
        raise NetdyadError(
            f"unknown output format {fmt!r}; expected one of {', '.join(OUTPUT_FORMATS)}"
        )
    frame = to_frame(result)
    if fmt == "csv":
        return frame.to_csv(index=False, lineterminator="\n")
    lines = _text_preamble(result)
    body = frame.to_string(index=False, float_format=TEXT_FLOAT_FORMAT.format, na_rep="")
    return "\n".join([*lines, body]) + "\n"


def emit_table(result: Any, fmt: str = "csv", path: str | Path | None = None) -> str:
    """Render ``result`` and write it to ``path`` when given.

    Returns the rendered text so callers can print it when no path is set.
    """
    rendered = render_table(result, fmt)
    if path is not None:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(rendered, encoding="utf-8", newline="\n")
        logger.info("Wrote table to %s", target, extra={"path": str(target)})
    return rendered


def write_manifest(path: str | Path, tables: Sequence[McTable]) -> None:
    """Write the JSON manifest echoing every study's config and diagnostics."""
    studies = []
    for table in tables:
        config = asdict(table.config)
        studies.append(
            {
                "config": config,
                "fingerprint": config_fingerprint(config),
                "n_replications": table.n_replications,
                "empirical_se": _json_float(table.empirical_se),
                "failed_attempts": table.failed_attempts,
                "psd_repairs": {
                    summary.estimator: summary.psd_repairs
                    for summary in table.summaries
                },
            }
        )
    data = {"studies": studies}
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(data, indent=2), encoding="utf-8")
    logger.info("Wrote manifest to %s", target)


def _text_preamble(result: Any) -> list[str]:
    if isinstance(result, McTable):
        cfg = result.config
        repairs = ", ".join(
            f"{summary.estimator}={summary.psd_repairs}" for summary in result.summaries
        )
        return [
            f"spec: {_SPEC_NAMES.get(cfg.graph_kind, cfg.graph_kind)}  "
            f"param: {cfg.graph_param:g}  N: {cfg.n_nodes}  S: {cfg.spillover_radius}  "
            f"gamma: {cfg.gamma:g}  reps: {result.n_replications}",
            f"empirical SE: {_fmt(result.empirical_se)}  PSD repairs: {repairs}  "
            f"failed attempts: {result.failed_attempts}",
            "",
        ]
    if isinstance(result, EstimateReport):
        fit = result.fit
        lines = [
            f"dyads: {fit.data.n_rows}  regressors: {fit.data.n_regressors}  "
            f"level: {result.level:g}",
        ]
        if result.fixed_effects:
            lines.append(f"fixed effects: within-demeaned over {result.n_groups} groups")
        for estimate in result.estimates:
            detail = f"  {estimate.kind}"
            if estimate.kind == "network":
                detail += f" (kernel={estimate.kernel}, bandwidth={_fmt(estimate.bandwidth)})"
            if estimate.psd_repaired:
                detail += f" PSD-repaired (epsilon={estimate.psd_epsilon:g})"
            lines.append(detail)
        lines.append("")
        return lines
    if isinstance(result, DensenessReport):
        return [
            f"dyads: {result.n_dyads}  bandwidth: {_fmt(result.bandwidth)}  "
            f"radius: {result.radius}  diameter: {result.diameter}",
            f"sum_s shell density: {_fmt(result.shell_density_sum)}",
            f"(1/M) sum_s composite: {_fmt(result.composite_mean_sum)}",
            f"note: {result.empty_shell_convention}",
            "",
        ]
    return []


def _insert_cell_columns(frame: pd.DataFrame, table: McTable) -> None:
    cfg = table.config
    frame.insert(0, "n_nodes", cfg.n_nodes)
    frame.insert(0, "param", float(cfg.graph_param))
    frame.insert(0, "spec", _SPEC_NAMES.get(cfg.graph_kind, cfg.graph_kind))


def _pad(values: Sequence[float], n_rows: int) -> np.ndarray:
    padded = np.full(n_rows, np.nan)
    padded[: len(values)] = values
    return padded


def _fmt(value: float | None) -> str:
    if value is None or not math.isfinite(value):
        return "nan"
    return TEXT_FLOAT_FORMAT.format(value)


def _json_float(value: float) -> float | None:
    return value if math.isfinite(value) else None


__all__ = [
    "draws_frame",
    "emit_table",
    "grid_frame",
    "render_table",
    "to_frame",
    "write_manifest",
]
