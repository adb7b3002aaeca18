"""CSV ingestion and export for edge lists and dyadic regression data.

Edge list: header ``i,j``, one undirected edge per row, 0-based node ids.
Dyadic data: header ``dyad_id,i,j,y,<covariates...>[,group]``; each row's
``(i, j)`` must be an edge of the accompanying edge list. Rows are realigned
to the dyad index order on load.

Every error names the file and the 1-based line (the header is line 1).
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import pandas as pd

from .dyad_graph import DyadIndex
from .errors import DataFormatError
from .regression import add_intercept
from .types import NodeGraph, RegressionData

logger = logging.getLogger(__name__)

EDGE_COLUMNS = ("i", "j")
DYADIC_KEY_COLUMNS = ("dyad_id", "i", "j", "y")
GROUP_COLUMN = "group"
_INTEGER_PATTERN = r"\s*\d+\s*"


def parse_edge_csv(path: str | Path, *, n_nodes: int | None = None) -> NodeGraph:
    """Read an edge list into a validated :class:`NodeGraph`.

    ``n_nodes`` defaults to ``max node id + 1``; pass it to keep trailing
    isolated nodes.
    """
    frame = _read_frame(path)
    columns = tuple(frame.columns)
    if columns != EDGE_COLUMNS:
        raise DataFormatError(
            f"expected header 'i,j', got {','.join(columns)!r}", path=path, line=1
        )
    i = _integer_column(frame, "i", path)
    j = _integer_column(frame, "j", path)

    loops = np.flatnonzero(i == j)
    if loops.size:
        row = int(loops[0])
        raise DataFormatError(f"self-loop on node {i[row]}", path=path, line=row + 2)
    low, high = np.minimum(i, j), np.maximum(i, j)
    keys = pd.DataFrame({"low": low, "high": high})
    duplicated = np.flatnonzero(keys.duplicated(keep="first").to_numpy())
    if duplicated.size:
        row = int(duplicated[0])
        first = int(
            np.flatnonzero((low == low[row]) & (high == high[row]))[0]
        )
        raise DataFormatError(
            f"duplicate edge ({i[row]}, {j[row]}); first listed on line {first + 2}",
            path=path,
            line=row + 2,
        )

    largest = int(max(i.max(initial=-1), j.max(initial=-1)))
    total = largest + 1 if n_nodes is None else n_nodes
    if total <= largest:
        raise DataFormatError(
            f"node id {largest} outside [0, {total})", path=path
        )
    logger.debug(
        "Parsed edge list", extra={"path": str(path), "n_edges": int(i.size)}
    )
    return NodeGraph(
        n_nodes=total,
        edges=tuple((int(a), int(b)) for a, b in zip(i, j, strict=True)),
    )


def parse_dyadic_csv(
    path: str | Path,
    idx: DyadIndex,
    *,
    intercept: bool = True,
) -> RegressionData:
    """Read dyadic regression data aligned to ``idx``.

    Covariate columns keep their header names. A trailing ``group`` column
    becomes ``group_ids``. With ``intercept=True`` a column of ones named
    ``intercept`` is prepended.

    Raises:
        DataFormatError: on a bad header, an unknown or repeated dyad, a
            missing or non-numeric cell, or a row count different from the
            number of dyads.
    """
    frame = _read_frame(path)
    columns = tuple(frame.columns)
    if columns[:4] != DYADIC_KEY_COLUMNS:
        raise DataFormatError(
            "header must start with 'dyad_id,i,j,y', got "
            f"{','.join(columns[:4])!r}",
            path=path,
            line=1,
        )
    has_group = columns[-1] == GROUP_COLUMN
    covariates = columns[4:-1] if has_group else columns[4:]
    if not covariates:
        raise DataFormatError("no covariate columns after 'y'", path=path, line=1)
    if len(set(columns)) != len(columns):
        raise DataFormatError("header repeats a column name", path=path, line=1)

    _integer_column(frame, "dyad_id", path)
    i = _integer_column(frame, "i", path)
    j = _integer_column(frame, "j", path)
    dyad_ids = np.empty(len(frame), dtype=np.int64)
    for row, (a, b) in enumerate(zip(i, j, strict=True)):
        key = (int(a), int(b))
        if key not in idx:
            raise DataFormatError(
                f"unknown dyad ({a}, {b}): not an edge of the edge list",
                path=path,
                line=row + 2,
            )
        dyad_ids[row] = idx.dyad_id(*key)
    duplicated = np.flatnonzero(pd.Series(dyad_ids).duplicated().to_numpy())
    if duplicated.size:
        row = int(duplicated[0])
        raise DataFormatError(
            f"dyad ({i[row]}, {j[row]}) appears more than once",
            path=path,
            line=row + 2,
        )
    if len(frame) != idx.n_dyads:
        raise DataFormatError(
            f"row-count mismatch: {len(frame)} data rows for {idx.n_dyads} dyads "
            "in the edge list",
            path=path,
        )

    y = _numeric_column(frame, "y", path)
    X = np.column_stack([_numeric_column(frame, name, path) for name in covariates])
    group_ids = None
    if has_group:
        groups = frame[GROUP_COLUMN]
        blank = np.flatnonzero(groups.isna().to_numpy() | (groups.str.strip() == ""))
        if blank.size:
            raise DataFormatError(
                "missing group label", path=path, line=int(blank[0]) + 2
            )
        group_ids = groups.str.strip().to_numpy(dtype=str)

    order = np.argsort(dyad_ids, kind="stable")
    data = RegressionData(
        y=y[order],
        X=X[order],
        dyad_ids=dyad_ids[order],
        column_names=tuple(covariates),
        group_ids=None if group_ids is None else group_ids[order],
    )
    logger.debug(
        "Parsed dyadic data",
        extra={"path": str(path), "n_dyads": data.n_rows, "n_covariates": len(covariates)},
    )
    return add_intercept(data) if intercept else data


def write_edge_csv(graph: NodeGraph, path: str | Path) -> None:
    """Write ``graph`` as an ``i,j`` edge list in canonical ``i < j`` order."""
    pairs = sorted((min(u, v), max(u, v)) for u, v in graph.edges)
    frame = pd.DataFrame(pairs, columns=list(EDGE_COLUMNS), dtype=np.int64)
    _write_frame(frame, path)


def write_dyadic_csv(idx: DyadIndex, data: RegressionData, path: str | Path) -> None:
    """Write ``data`` in the dyadic CSV layout (intercept column omitted)."""
    keep = [k for k in range(data.n_regressors) if k != data.intercept_index]
    frame = pd.DataFrame(
        {
            "dyad_id": data.dyad_ids,
            "i": idx.pairs[data.dyad_ids, 0],
            "j": idx.pairs[data.dyad_ids, 1],
            "y": data.y,
        }
    )
    for k in keep:
        frame[data.column_names[k]] = data.X[:, k]
    if data.group_ids is not None:
        frame[GROUP_COLUMN] = data.group_ids
    _write_frame(frame, path)


def read_config_file(path: str | Path) -> list[tuple[str, str, int]]:
    """Parse ``key = value`` lines into ``(key, value, line)`` triples.

    Blank lines and ``#`` comments are skipped. Keys are lower-cased with
    ``-`` normalised to ``_``.
    """
    entries: list[tuple[str, str, int]] = []
    text = Path(path).read_text(encoding="utf-8")
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().lower().replace("-", "_")
        if not sep or not key:
            raise DataFormatError(
                f"expected 'key = value', got {raw.strip()!r}", path=path, line=number
            )
        entries.append((key, value.strip(), number))
    return entries


def _read_frame(path: str | Path) -> pd.DataFrame:
    options = {"dtype": str, "keep_default_na": False, "na_values": []}
    try:
        header = pd.read_csv(path, header=None, nrows=1, **options)
        frame = pd.read_csv(path, skip_blank_lines=False, **options)
    except pd.errors.EmptyDataError:
        raise DataFormatError("file is empty", path=path, line=1) from None
    except pd.errors.ParserError as exc:
        raise DataFormatError(f"malformed CSV: {exc}", path=path) from exc
    # read_csv renames repeated names ("x", "x.1"); keep what the file says
    frame.columns = [str(name).strip() for name in header.iloc[0]]
    # a trailing blank line parses as a row of empty strings and missing cells
    blank = (
        frame.fillna("").apply(lambda column: column.str.strip()).eq("").all(axis=1)
    ).to_numpy()
    while len(frame) and blank[len(frame) - 1]:
        frame = frame.iloc[:-1]
    return frame


def _integer_column(frame: pd.DataFrame, name: str, path: str | Path) -> np.ndarray:
    values = frame[name]
    valid = values.str.fullmatch(_INTEGER_PATTERN, na=False)
    bad = np.flatnonzero(~valid.to_numpy(dtype=bool))
    if bad.size:
        row = int(bad[0])
        cell = values.iloc[row]
        shown = "missing value" if pd.isna(cell) or not str(cell).strip() else repr(cell)
        raise DataFormatError(
            f"column {name!r} needs a non-negative integer, got {shown}",
            path=path,
            line=row + 2,
        )
    return values.str.strip().astype(np.int64).to_numpy()


def _numeric_column(frame: pd.DataFrame, name: str, path: str | Path) -> np.ndarray:
    raw = frame[name]
    values = pd.to_numeric(raw.str.strip(), errors="coerce").to_numpy(dtype=np.float64)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        row = int(bad[0])
        cell = raw.iloc[row]
        shown = "missing value" if pd.isna(cell) or not str(cell).strip() else repr(cell)
        raise DataFormatError(
            f"column {name!r} needs a finite number, got {shown}",
            path=path,
            line=row + 2,
        )
    return values


def _write_frame(frame: pd.DataFrame, path: str | Path) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(target, index=False, lineterminator="\n")
    logger.debug("Wrote CSV", extra={"path": str(target), "rows": len(frame)})


__all__ = [
    "parse_dyadic_csv",
    "parse_edge_csv",
    "read_config_file",
    "write_dyadic_csv",
    "write_edge_csv",
]
