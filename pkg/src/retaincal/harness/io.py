"""File ingestion and report serialization.

Input formats
-------------
* dataset CSV: numeric columns, optional one-line header, optional label
  column selected by name or index;
* edge list: one ``u v w`` triple per line, ``#`` comments, arbitrary string
  vertex ids interned to dense integers in first-seen order.

Report CSVs start with a schema comment line so downstream consumers can
check versions; rows are written atomically (temp file then rename) and all
floats use shortest round-trip formatting so re-runs are byte-identical.
"""

from __future__ import annotations

import csv
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from ..erm import Dataset
from ..errors import DataError
from ..mechanism import rng_from_seed
from ..mst import WeightedGraph

logger = logging.getLogger("retaincal")

REPORT_SCHEMA = "# retaincal-report v1"
SUMMARY_SCHEMA = "# retaincal-summary v1"

REPORT_COLUMNS = [
    "experiment",
    "dataset",
    "n",
    "lam",
    "seed",
    "calibration",
    "rs_value",
    "gs_value",
    "ratio",
    "oracle_value",
    "iterations",
    "sigma",
    "accuracy",
    "accuracy_retrain",
    "error",
    "wall_time_s",
]

SUMMARY_COLUMNS = [
    "experiment",
    "dataset",
    "n",
    "lam",
    "cells",
    "ratio_mean",
    "ratio_std",
    "rs_mean",
    "rs_std",
    "gs_mean",
    "gs_std",
    "oracle_mean",
    "oracle_std",
]


def _parse_cell(token: str, row_index: int, col_index: int) -> float:
    try:
        return float(token)
    except ValueError as exc:
        raise DataError(
            f"non-numeric cell {token!r} at row {row_index}, column {col_index}"
        ) from exc


def read_csv_matrix(path: str | Path) -> tuple[list[str], np.ndarray]:
    """Read a numeric CSV; returns (column names, matrix).

    The first row is treated as a header when any of its cells is
    non-numeric; otherwise columns are named col0, col1, ...
    """
    rows: list[list[str]] = []
    with open(path, newline="") as handle:
        for raw in csv.reader(handle):
            if not raw or (len(raw) == 1 and not raw[0].strip()):
                continue
            if raw[0].lstrip().startswith("#"):
                continue
            rows.append([cell.strip() for cell in raw])
    if not rows:
        raise DataError(f"{path}: no data rows")
    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise DataError(f"{path}: ragged row {i} (expected {width} cells)")

    def numeric(token: str) -> bool:
        try:
            float(token)
            return True
        except ValueError:
            return False

    if all(numeric(c) for c in rows[0]):
        names = [f"col{j}" for j in range(width)]
        body = rows
    else:
        names = rows[0]
        body = rows[1:]
        if not body:
            raise DataError(f"{path}: header but no data rows")
    matrix = np.array(
        [[_parse_cell(c, i, j) for j, c in enumerate(row)] for i, row in enumerate(body)]
    )
    return names, matrix


def jl_projection_matrix(d_in: int, d_out: int, seed: int) -> np.ndarray:
    """Gaussian random projection with entry variance 1/d_out (norm preserving)."""
    rng = rng_from_seed(seed)
    return rng.normal(0.0, 1.0 / np.sqrt(d_out), size=(d_in, d_out))


def ingest_csv(
    path: str | Path,
    label_column: str | int | None = None,
    standardize: bool = False,
    project_to_b: bool = False,
    jl_target_dim: int | None = None,
    seed: int = 0,
    bound_b: float = 1.0,
    bound_rw: float = 1.0,
    normalize_labels: bool = False,
) -> Dataset:
    """Load a dataset CSV with optional preprocessing, recorded in metadata.

    Order of operations: split label column, z-standardize features, apply
    the seeded Gaussian projection, rescale rows so the largest row norm is
    exactly ``bound_b``.
    """
    names, matrix = read_csv_matrix(path)
    meta: dict[str, Any] = {"path": str(path), "steps": []}
    y: np.ndarray | None = None
    if label_column is not None:
        if isinstance(label_column, str):
            if label_column not in names:
                raise DataError(f"label column {label_column!r} not in {names}")
            idx = names.index(label_column)
        else:
            idx = int(label_column)
            if not 0 <= idx < matrix.shape[1]:
                raise DataError(f"label column index {idx} out of range")
        y = matrix[:, idx]
        matrix = np.delete(matrix, idx, axis=1)
        meta["label_column"] = label_column
    if matrix.shape[1] == 0:
        raise DataError("no feature columns left after label extraction")
    x = matrix
    if standardize:
        mean = x.mean(axis=0)
        std = x.std(axis=0)
        std[std == 0] = 1.0
        x = (x - mean) / std
        meta["steps"].append("standardize")
    if jl_target_dim is not None:
        proj = jl_projection_matrix(x.shape[1], jl_target_dim, seed)
        x = x @ proj
        meta["steps"].append(f"jl_projection(d={jl_target_dim}, seed={seed})")
    if project_to_b:
        max_norm = float(np.linalg.norm(x, axis=1).max())
        if max_norm > 0:
            x = x * (bound_b / max_norm)
        meta["steps"].append(f"project_to_b(B={bound_b})")
    else:
        observed = float(np.linalg.norm(x, axis=1).max())
        if observed > bound_b:
            bound_b = observed
            meta["steps"].append(f"bound_b_widened_to_observed({observed!r})")
    if y is not None and normalize_labels:
        peak = float(np.abs(y).max())
        if peak > 0:
            y = y / peak
        meta["steps"].append("normalize_labels")
    return Dataset(x=x, y=y, bound_b=bound_b, bound_rw=bound_rw, meta=meta)


def ingest_edges(path: str | Path, bound_b: float | None = None) -> WeightedGraph:
    """Read a whitespace-separated ``u v w`` edge list into a graph.

    Vertex ids are arbitrary strings interned in first-seen order. Duplicate
    pairs keep the minimum weight and log a warning. ``bound_b`` defaults to
    the maximum observed weight.
    """
    order: list[str] = []
    index: dict[str, int] = {}
    weights: dict[tuple[int, int], float] = {}

    def intern(name: str) -> int:
        if name not in index:
            index[name] = len(order)
            order.append(name)
        return index[name]

    with open(path) as handle:
        for line_no, line in enumerate(handle, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            parts = text.split()
            if len(parts) != 3:
                raise DataError(f"{path}:{line_no}: expected 'u v w', got {text!r}")
            u, v = intern(parts[0]), intern(parts[1])
            try:
                w = float(parts[2])
            except ValueError as exc:
                raise DataError(f"{path}:{line_no}: bad weight {parts[2]!r}") from exc
            if u == v:
                raise DataError(f"{path}:{line_no}: self-loop at {parts[0]!r}")
            key = (u, v) if u < v else (v, u)
            if key in weights:
                logger.warning(
                    "%s:%d: duplicate edge %s-%s, keeping min weight",
                    path,
                    line_no,
                    parts[0],
                    parts[1],
                )
                weights[key] = min(weights[key], w)
            else:
                weights[key] = w
    if not weights:
        raise DataError(f"{path}: no edges")
    b = bound_b if bound_b is not None else max(weights.values())
    edges = tuple((u, v, w) for (u, v), w in sorted(weights.items()))
    return WeightedGraph(
        vertex_count=len(order), edges=edges, bound_b=b, names=tuple(order)
    )


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))  # builtin repr even for numpy scalars
    return str(value)


def atomic_write_csv(
    path: str | Path,
    schema_line: str,
    columns: Sequence[str],
    rows: Iterable[Mapping[str, Any]],
) -> None:
    """Write a report CSV via a temp file so readers never see partial output."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(schema_line + "\n")
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([format_value(row.get(c)) for c in columns])
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def read_report_csv(path: str | Path, expected_schema: str) -> list[dict[str, str]]:
    """Read back a schema-tagged report CSV, checking the version line."""
    with open(path, newline="") as handle:
        first = handle.readline().strip()
        if first != expected_schema:
            raise DataError(
                f"{path}: schema mismatch (found {first!r}, need {expected_schema!r})"
            )
        reader = csv.DictReader(handle)
        return list(reader)
