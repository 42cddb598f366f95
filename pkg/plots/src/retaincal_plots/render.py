"""Turn sweep summary CSVs into mean +- std band figures.

Only the summary CSV interface is consumed (schema line ``# retaincal-summary
v1``); raw row files are intentionally not read. Rendering is a pure function
of the CSV bytes and the spec, so re-renders are byte-identical.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .spec import FigureSpec, PanelSpec  # noqa: E402

SUMMARY_SCHEMA = "# retaincal-summary v1"
PNG_METADATA = {"Software": "retaincal-plots"}


class SchemaError(ValueError):
    """The CSV does not carry the summary schema this renderer understands."""


def read_summary(path: str | Path) -> list[dict[str, str]]:
    with open(path, newline="") as handle:
        first = handle.readline().strip()
        if first != SUMMARY_SCHEMA:
            raise SchemaError(
                f"{path}: expected {SUMMARY_SCHEMA!r}, found {first!r}; "
                "regenerate the summary with a matching harness version"
            )
        return list(csv.DictReader(handle))


def _to_float(token: str) -> float | None:
    if token is None or token == "":
        return None
    return float(token)


def _panel_series(panel: PanelSpec) -> dict[str, tuple[np.ndarray, np.ndarray, np.ndarray]]:
    rows = read_summary(panel.input_csv)
    if rows:
        columns = rows[0].keys()
        mean_col = f"{panel.y}_mean" if f"{panel.y}_mean" in columns else panel.y
        std_col = f"{panel.y}_std" if f"{panel.y}_std" in columns else None
        for needed in (panel.x, mean_col):
            if needed not in columns:
                raise SchemaError(
                    f"{panel.input_csv}: column {needed!r} absent from summary schema v1"
                )
        if panel.group_by is not None and panel.group_by not in columns:
            raise SchemaError(
                f"{panel.input_csv}: group column {panel.group_by!r} absent"
            )
    series: dict[str, list[tuple[float, float, float]]] = {}
    for row in rows:
        if any(row.get(k, "") != v for k, v in panel.filter.items()):
            continue
        x = _to_float(row[panel.x])
        y = _to_float(row[mean_col])
        if x is None or y is None:
            continue
        spread = _to_float(row[std_col]) if std_col else None
        key = row[panel.group_by] if panel.group_by is not None else ""
        series.setdefault(key, []).append((x, y, spread if spread is not None else 0.0))
    out = {}
    for key, points in series.items():
        points.sort()
        arr = np.asarray(points, dtype=float)
        out[key] = (arr[:, 0], arr[:, 1], arr[:, 2])
    return out


def _draw_panel(ax, panel: PanelSpec) -> None:
    series = _panel_series(panel)
    if not series:
        ax.annotate(
            "no data rows",
            xy=(0.5, 0.5),
            xycoords="axes fraction",
            ha="center",
            va="center",
            color="tab:red",
        )
    for key in sorted(series):
        x, y, spread = series[key]
        label = f"{panel.group_by}={key}" if panel.group_by else None
        ax.plot(x, y, marker="o", markersize=3, linewidth=1.2, label=label)
        ax.fill_between(x, y - spread, y + spread, alpha=0.25, linewidth=0)
    if panel.log_x:
        ax.set_xscale("log")
    if panel.log_y and series:
        positive = all((y > 0).all() for _, y, _ in series.values())
        if positive:
            ax.set_yscale("log")
    ax.set_xlabel(panel.x)
    ax.set_ylabel(panel.y)
    if panel.title:
        ax.set_title(panel.title)
    if series and panel.group_by:
        ax.legend(fontsize=7)
    ax.grid(True, which="both", alpha=0.25)


def render(figures: list[FigureSpec], out_dir: str | Path) -> list[Path]:
    """Render every figure to ``out_dir``; returns the written image paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for figure in figures:
        count = len(figure.panels)
        fig, axes = plt.subplots(
            1, count, figsize=(4.2 * count, 3.4), squeeze=False, layout="constrained"
        )
        for ax, panel in zip(axes[0], figure.panels):
            _draw_panel(ax, panel)
        target = out_dir / f"{figure.name}.{figure.image_format}"
        metadata = PNG_METADATA if figure.image_format == "png" else None
        fig.savefig(target, dpi=figure.dpi, metadata=metadata)
        plt.close(fig)
        written.append(target)
    return written
