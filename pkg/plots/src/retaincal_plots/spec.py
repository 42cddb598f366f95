"""Figure specification: which CSVs feed which panels, and how axes behave."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

SPEC_VERSION = 1


class SpecError(ValueError):
    """Malformed figure specification."""


@dataclass(frozen=True)
class PanelSpec:
    input_csv: str
    title: str = ""
    x: str = "lam"
    y: str = "ratio"
    group_by: str | None = "n"
    log_x: bool = True
    log_y: bool = True
    filter: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class FigureSpec:
    name: str
    panels: tuple[PanelSpec, ...]
    image_format: str = "png"
    dpi: int = 110

    def __post_init__(self) -> None:
        if not self.panels:
            raise SpecError(f"figure {self.name!r} has no panels")


def _panel(raw: Mapping[str, Any], base_dir: Path) -> PanelSpec:
    if "input" not in raw:
        raise SpecError("panel needs an 'input' CSV path")
    path = Path(raw["input"])
    if not path.is_absolute():
        path = base_dir / path
    return PanelSpec(
        input_csv=str(path),
        title=str(raw.get("title", "")),
        x=str(raw.get("x", "lam")),
        y=str(raw.get("y", "ratio")),
        group_by=raw.get("group_by", "n"),
        log_x=bool(raw.get("log_x", True)),
        log_y=bool(raw.get("log_y", True)),
        filter={str(k): str(v) for k, v in raw.get("filter", {}).items()},
    )


def load_spec(path: str | Path) -> list[FigureSpec]:
    """Parse a JSON figure spec; relative CSV paths resolve next to the file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise SpecError(f"spec file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON ({exc})") from None
    version = raw.get("version")
    if version != SPEC_VERSION:
        raise SpecError(f"{path}: spec version {version!r}, expected {SPEC_VERSION}")
    output = raw.get("output", {})
    figures = []
    for figure in raw.get("figures", []):
        if "name" not in figure:
            raise SpecError("every figure needs a 'name'")
        panels = tuple(_panel(p, path.parent) for p in figure.get("panels", []))
        figures.append(
            FigureSpec(
                name=str(figure["name"]),
                panels=panels,
                image_format=str(output.get("format", "png")),
                dpi=int(output.get("dpi", 110)),
            )
        )
    if not figures:
        raise SpecError(f"{path}: no figures declared")
    return figures
