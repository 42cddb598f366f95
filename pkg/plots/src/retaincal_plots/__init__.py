"""Render retaincal sweep summaries into ratio figures."""

from .spec import FigureSpec, PanelSpec, SpecError, load_spec
from .render import SchemaError, render

__version__ = "0.1.0"

__all__ = [
    "FigureSpec",
    "PanelSpec",
    "SpecError",
    "SchemaError",
    "load_spec",
    "render",
    "__version__",
]
