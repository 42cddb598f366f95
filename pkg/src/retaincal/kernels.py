"""Import-time selection of the compiled solver kernel.

The compiled extension is preferred when present; setting the environment
variable ``RETAINCAL_PURE_PYTHON=1`` forces the NumPy fallback (used by the
benchmark that compares the two).
"""

from __future__ import annotations

import os

if os.environ.get("RETAINCAL_PURE_PYTHON", "") == "1":
    from ._dca_py import sweep

    BACKEND = "python"
else:
    try:
        from ._dca import sweep  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        from ._dca_py import sweep  # type: ignore[no-redef]

        BACKEND = "python"

__all__ = ["sweep", "BACKEND"]
