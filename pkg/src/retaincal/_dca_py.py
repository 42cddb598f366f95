"""Pure-NumPy twin of the compiled coordinate ascent sweep in ``_dca.pyx``.

Semantics match the compiled kernel update for update; only speed differs.
"""

from __future__ import annotations

import numpy as np


def sweep(
    q: np.ndarray, alpha: np.ndarray, g: np.ndarray, order: np.ndarray
) -> float:
    worst = 0.0
    for i in order:
        # KKT residual on arrival (post-update it is zero by construction)
        if alpha[i] > 0.0:
            violation = abs(g[i] - 1.0)
        else:
            violation = max(1.0 - g[i], 0.0)
        if violation > worst:
            worst = violation
        new_alpha = alpha[i] + (1.0 - g[i]) / q[i, i]
        if new_alpha < 0.0:
            new_alpha = 0.0
        delta = new_alpha - alpha[i]
        if delta != 0.0:
            alpha[i] = new_alpha
            g += delta * q[i]
    return float(worst)
