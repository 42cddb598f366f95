"""Retain-calibrated noise for certified machine unlearning.

Sensitivity bounds that depend on the retained sample (spacing, cut
structure, eigengap, margin, curvature) calibrate strictly less Gaussian
noise than worst-case bounds, for the same deletion certificate. The package
computes both sides for five canonical problems, runs two active unlearning
algorithms with either calibration, and sweeps the comparisons to CSV.
"""

from __future__ import annotations

from .errors import (
    CalibrationError,
    ConditionError,
    ConvergenceError,
    DataError,
    DisconnectedGraphError,
    DomainError,
    NonSeparableError,
    RetaincalError,
    UnboundedSensitivityError,
)
from .mechanism import (
    NoiseSpec,
    PrivacyParams,
    SensitivityReport,
    analytic_epsilon,
    certify_unlearning,
    draw_noise,
    gaussian_sigma,
    max_shift,
)

__version__ = "0.1.0"

__all__ = [
    "CalibrationError",
    "ConditionError",
    "ConvergenceError",
    "DataError",
    "DisconnectedGraphError",
    "DomainError",
    "NoiseSpec",
    "NonSeparableError",
    "PrivacyParams",
    "RetaincalError",
    "SensitivityReport",
    "UnboundedSensitivityError",
    "analytic_epsilon",
    "certify_unlearning",
    "draw_noise",
    "gaussian_sigma",
    "max_shift",
    "__version__",
]
