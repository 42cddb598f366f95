"""Gaussian noise calibration and (epsilon, delta) certificate arithmetic.

Two distinct calibration routes are exposed and never mixed implicitly:

* the standard Gaussian-mechanism multiplier ``sigma = s * sqrt(2 ln(1.25/delta)) / eps``,
  stated for ``eps in (0, 1]`` (:func:`gaussian_sigma`), and
* the analytic two-Gaussian route ``eps = s^2/(2 sigma^2) + (s/sigma) sqrt(2 ln(1/delta))``,
  valid for any ``eps > 0`` (:func:`analytic_epsilon` / :func:`max_shift`).

All logarithms are natural. Randomness comes from a counter-based Philox
generator keyed by a 64-bit seed, so every draw is reproducible and streams
can be split across workers without coordination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .errors import CalibrationError, DomainError, UnboundedSensitivityError

VECTOR = "vector"
SYMMETRIC_MATRIX = "symmetric-matrix"

_KINDS = ("retain", "global", "oracle")


@dataclass(frozen=True)
class PrivacyParams:
    """Target (epsilon, delta) of an unlearning or privacy certificate."""

    epsilon: float
    delta: float

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise DomainError(f"epsilon must be > 0, got {self.epsilon}")
        if not 0 < self.delta < 1:
            raise DomainError(f"delta must be in (0, 1), got {self.delta}")


@dataclass(frozen=True)
class SensitivityReport:
    """A sensitivity value plus the formula inputs that produced it.

    ``kind`` is one of ``retain`` (worst case over single additions to a fixed
    retained set), ``global`` (worst case over all adjacent datasets) or
    ``oracle`` (an empirically measured lower bound). Degenerate instances set
    ``unbounded`` instead of smuggling a sentinel number through ``value``.
    """

    value: float | None
    kind: str
    inputs: Mapping[str, Any]
    source: str
    unbounded: bool = False

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise DomainError(f"kind must be one of {_KINDS}, got {self.kind!r}")
        if self.unbounded:
            if self.value is not None:
                raise DomainError("unbounded reports must not carry a value")
        else:
            if self.value is None or not self.value >= 0:
                raise DomainError(f"sensitivity value must be >= 0, got {self.value}")

    def require_value(self) -> float:
        """Return the numeric value, rejecting unbounded reports."""
        if self.unbounded or self.value is None:
            raise UnboundedSensitivityError(
                f"sensitivity from {self.source!r} is unbounded for this instance"
            )
        return self.value


@dataclass(frozen=True)
class NoiseSpec:
    """Per-coordinate Gaussian scale plus the shape of the object to perturb.

    ``audit`` carries the calibration provenance; it is excluded from equality
    so that the unlearn and retrain call paths of one calibration compare
    bit-identical, as the shared-noise-law argument requires.
    """

    sigma: float
    shape: str
    dim: int
    audit: Mapping[str, Any] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if not self.sigma >= 0:
            raise DomainError(f"sigma must be >= 0, got {self.sigma}")
        if self.shape not in (VECTOR, SYMMETRIC_MATRIX):
            raise DomainError(f"unknown noise shape {self.shape!r}")
        if self.dim < 1:
            raise DomainError(f"dim must be >= 1, got {self.dim}")


def noise_multiplier(params: PrivacyParams) -> float:
    """Standard Gaussian-mechanism multiplier ``sqrt(2 ln(1.25/delta)) / eps``.

    Stated for ``eps in (0, 1]``; larger epsilon must go through the analytic
    route (:func:`analytic_epsilon` / :func:`max_shift`).
    """
    if params.epsilon > 1:
        raise DomainError(
            "the standard multiplier is stated for epsilon in (0, 1]; "
            "use analytic_epsilon/max_shift for larger epsilon"
        )
    return math.sqrt(2.0 * math.log(1.25 / params.delta)) / params.epsilon


def gaussian_sigma(
    sensitivity: SensitivityReport,
    params: PrivacyParams,
    shape: str = VECTOR,
    dim: int = 1,
) -> NoiseSpec:
    """Calibrate isotropic Gaussian noise to a sensitivity bound.

    Returns ``sigma = value * sqrt(2 ln(1.25/delta)) / eps``. Linear in the
    sensitivity, nonincreasing in epsilon and in delta.
    """
    value = sensitivity.require_value()
    sigma = value * noise_multiplier(params)
    return NoiseSpec(sigma=sigma, shape=shape, dim=dim)


def analytic_epsilon(shift: float, sigma: float, delta: float) -> float:
    """Certified epsilon for two isotropic Gaussians at mean distance ``shift``.

    ``eps = shift^2 / (2 sigma^2) + (shift / sigma) * sqrt(2 ln(1/delta))``.
    Exact algebraic inverse of :func:`max_shift`.
    """
    if not sigma > 0:
        raise DomainError(f"sigma must be > 0, got {sigma}")
    if not shift >= 0:
        raise DomainError(f"shift must be >= 0, got {shift}")
    if not 0 < delta < 1:
        raise DomainError(f"delta must be in (0, 1), got {delta}")
    return shift**2 / (2.0 * sigma**2) + (shift / sigma) * math.sqrt(
        2.0 * math.log(1.0 / delta)
    )


def certifiable_shift_factor(params: PrivacyParams) -> float:
    """``b(eps, delta) = sqrt(2 ln(1/delta) + 2 eps) - sqrt(2 ln(1/delta))``."""
    two_log = 2.0 * math.log(1.0 / params.delta)
    return math.sqrt(two_log + 2.0 * params.epsilon) - math.sqrt(two_log)


def max_shift(params: PrivacyParams, sigma: float) -> float:
    """Largest mean shift certifiable at (eps, delta) with noise scale sigma."""
    if not sigma > 0:
        raise DomainError(f"sigma must be > 0, got {sigma}")
    return sigma * certifiable_shift_factor(params)


def rng_from_seed(seed: int) -> np.random.Generator:
    """Counter-based generator keyed by a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=seed & 0xFFFFFFFFFFFFFFFF))


def draw_noise(spec: NoiseSpec, seed: int) -> np.ndarray:
    """Draw the noise object described by ``spec``, deterministically in seed.

    Vector shape: ``dim`` i.i.d. N(0, sigma^2) coordinates. Symmetric-matrix
    shape: the upper triangle including the diagonal is drawn i.i.d. and
    mirrored, so the draw equals its own transpose bit for bit.
    """
    rng = rng_from_seed(seed)
    if spec.shape == VECTOR:
        return rng.normal(0.0, spec.sigma, size=spec.dim)
    d = spec.dim
    iu = np.triu_indices(d)
    out = np.zeros((d, d))
    out[iu] = rng.normal(0.0, spec.sigma, size=iu[0].size)
    lower = np.tril_indices(d, k=-1)
    out[lower] = out.T[lower]
    return out


def certify_unlearning(
    rs: SensitivityReport,
    params: PrivacyParams,
    shape: str = VECTOR,
    dim: int = 1,
    audit_tag: str = "",
) -> NoiseSpec:
    """Calibrate unlearning noise to a retain-sensitivity report.

    Only ``kind='retain'`` reports are accepted: the certificate argument needs
    the same noise law on the unlearn and retrain branches, which holds exactly
    when sigma is a function of retained-set quantities alone. Calibrating to
    an oracle (measured, addition-dependent) value would let the scale differ
    between the two branches and is rejected as unsound.
    """
    if rs.kind != "retain":
        raise CalibrationError(
            f"calibration requires a retain-kind report, got kind={rs.kind!r}; "
            "oracle/global values are not a valid shared noise law"
        )
    base = gaussian_sigma(rs, params, shape=shape, dim=dim)
    audit = {
        "tag": audit_tag,
        "source": rs.source,
        "inputs": dict(rs.inputs),
        "sensitivity": rs.value,
        "epsilon": params.epsilon,
        "delta": params.delta,
    }
    return NoiseSpec(sigma=base.sigma, shape=base.shape, dim=base.dim, audit=audit)
