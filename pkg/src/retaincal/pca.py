"""Covariance spectra, projector sensitivity, and noisy-projector unlearning.

The rank-k projector of an empirical covariance moves by at most
``sqrt(2) * ||dSigma||_F / gap_k`` under a perturbation (sin-theta bound), and
one added row of norm at most B perturbs the covariance by at most
``2 B^2 / (n + 1)``. Together these give the retained-set sensitivity bound
``2 sqrt(2) B^2 / ((n + 1) gap_k)`` in Frobenius norm, which calibrates the
symmetric Gaussian noise of the passive unlearning mechanism.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DomainError, UnboundedSensitivityError
from .mechanism import (
    SYMMETRIC_MATRIX,
    NoiseSpec,
    PrivacyParams,
    SensitivityReport,
    certify_unlearning,
    draw_noise,
    rng_from_seed,
)

GAP_FLOOR = 1e-10  # below this the eigengap is treated as zero


@dataclass(frozen=True)
class SpectralReport:
    """Eigendecomposition summary for one covariance matrix."""

    eigenvalues: np.ndarray  # nonincreasing
    k: int
    gap_k: float
    projector: np.ndarray

    @property
    def degenerate(self) -> bool:
        return self.gap_k < GAP_FLOOR


def covariance(
    x: np.ndarray, bound_b: float, require_centered: bool = False
) -> np.ndarray:
    """Second-moment matrix ``X^T X / n`` with row norms checked against B.

    No internal re-centering is ever performed: centering must happen at
    ingestion, before the sensitivity analysis fixes the addition model.
    ``require_centered=True`` additionally rejects data whose column-mean
    vector has norm above 1e-6.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] < 1:
        raise DataError("need a nonempty 2-d data matrix")
    norms = np.linalg.norm(x, axis=1)
    if norms.max(initial=0.0) > bound_b * (1 + 1e-12):
        raise DataError(
            f"row norm {norms.max():.6g} exceeds the bound B={bound_b:.6g}"
        )
    if require_centered:
        mean_norm = float(np.linalg.norm(x.mean(axis=0)))
        if mean_norm > 1e-6:
            raise DataError(
                f"data must be centered at ingestion (mean norm {mean_norm:.3g})"
            )
    return x.T @ x / x.shape[0]


def _orient_columns(vecs: np.ndarray) -> np.ndarray:
    # sign convention: largest-magnitude coordinate of each column is positive
    out = vecs.copy()
    for j in range(out.shape[1]):
        i = int(np.argmax(np.abs(out[:, j])))
        if out[i, j] < 0:
            out[:, j] = -out[:, j]
    return out


def spectral(cov: np.ndarray, k: int) -> SpectralReport:
    """Deterministic eigendecomposition and top-k projector of a symmetric matrix."""
    cov = np.asarray(cov, dtype=float)
    d = cov.shape[0]
    if cov.shape != (d, d):
        raise DataError("covariance must be square")
    if not 1 <= k <= d - 1:
        raise DomainError(f"k must be in [1, {d - 1}], got {k}")
    sym = (cov + cov.T) / 2.0
    evals, evecs = np.linalg.eigh(sym)  # ascending
    evals = evals[::-1]
    evecs = _orient_columns(evecs[:, ::-1])
    gap = float(evals[k - 1] - evals[k])
    top = evecs[:, :k]
    return SpectralReport(
        eigenvalues=evals,
        k=k,
        gap_k=gap,
        projector=top @ top.T,
    )


def rs_pca_bound(report: SpectralReport, n: int, bound_b: float) -> SensitivityReport:
    """Retain sensitivity bound ``2 sqrt(2) B^2 / ((n + 1) gap_k)``, Frobenius norm."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if report.degenerate:
        raise UnboundedSensitivityError(
            f"eigengap {report.gap_k:.3g} is numerically zero; "
            "the projector sensitivity bound is vacuous"
        )
    value = 2.0 * np.sqrt(2.0) * bound_b**2 / ((n + 1) * report.gap_k)
    return SensitivityReport(
        value=float(value),
        kind="retain",
        inputs={"n": n, "B": bound_b, "gap_k": report.gap_k, "k": report.k},
        source="rs_pca_bound",
    )


def oracle_rs_pca(
    x: np.ndarray,
    bound_b: float,
    k: int,
    trial_count: int = 32,
    seed: int = 0,
) -> SensitivityReport:
    """Sampled lower bound on the projector's retain sensitivity.

    Adds candidate rows of norm at most B (the extreme eigendirections plus
    random ones), recomputes the projector, and reports the largest Frobenius
    move observed.
    """
    x = np.asarray(x, dtype=float)
    n, d = x.shape
    cov = covariance(x, bound_b)
    base = spectral(cov, k)
    if base.degenerate:
        raise UnboundedSensitivityError("base eigengap is numerically zero")

    evecs_needed = np.linalg.eigh((cov + cov.T) / 2.0)[1][:, ::-1]
    candidates = [
        bound_b * evecs_needed[:, 0],
        -bound_b * evecs_needed[:, 0],
        bound_b * evecs_needed[:, k],
        -bound_b * evecs_needed[:, k],
    ]
    rng = rng_from_seed(seed)
    while len(candidates) < trial_count:
        v = rng.normal(size=d)
        v /= np.linalg.norm(v)
        candidates.append(bound_b * rng.uniform(0.2, 1.0) * v)

    worst = 0.0
    worst_note = "none"
    for i, z in enumerate(candidates[:trial_count]):
        cov_aug = (n * cov + np.outer(z, z)) / (n + 1)
        moved = spectral(cov_aug, k)
        dist = float(np.linalg.norm(moved.projector - base.projector, "fro"))
        if dist > worst:
            worst = dist
            worst_note = f"candidate_{i}"
    return SensitivityReport(
        value=worst,
        kind="oracle",
        inputs={"n": n, "B": bound_b, "k": k, "trials": trial_count, "argmax": worst_note},
        source="oracle_rs_pca",
    )


def project_rank_k(matrix: np.ndarray, k: int) -> np.ndarray:
    """Nearest rank-k orthogonal projector: top-k eigenvectors of a symmetric matrix."""
    return spectral(matrix, k).projector


def export_projector_csv(path: str, projector: np.ndarray) -> None:
    """Write a projector as dense row-major CSV (one matrix row per line)."""
    projector = np.asarray(projector, dtype=float)
    with open(path, "w") as handle:
        for row in projector:
            handle.write(",".join(repr(float(v)) for v in row) + "\n")


def unlearn_pca(
    projector_trained: np.ndarray,
    report_r: SpectralReport,
    n: int,
    bound_b: float,
    params: PrivacyParams,
    seed: int,
) -> tuple[np.ndarray, NoiseSpec]:
    """Passive projector unlearning: symmetric noise plus rank-k re-projection.

    The noise scale is calibrated to retained-set quantities only (n, B and
    the retained gap), so the unlearn and retrain branches share one noise
    law; the final re-projection is data-independent post-processing and
    keeps the certificate intact. Returns the released projector and the
    noise spec actually used.
    """
    projector_trained = np.asarray(projector_trained, dtype=float)
    d = projector_trained.shape[0]
    rs = rs_pca_bound(report_r, n, bound_b)
    spec = certify_unlearning(
        rs, params, shape=SYMMETRIC_MATRIX, dim=d, audit_tag="unlearn_pca"
    )
    noise = draw_noise(spec, seed)
    released = project_rank_k(projector_trained + noise, report_r.k)
    return released, spec
