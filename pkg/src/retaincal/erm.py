"""Regularized empirical risk minimization with data-dependent curvature.

For an L-Lipschitz loss whose empirical objective is lambda_R-strongly convex
on the retained sample, one added point moves the minimizer by at most
``L / (n * lambda_R)``. The worst-case (global) counterpart replaces lambda_R
by the regularizer lambda, so the retain/global ratio is exactly
``lambda / lambda_R``. A refined bound uses the Hessian's smallest eigenvalue
at the trained optimum together with a Hessian Lipschitz constant M:
``(lam0 - sqrt(lam0^2 - 4 M L / n)) / (2 M)``.

Two losses are provided, matching the constants used throughout:

* MSE:      ``F(w) = ||Xw - y||^2 / (2n) + lam/2 ||w||^2``
* logistic: ``F(w) = mean(log(1 + exp(-y x.w))) + lam/2 ||w||^2``, labels +-1
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping

import numpy as np

from .errors import (
    ConditionError,
    ConvergenceError,
    DataError,
    DomainError,
    UnboundedSensitivityError,
)
from .mechanism import SensitivityReport, rng_from_seed

MSE = "mse"
LOGISTIC = "logistic"

HESSIAN_LIPSCHITZ_LOGISTIC_FACTOR = 1.0 / (6.0 * math.sqrt(3.0))


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with bounded rows, labels in [-1, 1], and norm caps."""

    x: np.ndarray
    y: np.ndarray | None
    bound_b: float
    bound_rw: float = 1.0
    meta: Mapping[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        object.__setattr__(self, "x", x)
        if x.ndim != 2 or x.shape[0] < 1:
            raise DataError("x must be a nonempty 2-d matrix")
        if not self.bound_b > 0 or not self.bound_rw > 0:
            raise DomainError("bound_b and bound_rw must be > 0")
        norms = np.linalg.norm(x, axis=1)
        if norms.max(initial=0.0) > self.bound_b * (1 + 1e-9):
            raise DataError(
                f"row norm {norms.max():.6g} exceeds bound_b={self.bound_b:.6g}"
            )
        if self.y is not None:
            y = np.asarray(self.y, dtype=float)
            object.__setattr__(self, "y", y)
            if y.shape != (x.shape[0],):
                raise DataError("y must have one label per row of x")
            if np.abs(y).max(initial=0.0) > 1 + 1e-12:
                raise DataError("labels must lie in [-1, 1]")

    @property
    def n(self) -> int:
        return int(self.x.shape[0])

    @property
    def d(self) -> int:
        return int(self.x.shape[1])

    def require_labels(self) -> np.ndarray:
        if self.y is None:
            raise DataError("this operation needs a labeled dataset")
        return self.y

    def with_point(self, x_new: np.ndarray, y_new: float) -> "Dataset":
        return Dataset(
            x=np.vstack([self.x, np.asarray(x_new, dtype=float)[None, :]]),
            y=np.concatenate([self.require_labels(), [float(y_new)]]),
            bound_b=self.bound_b,
            bound_rw=self.bound_rw,
            meta=self.meta,
        )

    def without_index(self, index: int) -> "Dataset":
        keep = np.arange(self.n) != index
        return Dataset(
            x=self.x[keep],
            y=None if self.y is None else self.y[keep],
            bound_b=self.bound_b,
            bound_rw=self.bound_rw,
            meta=self.meta,
        )


@dataclass(frozen=True)
class LossSpec:
    kind: str
    lam: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in (MSE, LOGISTIC):
            raise DomainError(f"unknown loss kind {self.kind!r}")
        if self.lam < 0:
            raise DomainError(f"lam must be >= 0, got {self.lam}")


@dataclass(frozen=True)
class CurvatureReport:
    """Strong-convexity / smoothness constants of one objective on one sample.

    ``gamma_r = (kappa_r - 1) / (kappa_r + 1)`` is the per-step contraction of
    projected gradient descent at step size ``2 / (lambda_r + beta_r)``.
    """

    lambda_r: float
    beta_r: float
    lipschitz: float
    hessian_lipschitz: float
    lam: float
    inputs: Mapping[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if self.lambda_r < 0 or self.beta_r < 0:
            raise DomainError("need lambda_r >= 0 and beta_r >= 0")
        if self.lambda_r > self.beta_r * (1 + 1e-12):
            raise DomainError("lambda_r cannot exceed beta_r")

    @property
    def degenerate(self) -> bool:
        return self.lambda_r <= 0

    @property
    def kappa_r(self) -> float:
        return math.inf if self.degenerate else self.beta_r / self.lambda_r

    @property
    def gamma_r(self) -> float:
        if self.degenerate:
            return 1.0
        k = self.kappa_r
        return (k - 1.0) / (k + 1.0)

    @property
    def step_size(self) -> float:
        if self.lambda_r + self.beta_r <= 0:
            raise DomainError("step size undefined for a flat objective")
        return 2.0 / (self.lambda_r + self.beta_r)


def _sigmoid(t: np.ndarray) -> np.ndarray:
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _logistic_weights(t: np.ndarray) -> np.ndarray:
    # sigma(t) * sigma(-t), computed without overflow
    a = np.exp(-np.abs(t))
    return a / (1.0 + a) ** 2


def objective(data: Dataset, loss: LossSpec, w: np.ndarray) -> float:
    x, y = data.x, data.require_labels()
    reg = 0.5 * loss.lam * float(w @ w)
    if loss.kind == MSE:
        r = x @ w - y
        return float(r @ r) / (2.0 * data.n) + reg
    t = y * (x @ w)
    return float(np.mean(np.logaddexp(0.0, -t))) + reg


def gradient(data: Dataset, loss: LossSpec, w: np.ndarray) -> np.ndarray:
    x, y = data.x, data.require_labels()
    if loss.kind == MSE:
        return x.T @ (x @ w - y) / data.n + loss.lam * w
    t = y * (x @ w)
    return -(x.T @ (_sigmoid(-t) * y)) / data.n + loss.lam * w


def hessian(data: Dataset, loss: LossSpec, w: np.ndarray) -> np.ndarray:
    x = data.x
    d = data.d
    if loss.kind == MSE:
        return x.T @ x / data.n + loss.lam * np.eye(d)
    t = data.require_labels() * (x @ w)
    s = _logistic_weights(t)
    return (x.T * s) @ x / data.n + loss.lam * np.eye(d)


def point_gradient(loss: LossSpec, w: np.ndarray, x: np.ndarray, y: float) -> np.ndarray:
    """Gradient of the per-sample loss (regularizer included)."""
    if loss.kind == MSE:
        return (float(x @ w) - y) * x + loss.lam * w
    t = y * float(x @ w)
    return -_sigmoid(np.array([-t]))[0] * y * x + loss.lam * w


def point_hessian(loss: LossSpec, w: np.ndarray, x: np.ndarray, y: float) -> np.ndarray:
    d = x.size
    if loss.kind == MSE:
        return np.outer(x, x) + loss.lam * np.eye(d)
    t = y * float(x @ w)
    s = float(_logistic_weights(np.array([t]))[0])
    return s * np.outer(x, x) + loss.lam * np.eye(d)


def curvature(data: Dataset, loss: LossSpec) -> CurvatureReport:
    """Data-dependent strong convexity, smoothness, and Lipschitz constants.

    MSE:      lambda_r = lmin(X'X)/n + lam, beta_r = lmax(X'X)/n + lam,
              L = (B^2 + lam) B / lam_aug + B via ||w|| <= B / lam_aug, with
              the conservative one-point-augmented floor
              lam_aug = lmin(X'X)/(n+1) + lam (appending a PSD rank-one term
              cannot push the scaled smallest eigenvalue below this). The
              lam ||w|| term of the per-sample gradient is kept: dropping it
              makes the bound measurably false at large lam.
    logistic: curvature floor C = (2 cosh(B R_w / 2))^-2 on the ball
              ||w|| <= R_w, lambda_r = C lmin(X'X)/n + lam,
              beta_r = lmax(X'X)/(4n) + lam, L = B + lam R_w,
              M = B^3 / (6 sqrt(3)).
    """
    x = data.x
    n, lam, b = data.n, loss.lam, data.bound_b
    gram_eigs = np.linalg.eigvalsh(x.T @ x)
    lmin = max(float(gram_eigs[0]), 0.0)
    lmax = max(float(gram_eigs[-1]), 0.0)
    inputs: dict[str, Any] = {
        "n": n,
        "d": data.d,
        "lam": lam,
        "B": b,
        "R_w": data.bound_rw,
        "gram_lambda_min": lmin,
        "gram_lambda_min_over_n": lmin / n,
        "gram_lambda_max": lmax,
        "loss": loss.kind,
    }
    if loss.kind == MSE:
        lambda_r = lmin / n + lam
        beta_r = lmax / n + lam
        lam_aug = lmin / (n + 1) + lam
        lipschitz = (b**2 + lam) * b / lam_aug + b if lam_aug > 0 else math.inf
        hess_lip = 0.0
        inputs["lambda_min_aug"] = lam_aug
    else:
        c = (2.0 * math.cosh(b * data.bound_rw / 2.0)) ** -2
        lambda_r = c * lmin / n + lam
        beta_r = lmax / (4.0 * n) + lam
        lipschitz = b + lam * data.bound_rw
        hess_lip = HESSIAN_LIPSCHITZ_LOGISTIC_FACTOR * b**3
        inputs["curvature_floor_C"] = c
    beta_r = max(beta_r, lambda_r)  # guard: exact arithmetic already has beta >= lambda
    return CurvatureReport(
        lambda_r=lambda_r,
        beta_r=beta_r,
        lipschitz=lipschitz,
        hessian_lipschitz=hess_lip,
        lam=lam,
        inputs=inputs,
    )


def worst_case_curvature(
    loss: LossSpec, bound_b: float, bound_rw: float, lipschitz: float
) -> CurvatureReport:
    """Dataset-free counterpart of :func:`curvature` for global calibration.

    Keeps the caller-supplied Lipschitz constant so that retain and global
    calibrations of one instance share it, and uses the worst-case smoothness
    ``B^2 + lam`` (MSE) or ``B^2/4 + lam`` (logistic) with curvature lam.
    """
    if loss.kind == MSE:
        beta = bound_b**2 + loss.lam
        hess_lip = 0.0
    else:
        beta = bound_b**2 / 4.0 + loss.lam
        hess_lip = HESSIAN_LIPSCHITZ_LOGISTIC_FACTOR * bound_b**3
    return CurvatureReport(
        lambda_r=loss.lam,
        beta_r=max(beta, loss.lam),
        lipschitz=lipschitz,
        hessian_lipschitz=hess_lip,
        lam=loss.lam,
        inputs={"B": bound_b, "R_w": bound_rw, "loss": loss.kind, "worst_case": True},
    )


def train(
    data: Dataset,
    loss: LossSpec,
    tolerance: float = 1e-10,
    max_iterations: int = 200,
    w0: np.ndarray | None = None,
) -> np.ndarray:
    """Empirical risk minimizer.

    MSE solves the normal equations in closed form. Logistic runs damped
    Newton until the gradient norm is at most ``tolerance``, then rescales
    onto the ball ``||w|| <= R_w`` if the cap binds.
    """
    y = data.require_labels()
    if loss.kind == MSE:
        a = data.x.T @ data.x / data.n + loss.lam * np.eye(data.d)
        b = data.x.T @ y / data.n
        try:
            w = np.linalg.solve(a, b)
        except np.linalg.LinAlgError as exc:
            raise DataError(
                "singular normal equations: lam=0 with rank-deficient features"
            ) from exc
        if not np.all(np.isfinite(w)):
            raise DataError("normal equations produced non-finite solution")
        return w

    w = np.zeros(data.d) if w0 is None else np.array(w0, dtype=float)
    value = objective(data, loss, w)
    for _ in range(max_iterations):
        g = gradient(data, loss, w)
        grad_norm = float(np.linalg.norm(g))
        if grad_norm <= tolerance:
            break
        h = hessian(data, loss, w)
        try:
            step = np.linalg.solve(h, g)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError("singular Hessian in Newton step") from exc
        scale = 1.0
        if grad_norm > 1e-6:
            # Armijo damping; skipped in the local phase where objective
            # decrements fall below float resolution and would stall it
            for _ in range(60):
                cand = w - scale * step
                cand_value = objective(data, loss, cand)
                if cand_value <= value - 1e-4 * scale * float(g @ step):
                    break
                scale *= 0.5
        w = w - scale * step
        value = objective(data, loss, w)
    else:
        if float(np.linalg.norm(gradient(data, loss, w))) > tolerance:
            raise ConvergenceError(
                f"Newton did not reach gradient norm {tolerance:.1e} in "
                f"{max_iterations} iterations"
            )
    norm = float(np.linalg.norm(w))
    if norm > data.bound_rw:
        w = w * (data.bound_rw / norm)
    return w


def rs_erm(report: CurvatureReport, n: int) -> SensitivityReport:
    """Retain sensitivity bound ``L / (n lambda_r)``; unbounded if lambda_r = 0."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    inputs = {"n": n, "lambda_r": report.lambda_r, "L": report.lipschitz}
    if report.degenerate or not math.isfinite(report.lipschitz):
        return SensitivityReport(
            value=None, kind="retain", inputs=inputs, source="rs_erm", unbounded=True
        )
    return SensitivityReport(
        value=report.lipschitz / (n * report.lambda_r),
        kind="retain",
        inputs=inputs,
        source="rs_erm",
    )


def gs_erm(lipschitz: float, n: int, lam: float) -> SensitivityReport:
    """Global sensitivity bound ``L / (n lam)``; unbounded at lam = 0."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if lam < 0:
        raise DomainError(f"lam must be >= 0, got {lam}")
    inputs = {"n": n, "lam": lam, "L": lipschitz}
    if lam == 0 or not math.isfinite(lipschitz):
        return SensitivityReport(
            value=None, kind="global", inputs=inputs, source="gs_erm", unbounded=True
        )
    return SensitivityReport(
        value=lipschitz / (n * lam), kind="global", inputs=inputs, source="gs_erm"
    )


def rs_erm_root(lambda_0: float, lipschitz: float, hessian_lipschitz: float, n: int) -> SensitivityReport:
    """Refined stability bound from curvature at the trained optimum.

    ``(lam0 - sqrt(lam0^2 - 4 M L / n)) / (2 M)``, evaluated in the
    conjugate form ``(2 L / n) / (lam0 + sqrt(lam0^2 - 4 M L / n))`` which is
    stable as M -> 0 and then equals ``L / (n lam0)``. Requires
    ``lam0^2 >= 4 M L / n``.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if lambda_0 <= 0:
        raise DomainError(f"lambda_0 must be > 0, got {lambda_0}")
    if hessian_lipschitz < 0:
        raise DomainError("hessian_lipschitz must be >= 0")
    discriminant = lambda_0**2 - 4.0 * hessian_lipschitz * lipschitz / n
    if discriminant < 0:
        raise ConditionError(
            f"hypothesis lam0^2 >= 4 M L / n fails by {-discriminant:.6g}",
            deficit=float(-discriminant),
        )
    value = (2.0 * lipschitz / n) / (lambda_0 + math.sqrt(discriminant))
    return SensitivityReport(
        value=float(value),
        kind="retain",
        inputs={
            "n": n,
            "lambda_0": lambda_0,
            "L": lipschitz,
            "M": hessian_lipschitz,
        },
        source="rs_erm_root",
    )


def hessian_smallest_eig(data: Dataset, loss: LossSpec, w: np.ndarray) -> float:
    """Smallest eigenvalue of the empirical Hessian at w (lam0 of the root bound)."""
    return float(np.linalg.eigvalsh(hessian(data, loss, w))[0])


def default_candidates(
    data: Dataset, loss: LossSpec, trial_count: int, seed: int
) -> list[tuple[np.ndarray, float]]:
    """Additions stressing the extreme Gram eigendirections plus random ball points."""
    b = data.bound_b
    _, vecs = np.linalg.eigh(data.x.T @ data.x)
    zero_label = 0.0 if loss.kind == MSE else 1.0
    fixed = [
        (b * vecs[:, 0], 1.0),
        (-b * vecs[:, 0], -1.0),
        (b * vecs[:, -1], 1.0),
        (-b * vecs[:, -1], -1.0),
        (np.zeros(data.d), zero_label),
    ]
    rng = rng_from_seed(seed)
    out = list(fixed[:trial_count])
    while len(out) < trial_count:
        v = rng.normal(size=data.d)
        v /= np.linalg.norm(v)
        radius = b * rng.uniform() ** (1.0 / data.d)
        label = float(rng.choice([-1.0, 1.0]))
        out.append((radius * v, label))
    return out


def oracle_stability(
    data: Dataset,
    loss: LossSpec,
    candidate_source: Iterable[tuple[np.ndarray, float]]
    | Callable[[Dataset, int, int], Iterable[tuple[np.ndarray, float]]]
    | None = None,
    trial_count: int = 64,
    seed: int = 0,
    tolerance: float = 1e-10,
) -> SensitivityReport:
    """Measured retain sensitivity: retrain after each candidate addition.

    Reports the largest ``||w_R - w_{R+z}||_2`` over the candidate additions
    (norm-bounded features, labels in [-1, 1]).
    """
    if candidate_source is None:
        candidates = default_candidates(data, loss, trial_count, seed)
    elif callable(candidate_source):
        candidates = list(candidate_source(data, trial_count, seed))
    else:
        candidates = list(candidate_source)
    w_base = train(data, loss, tolerance=tolerance)
    worst = 0.0
    mse_zero_label_distance = None
    for x_new, y_new in candidates:
        if float(np.linalg.norm(x_new)) > data.bound_b * (1 + 1e-9):
            raise DataError("candidate feature norm exceeds bound_b")
        augmented = data.with_point(x_new, y_new)
        w_aug = train(augmented, loss, tolerance=tolerance, w0=w_base)
        dist = float(np.linalg.norm(w_base - w_aug))
        if mse_zero_label_distance is None and not np.any(x_new):
            mse_zero_label_distance = dist
        worst = max(worst, dist)
    return SensitivityReport(
        value=worst,
        kind="oracle",
        inputs={
            "n": data.n,
            "trials": len(candidates),
            "loss": loss.kind,
            "lam": loss.lam,
            "zero_candidate_distance": mse_zero_label_distance,
        },
        source="oracle_stability",
    )
