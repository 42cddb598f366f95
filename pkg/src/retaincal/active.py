"""Active unlearning: gradient-descent-to-deletion and the Newton-step update.

Both algorithms train on the full sample, apply a deterministic correction
toward the retrained model, and add Gaussian noise. Calibration can use
either worst-case constants (regularizer curvature lambda) or the constants
measured on the retained sample (lambda_R, beta_R), which shrinks the
iteration count of the descent method and the noise scale of the Newton
update by up to ``(lambda / lambda_R)^3``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .erm import (
    CurvatureReport,
    Dataset,
    LossSpec,
    curvature,
    gradient,
    hessian,
    point_gradient,
    point_hessian,
    train,
    worst_case_curvature,
)
from .errors import DomainError, UnboundedSensitivityError
from .mechanism import (
    VECTOR,
    NoiseSpec,
    PrivacyParams,
    SensitivityReport,
    certifiable_shift_factor,
    draw_noise,
    noise_multiplier,
)

RETAIN = "retain"
GLOBAL = "global"


@dataclass(frozen=True)
class UnlearnRequest:
    """One single-point deletion request against a trained model's sample."""

    full_data: Dataset  # the n+1 points the model was trained on
    delete_index: int
    loss: LossSpec
    params: PrivacyParams
    sigma: float | None = None  # descent method only; Newton sets its own
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.delete_index < self.full_data.n:
            raise DomainError(
                f"delete_index {self.delete_index} outside [0, {self.full_data.n})"
            )
        if self.sigma is not None and not self.sigma > 0:
            raise DomainError("sigma must be > 0 when provided")


@dataclass(frozen=True)
class UnlearnResult:
    w_out: np.ndarray
    certified: PrivacyParams
    audit: Mapping[str, Any] = field(default_factory=dict)


def _select_constants(
    calibration: str, retained: Dataset, loss: LossSpec
) -> tuple[CurvatureReport, CurvatureReport]:
    """(retain report, constants actually used) for the requested calibration."""
    report = curvature(retained, loss)
    if calibration == RETAIN:
        return report, report
    if calibration == GLOBAL:
        if loss.lam <= 0:
            raise UnboundedSensitivityError(
                "global calibration needs lam > 0 (worst-case curvature is zero)"
            )
        return report, worst_case_curvature(
            loss, retained.bound_b, retained.bound_rw, report.lipschitz
        )
    raise DomainError(f"calibration must be 'retain' or 'global', got {calibration!r}")


def d2d_iterations_raw(
    constants: CurvatureReport, n: int, sigma: float, params: PrivacyParams
) -> float:
    """Real-valued iteration requirement before the final ceiling.

    ``ln(L / (n lambda sigma b(eps, delta))) / ln(1 / gamma)`` for the
    contraction factor gamma of the chosen constants. Negative values mean
    the initial stability gap already fits under the certifiable shift.
    """
    if constants.degenerate:
        raise UnboundedSensitivityError("zero curvature: descent cannot contract")
    gamma = constants.gamma_r
    if not 0 < gamma < 1:
        raise DomainError(f"contraction factor must be in (0, 1), got {gamma}")
    if not sigma > 0:
        raise DomainError("sigma must be > 0")
    shift_budget = sigma * certifiable_shift_factor(params)
    initial_gap = constants.lipschitz / (n * constants.lambda_r)
    return math.log(initial_gap / shift_budget) / math.log(1.0 / gamma)


def d2d_iterations(
    constants: CurvatureReport, n: int, sigma: float, params: PrivacyParams
) -> int:
    """Projected-gradient steps certifying (eps, delta) at fixed noise sigma."""
    return max(0, math.ceil(d2d_iterations_raw(constants, n, sigma, params)))


def d2d_iteration_ratio(
    retain: CurvatureReport, worst: CurvatureReport, n: int, sigma: float,
    params: PrivacyParams,
) -> float:
    """Pre-ceiling retain/global iteration ratio.

    Equals ``ln(C_n / lambda_R) ln(gamma) / (ln(C_n / lambda) ln(gamma_R))``
    with ``C_n = L / (n sigma b(eps, delta))``. When both requirements are
    already nonpositive (zero steps either way) the ratio is reported as 1.
    """
    raw_retain = d2d_iterations_raw(retain, n, sigma, params)
    raw_global = d2d_iterations_raw(worst, n, sigma, params)
    if raw_retain <= 0 and raw_global <= 0:
        return 1.0
    return raw_retain / raw_global


def projected_gradient_steps(
    retained: Dataset,
    loss: LossSpec,
    w_start: np.ndarray,
    steps: int,
    step_size: float,
    track: bool = False,
) -> tuple[np.ndarray, list[np.ndarray], bool]:
    """Run projected gradient descent on the retained objective.

    Projects onto the ball ``||w|| <= R_w`` after every step. Returns the
    final iterate, the trajectory when ``track`` is set, and whether the
    projection was ever active.
    """
    w = np.array(w_start, dtype=float)
    trajectory: list[np.ndarray] = [w.copy()] if track else []
    projected = False
    for _ in range(steps):
        w = w - step_size * gradient(retained, loss, w)
        norm = float(np.linalg.norm(w))
        if norm > retained.bound_rw:
            w *= retained.bound_rw / norm
            projected = True
        if track:
            trajectory.append(w.copy())
    return w, trajectory, projected


def unlearn_d2d(
    request: UnlearnRequest,
    calibration: str = RETAIN,
    track_iterates: bool = False,
) -> UnlearnResult:
    """Descent-to-deletion: contract toward the retrained model, then add noise.

    Trains on the full sample, drops the requested point, runs the certified
    number of projected gradient steps on the retained objective at step size
    ``2 / (lambda + beta)`` for the chosen constants, and perturbs with the
    caller's fixed sigma.
    """
    if request.sigma is None:
        raise DomainError("the descent method needs an explicit noise sigma")
    retained = request.full_data.without_index(request.delete_index)
    report, constants = _select_constants(calibration, retained, request.loss)
    n = retained.n
    steps = d2d_iterations(constants, n, request.sigma, request.params)
    w_full = train(request.full_data, request.loss)
    w_pre, trajectory, projected = projected_gradient_steps(
        retained,
        request.loss,
        w_full,
        steps,
        constants.step_size,
        track=track_iterates,
    )
    spec = NoiseSpec(sigma=request.sigma, shape=VECTOR, dim=retained.d)
    w_out = w_pre + draw_noise(spec, request.seed)
    sensitivity = SensitivityReport(
        value=constants.lipschitz / (n * constants.lambda_r),
        kind=RETAIN if calibration == RETAIN else GLOBAL,
        inputs={"n": n, "lambda": constants.lambda_r, "L": constants.lipschitz},
        source="unlearn_d2d",
    )
    audit: dict[str, Any] = {
        "algorithm": "d2d",
        "calibration": calibration,
        "iterations": steps,
        "sigma": request.sigma,
        "step_size": constants.step_size,
        "gamma": constants.gamma_r,
        "lambda_used": constants.lambda_r,
        "lambda_retain": report.lambda_r,
        "sensitivity": sensitivity,
        "projection_active": projected,
        "seed": request.seed,
        "w_prenoise": w_pre,
    }
    if track_iterates:
        audit["iterates"] = trajectory
    return UnlearnResult(w_out=w_out, certified=request.params, audit=audit)


def newton_sigma(
    constants: CurvatureReport,
    n: int,
    params: PrivacyParams,
    dim: int,
    calibration: str = RETAIN,
) -> NoiseSpec:
    """Noise scale ``c_{eps,delta} * M L^2 / (lambda^3 n^2)`` of the Newton update."""
    if constants.degenerate:
        raise UnboundedSensitivityError("zero curvature: Newton noise unbounded")
    if constants.hessian_lipschitz < 0:
        raise DomainError("Hessian Lipschitz constant M must be >= 0")
    sensitivity = (
        constants.hessian_lipschitz
        * constants.lipschitz**2
        / (constants.lambda_r**3 * n**2)
    )
    sigma = sensitivity * noise_multiplier(params)
    return NoiseSpec(
        sigma=sigma,
        shape=VECTOR,
        dim=dim,
        audit={
            "algorithm": "newton",
            "calibration": calibration,
            "sensitivity": sensitivity,
            "lambda_used": constants.lambda_r,
            "M": constants.hessian_lipschitz,
            "L": constants.lipschitz,
            "n": n,
        },
    )


def unlearn_newton(request: UnlearnRequest, calibration: str = RETAIN) -> UnlearnResult:
    """One Newton correction toward the retrained model, then calibrated noise.

    The retained-sample Hessian at the trained point is recovered exactly from
    the full-sample Hessian and the deleted point's Hessian; its conditioning
    is checked before inversion.
    """
    full = request.full_data
    retained = full.without_index(request.delete_index)
    report, constants = _select_constants(calibration, retained, request.loss)
    n = retained.n
    w_full = train(full, request.loss)
    x_z = full.x[request.delete_index]
    y_z = float(full.require_labels()[request.delete_index])
    h_full = hessian(full, request.loss, w_full)
    h_point = point_hessian(request.loss, w_full, x_z, y_z)
    h_retained = ((n + 1) * h_full - h_point) / n
    smallest = float(np.linalg.eigvalsh(h_retained)[0])
    if smallest <= 0:
        raise UnboundedSensitivityError(
            f"recovered Hessian is not positive definite (lambda_min={smallest:.3g})"
        )
    correction = np.linalg.solve(h_retained, point_gradient(request.loss, w_full, x_z, y_z))
    w_pre = w_full + correction / n
    spec = newton_sigma(constants, n, request.params, retained.d, calibration)
    w_out = w_pre + draw_noise(spec, request.seed)
    audit: dict[str, Any] = {
        "algorithm": "newton",
        "calibration": calibration,
        "sigma": spec.sigma,
        "hessian_lambda_min": smallest,
        "lambda_used": constants.lambda_r,
        "lambda_retain": report.lambda_r,
        "noise_audit": spec.audit,
        "seed": request.seed,
        "w_prenoise": w_pre,
    }
    return UnlearnResult(w_out=w_out, certified=request.params, audit=audit)
