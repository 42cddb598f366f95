"""Seeded synthetic generators standing in for real datasets at desk scale."""

from __future__ import annotations

from typing import Any

import numpy as np

from ..erm import Dataset
from ..errors import DataError, DomainError
from ..mechanism import rng_from_seed
from ..median import ScalarSample
from ..mst import WeightedGraph

MSE_LABELS = "mse"
LOGISTIC_LABELS = "logistic"


def _ball_points(rng: np.random.Generator, n: int, d: int, radius: float) -> np.ndarray:
    # uniform on the radius-r ball: direction times r * U^(1/d)
    v = rng.normal(size=(n, d))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    r = radius * rng.uniform(size=(n, 1)) ** (1.0 / d)
    return v * r


def gaussian_blob(
    n: int,
    d: int,
    seed: int,
    bound_b: float = 1.0,
    bound_rw: float = 1.0,
    label_kind: str = MSE_LABELS,
    label_noise: float = 0.3,
) -> Dataset:
    """Well-conditioned features uniform in the B-ball with noisy linear labels.

    MSE labels are clipped to [-1, 1]; logistic labels are the sign of the
    noisy score, so moderate noise keeps the sample non-separable.
    """
    rng = rng_from_seed(seed)
    x = _ball_points(rng, n, d, bound_b)
    direction = rng.normal(size=d)
    direction /= np.linalg.norm(direction)
    score = x @ direction / bound_b + label_noise * rng.normal(size=n)
    if label_kind == MSE_LABELS:
        y = np.clip(score, -1.0, 1.0)
    elif label_kind == LOGISTIC_LABELS:
        y = np.where(score >= 0, 1.0, -1.0)
    else:
        raise DomainError(f"unknown label kind {label_kind!r}")
    return Dataset(
        x=x,
        y=y,
        bound_b=bound_b,
        bound_rw=bound_rw,
        meta={"generator": "gaussian_blob", "seed": seed, "label_kind": label_kind},
    )


def margin_separable(
    n: int,
    d: int,
    gamma: float,
    seed: int,
    bound_b: float = 1.0,
    bound_rw: float = 1.0,
    margin_spread: float = 0.5,
) -> Dataset:
    """Linearly separable sample whose functional margin is at least gamma.

    A fixed unit direction u scores every point: labels are the score's sign
    and scores are drawn from [gamma, gamma + margin_spread * (B - gamma)],
    so the distribution's margin along u is exactly gamma. The orthogonal
    component is sized to keep each point inside the B-ball.
    """
    if not 0 < gamma < bound_b:
        raise DomainError(f"need 0 < gamma < B, got gamma={gamma}, B={bound_b}")
    if d < 2:
        raise DomainError("need d >= 2 for an orthogonal component")
    rng = rng_from_seed(seed)
    u = np.zeros(d)
    u[0] = 1.0
    basis = np.eye(d)[:, 1:]
    labels = np.where(rng.uniform(size=n) < 0.5, 1.0, -1.0)
    hi = gamma + margin_spread * (bound_b - gamma)
    scores = rng.uniform(gamma, hi, size=n)
    ortho_dir = rng.normal(size=(n, d - 1))
    ortho_dir /= np.linalg.norm(ortho_dir, axis=1, keepdims=True)
    max_ortho = np.sqrt(np.maximum(bound_b**2 - scores**2, 0.0))
    ortho_len = rng.uniform(size=n) * max_ortho
    x = (labels * scores)[:, None] * u[None, :] + (
        ortho_dir * ortho_len[:, None]
    ) @ basis.T
    return Dataset(
        x=x,
        y=labels,
        bound_b=bound_b,
        bound_rw=bound_rw,
        meta={
            "generator": "margin_separable",
            "seed": seed,
            "gamma": gamma,
            "direction": u,
            "margin_spread": margin_spread,
        },
    )


def margin_candidate(
    rng: np.random.Generator,
    d: int,
    gamma: float,
    bound_b: float = 1.0,
    margin_spread: float = 0.5,
) -> tuple[np.ndarray, float]:
    """One additional point from the same margin-gamma distribution."""
    label = 1.0 if rng.uniform() < 0.5 else -1.0
    hi = gamma + margin_spread * (bound_b - gamma)
    score = rng.uniform(gamma, hi)
    ortho = rng.normal(size=d - 1)
    ortho /= np.linalg.norm(ortho)
    length = rng.uniform() * np.sqrt(max(bound_b**2 - score**2, 0.0))
    x = np.zeros(d)
    x[0] = label * score
    x[1:] = ortho * length
    return x, label


def uniform_scalar(n: int, seed: int, bound_b: float = 1.0) -> ScalarSample:
    rng = rng_from_seed(seed)
    return ScalarSample(values=rng.uniform(0.0, bound_b, size=n), bound_b=bound_b)


def random_graph(
    n: int,
    p: float,
    seed: int,
    bound_b: float = 1.0,
    max_attempts: int = 200,
) -> WeightedGraph:
    """Connected Erdos-Renyi graph with uniform [0, B] weights (resampled until connected)."""
    if not 0 < p <= 1:
        raise DomainError(f"edge probability must be in (0, 1], got {p}")
    rng = rng_from_seed(seed)
    for _ in range(max_attempts):
        edges = []
        for u in range(n):
            for v in range(u + 1, n):
                if rng.uniform() < p:
                    edges.append((u, v, float(rng.uniform(0.0, bound_b))))
        g = WeightedGraph(vertex_count=n, edges=tuple(edges), bound_b=bound_b)
        if g.is_connected():
            return g
    raise DataError(
        f"no connected graph in {max_attempts} draws (n={n}, p={p}); raise p"
    )


def generate_synthetic(
    kind: str, n: int, d: int, seed: int, **params: Any
) -> Dataset | ScalarSample | WeightedGraph:
    """Dispatch by generator name: gaussian_blob, margin_separable, uniform_scalar, random_graph."""
    if kind == "gaussian_blob":
        return gaussian_blob(n, d, seed, **params)
    if kind == "margin_separable":
        return margin_separable(n, d, seed=seed, **params)
    if kind == "uniform_scalar":
        return uniform_scalar(n, seed, **params)
    if kind == "random_graph":
        return random_graph(n, seed=seed, **params)
    raise DomainError(f"unknown synthetic generator {kind!r}")
