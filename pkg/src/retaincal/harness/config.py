"""Declarative sweep configuration: one INI file, sections per experiment.

Defaults mirror the reference protocol: retained sizes
{200, 500, 700, 1000, 1500}, regularizers 1e-5 ... 10 on a decade grid,
seeds 1..5, bounds B = R_w = 1, and a fixed certificate
(epsilon=1, delta=1e-5, sigma=0.1) for the active algorithms.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from ..errors import RetaincalError

EXPERIMENTS = (
    "passive_median",
    "passive_mst",
    "passive_pca",
    "passive_svm",
    "passive_mse",
    "passive_logloss",
    "active_d2d",
    "active_newton",
)

DEFAULT_N_GRID = (200, 500, 700, 1000, 1500)
DEFAULT_LAMBDA_GRID = (1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0)
DEFAULT_SEEDS = (1, 2, 3, 4, 5)


class ConfigError(RetaincalError, ValueError):
    """Malformed sweep configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    dataset: str = "synthetic"
    n_grid: tuple[int, ...] = DEFAULT_N_GRID
    lambda_grid: tuple[float, ...] = DEFAULT_LAMBDA_GRID
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    epsilon: float = 1.0
    delta: float = 1e-5
    sigma: float = 0.1
    bound_b: float = 1.0
    bound_rw: float = 1.0
    dim: int = 8
    oracle_trials: int = 0
    master_seed: int = 0
    output_dir: str = "results"
    workers: int = 1
    extras: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(
                f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}"
            )
        if not self.n_grid or not self.seeds or not self.lambda_grid:
            raise ConfigError("n_grid, lambda_grid and seeds must be nonempty")

    @property
    def uses_lambda(self) -> bool:
        return self.experiment in (
            "passive_mse",
            "passive_logloss",
            "active_d2d",
            "active_newton",
        )


def _parse_list(text: str, cast: type) -> tuple:
    tokens = text.replace(",", " ").split()
    try:
        return tuple(cast(float(t)) if cast is int else cast(t) for t in tokens)
    except ValueError as exc:
        raise ConfigError(f"cannot parse list {text!r}") from exc


_SCALAR_FIELDS: dict[str, type] = {
    "dataset": str,
    "epsilon": float,
    "delta": float,
    "sigma": float,
    "bound_b": float,
    "bound_rw": float,
    "dim": int,
    "oracle_trials": int,
    "master_seed": int,
    "output_dir": str,
    "workers": int,
}

_LIST_FIELDS: dict[str, type] = {"n_grid": int, "lambda_grid": float, "seeds": int}

# experiment-specific defaults where the shared grids make no sense
_PER_EXPERIMENT: dict[str, dict[str, Any]] = {
    "passive_median": {"n_grid": (101, 201, 401, 801), "lambda_grid": (0.0,)},
    "passive_mst": {"n_grid": (40,), "lambda_grid": (0.0,)},
    "passive_pca": {"n_grid": (200, 500, 1000), "lambda_grid": (0.0,)},
    "passive_svm": {"n_grid": (50, 100, 200, 400), "lambda_grid": (0.0,)},
}


def experiment_defaults(experiment: str) -> ExperimentConfig:
    base = ExperimentConfig(experiment=experiment)
    overrides = _PER_EXPERIMENT.get(experiment, {})
    return replace(base, **overrides) if overrides else base


def _apply_section(
    config: ExperimentConfig, section: configparser.SectionProxy
) -> ExperimentConfig:
    updates: dict[str, Any] = {}
    extras = dict(config.extras)
    for key, raw in section.items():
        if key in _SCALAR_FIELDS:
            cast = _SCALAR_FIELDS[key]
            try:
                updates[key] = cast(float(raw)) if cast is int else cast(raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {raw!r}") from exc
        elif key in _LIST_FIELDS:
            updates[key] = _parse_list(raw, _LIST_FIELDS[key])
        else:
            try:
                extras[key] = float(raw)
            except ValueError:
                extras[key] = raw
    updates["extras"] = extras
    return replace(config, **updates)


def load_config(
    path: str | Path | None, experiments: list[str] | None = None
) -> list[ExperimentConfig]:
    """Build experiment configs from an INI file plus an experiment filter.

    Layout: an optional ``[defaults]`` section applies everywhere; each
    ``[experiment:<name>]`` section both selects the experiment and overrides
    its settings. Without a file, the named experiments run on defaults.
    """
    parser = configparser.ConfigParser()
    if path is not None:
        read = parser.read(path)
        if not read:
            raise ConfigError(f"config file not found: {path}")
    selected: list[str] = []
    for section in parser.sections():
        if section.startswith("experiment:"):
            selected.append(section.split(":", 1)[1].strip())
    if experiments:
        selected = list(experiments)
    if not selected:
        raise ConfigError("no experiments selected (config sections or --experiment)")

    configs = []
    for name in selected:
        config = experiment_defaults(name)
        if parser.has_section("defaults"):
            config = _apply_section(config, parser["defaults"])
        section_name = f"experiment:{name}"
        if parser.has_section(section_name):
            config = _apply_section(config, parser[section_name])
        configs.append(config)
    return configs
