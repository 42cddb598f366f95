"""Sweep execution: one row per evaluated cell, plus a mean/std summary.

Every cell derives its own 64-bit seed from the master seed and the cell key,
so results are reproducible regardless of worker count or completion order.
Cell failures become rows with a populated ``error`` column and the sweep
continues. Timing lives in the ``wall_time_s`` column, which is the one
column excluded from the byte-identity contract; the summary CSV contains no
timing and is byte-identical across re-runs.
"""

from __future__ import annotations

import hashlib
import math
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any

import numpy as np

from .. import active, erm, median, mst, pca, svm
from ..errors import RetaincalError
from ..mechanism import PrivacyParams, max_shift
from . import synth
from .config import ExperimentConfig
from .io import (
    REPORT_COLUMNS,
    REPORT_SCHEMA,
    SUMMARY_COLUMNS,
    SUMMARY_SCHEMA,
    atomic_write_csv,
    ingest_edges,
)

Row = dict[str, Any]


def derive_cell_seed(
    master_seed: int, experiment: str, dataset: str, n: int, lam: float, seed: int
) -> int:
    key = f"{master_seed}|{experiment}|{dataset}|{n}|{lam!r}|{seed}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big")


def _base_row(config: ExperimentConfig, n: int, lam: float, seed: int) -> Row:
    return {
        "experiment": config.experiment,
        "dataset": config.dataset,
        "n": n,
        "lam": lam if config.uses_lambda else None,
        "seed": seed,
        "calibration": None,
        "rs_value": None,
        "gs_value": None,
        "ratio": None,
        "oracle_value": None,
        "iterations": None,
        "sigma": None,
        "accuracy": None,
        "accuracy_retrain": None,
        "error": None,
        "wall_time_s": None,
    }


def _cell_median(config: ExperimentConfig, n: int, lam: float, seed: int, cell_seed: int) -> list[Row]:
    row = _base_row(config, n, lam, seed)
    n_odd = n if n % 2 == 1 else n + 1
    sample = synth.uniform_scalar(n_odd, cell_seed, config.bound_b)
    rs = median.rs_median(sample)
    gs = median.gs_median(config.bound_b)
    row.update(
        n=n_odd,
        rs_value=rs.value,
        gs_value=gs.value,
        ratio=rs.require_value() / gs.require_value(),
    )
    if config.oracle_trials > 0:
        row["oracle_value"] = median.oracle_rs_median(sample).value
    return [row]


def _cell_mst(config: ExperimentConfig, n: int, lam: float, seed: int, cell_seed: int) -> list[Row]:
    if config.dataset == "synthetic":
        graph = synth.random_graph(
            n=int(config.extras.get("graph_nodes", 150)),
            p=float(config.extras.get("graph_p", 0.08)),
            seed=cell_seed,
            bound_b=config.bound_b,
        )
    else:
        graph = ingest_edges(config.dataset)
    count = int(config.extras.get("subgraphs_per_cell", 5))
    subgraphs = mst.sample_subgraphs(
        graph,
        target_nodes=n,
        min_density=float(config.extras.get("min_density", 0.1)),
        count=count,
        seed=cell_seed + 1,
    )
    gs = mst.gs_mst_edge(graph.bound_b)
    rows = []
    for sub in subgraphs:
        row = _base_row(config, n, lam, seed)
        rs = mst.rs_mst_edge(sub)
        row.update(
            rs_value=rs.value,
            gs_value=gs.value,
            ratio=rs.require_value() / gs.require_value(),
        )
        if config.oracle_trials > 0 and n <= 12:
            row["oracle_value"] = mst.oracle_rs_mst(sub).value
        rows.append(row)
    return rows


def _centered_features(data: erm.Dataset, bound_b: float) -> np.ndarray:
    x = data.x - data.x.mean(axis=0)
    peak = float(np.linalg.norm(x, axis=1).max())
    if peak > 0:
        x = x * (bound_b / peak)
        x = x - x.mean(axis=0)  # rescaling amplifies centering roundoff
    return x


def _cell_pca(config: ExperimentConfig, n: int, lam: float, seed: int, cell_seed: int) -> list[Row]:
    row = _base_row(config, n, lam, seed)
    data = synth.gaussian_blob(n, config.dim, cell_seed, config.bound_b, config.bound_rw)
    x = _centered_features(data, config.bound_b)
    k = int(config.extras.get("k", 2))
    report = pca.spectral(pca.covariance(x, config.bound_b, require_centered=True), k)
    rs = pca.rs_pca_bound(report, n, config.bound_b)
    row.update(rs_value=rs.value)
    if config.oracle_trials > 0:
        row["oracle_value"] = pca.oracle_rs_pca(
            x, config.bound_b, k, trial_count=config.oracle_trials, seed=cell_seed + 1
        ).value
    return [row]


def _cell_svm(config: ExperimentConfig, n: int, lam: float, seed: int, cell_seed: int) -> list[Row]:
    row = _base_row(config, n, lam, seed)
    gamma = float(config.extras.get("gamma", 0.2))
    data = synth.margin_separable(
        n, config.dim, gamma, cell_seed, config.bound_b, config.bound_rw
    )
    report = svm.train_hard_margin(data, true_margin=gamma)
    rs = svm.rs_svm(report)
    gs = svm.gs_svm(gamma)
    row.update(
        rs_value=rs.value,
        gs_value=gs.value,
        ratio=rs.require_value() / gs.require_value(),
    )
    if config.oracle_trials > 0:
        row["oracle_value"] = svm.oracle_rs_svm(
            data,
            svm.KernelSpec(),
            lambda rng: synth.margin_candidate(rng, config.dim, gamma, config.bound_b),
            trial_count=config.oracle_trials,
            seed=cell_seed + 1,
        ).value
    return [row]


def _erm_cell(
    config: ExperimentConfig, n: int, lam: float, seed: int, cell_seed: int, kind: str
) -> list[Row]:
    row = _base_row(config, n, lam, seed)
    data = synth.gaussian_blob(
        n, config.dim, cell_seed, config.bound_b, config.bound_rw,
        label_kind=kind, label_noise=float(config.extras.get("label_noise", 0.3)),
    )
    loss = erm.LossSpec(kind=kind, lam=lam)
    report = erm.curvature(data, loss)
    rs = erm.rs_erm(report, n)
    gs = erm.gs_erm(report.lipschitz, n, lam)
    row.update(rs_value=rs.value, gs_value=gs.value)
    if not rs.unbounded and not gs.unbounded:
        row["ratio"] = rs.require_value() / gs.require_value()
    if config.oracle_trials > 0:
        row["oracle_value"] = erm.oracle_stability(
            data, loss, trial_count=config.oracle_trials, seed=cell_seed + 1
        ).value
    return [row]


def _cell_d2d(config: ExperimentConfig, n: int, lam: float, seed: int, cell_seed: int) -> list[Row]:
    row = _base_row(config, n, lam, seed)
    kind = str(config.extras.get("loss", "logistic"))
    full = synth.gaussian_blob(
        n + 1, config.dim, cell_seed, config.bound_b, config.bound_rw,
        label_kind=kind, label_noise=float(config.extras.get("label_noise", 0.3)),
    )
    loss = erm.LossSpec(kind=kind, lam=lam)
    params = PrivacyParams(config.epsilon, config.delta)
    request = active.UnlearnRequest(
        full_data=full,
        delete_index=n,
        loss=loss,
        params=params,
        sigma=config.sigma,
        seed=cell_seed,
    )
    retained = full.without_index(n)
    report = erm.curvature(retained, loss)
    worst = erm.worst_case_curvature(
        loss, config.bound_b, config.bound_rw, report.lipschitz
    )
    iter_retain = active.d2d_iterations(report, n, config.sigma, params)
    iter_global = active.d2d_iterations(worst, n, config.sigma, params)
    result = active.unlearn_d2d(request, calibration=active.RETAIN)
    w_retrained = erm.train(retained, loss)
    prenoise_distance = float(
        np.linalg.norm(result.audit["w_prenoise"] - w_retrained)
    )
    row.update(
        calibration=active.RETAIN,
        rs_value=float(iter_retain),
        gs_value=float(iter_global),
        ratio=active.d2d_iteration_ratio(report, worst, n, config.sigma, params),
        oracle_value=prenoise_distance,
        iterations=iter_retain,
        sigma=config.sigma,
    )
    return [row]


def _accuracy(w: np.ndarray, data: erm.Dataset) -> float:
    scores = data.x @ w
    predicted = np.where(scores >= 0, 1.0, -1.0)
    return float(np.mean(predicted == data.require_labels()))


def _cell_newton(config: ExperimentConfig, n: int, lam: float, seed: int, cell_seed: int) -> list[Row]:
    row = _base_row(config, n, lam, seed)
    test_n = int(config.extras.get("test_n", 2000)) if config.extras.get("accuracy") else 0
    pool = synth.gaussian_blob(
        n + 1 + test_n,
        config.dim,
        cell_seed,
        config.bound_b,
        config.bound_rw,
        label_kind="logistic",
        label_noise=float(config.extras.get("label_noise", 0.3)),
    )
    full = erm.Dataset(
        pool.x[: n + 1], pool.require_labels()[: n + 1],
        config.bound_b, config.bound_rw,
    )
    loss = erm.LossSpec(kind="logistic", lam=lam)
    params = PrivacyParams(config.epsilon, config.delta)
    retained = full.without_index(n)
    report = erm.curvature(retained, loss)
    worst = erm.worst_case_curvature(
        loss, config.bound_b, config.bound_rw, report.lipschitz
    )
    spec_retain = active.newton_sigma(report, n, params, retained.d, active.RETAIN)
    spec_global = active.newton_sigma(worst, n, params, retained.d, active.GLOBAL)
    request = active.UnlearnRequest(
        full_data=full, delete_index=n, loss=loss, params=params, seed=cell_seed
    )
    result = active.unlearn_newton(request, calibration=active.RETAIN)
    w_retrained = erm.train(retained, loss)
    prenoise_distance = float(np.linalg.norm(result.audit["w_prenoise"] - w_retrained))
    row.update(
        calibration=active.RETAIN,
        rs_value=spec_retain.sigma,
        gs_value=spec_global.sigma,
        ratio=spec_retain.sigma / spec_global.sigma,
        oracle_value=prenoise_distance,
        sigma=spec_retain.sigma,
    )
    if test_n:
        test = erm.Dataset(
            pool.x[n + 1 :], pool.require_labels()[n + 1 :],
            config.bound_b, config.bound_rw,
        )
        row["accuracy"] = _accuracy(result.w_out, test)
        row["accuracy_retrain"] = _accuracy(w_retrained, test)
    return [row]


_CELL_RUNNERS = {
    "passive_median": _cell_median,
    "passive_mst": _cell_mst,
    "passive_pca": _cell_pca,
    "passive_svm": _cell_svm,
    "passive_mse": lambda c, n, lam, s, cs: _erm_cell(c, n, lam, s, cs, "mse"),
    "passive_logloss": lambda c, n, lam, s, cs: _erm_cell(c, n, lam, s, cs, "logistic"),
    "active_d2d": _cell_d2d,
    "active_newton": _cell_newton,
}


def run_cell(config: ExperimentConfig, n: int, lam: float, seed: int) -> list[Row]:
    """Evaluate one (n, lambda, seed) cell; failures become error rows."""
    cell_seed = derive_cell_seed(
        config.master_seed, config.experiment, config.dataset, n, lam, seed
    )
    start = time.perf_counter()
    try:
        rows = _CELL_RUNNERS[config.experiment](config, n, lam, seed, cell_seed)
    except RetaincalError as exc:
        row = _base_row(config, n, lam, seed)
        row["error"] = f"{type(exc).__name__}: {exc}"
        rows = [row]
    elapsed = time.perf_counter() - start
    for row in rows:
        row["wall_time_s"] = round(elapsed / max(len(rows), 1), 6)
    return rows


def _cells(config: ExperimentConfig) -> list[tuple[int, float, int]]:
    lams = config.lambda_grid if config.uses_lambda else (0.0,)
    return [(n, lam, seed) for n in config.n_grid for lam in lams for seed in config.seeds]


def run_experiment(config: ExperimentConfig) -> list[Row]:
    """Run the full grid x seeds sweep, in order, optionally across processes."""
    cells = _cells(config)
    if config.workers <= 1:
        nested = [run_cell(config, *cell) for cell in cells]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            nested = list(pool.map(_run_cell_star, [(config, *cell) for cell in cells]))
    return [row for rows in nested for row in rows]


def _run_cell_star(args: tuple) -> list[Row]:
    config, n, lam, seed = args
    return run_cell(config, n, lam, seed)


def _aggregate(values: list[float | None]) -> tuple[float | None, float | None]:
    kept = [v for v in values if v is not None and math.isfinite(v)]
    if not kept:
        return None, None
    arr = np.asarray(kept, dtype=float)
    return float(arr.mean()), float(arr.std())


def summarize(rows: list[Row]) -> list[Row]:
    """Mean and population std per (experiment, dataset, n, lambda) cell group."""
    groups: dict[tuple, list[Row]] = {}
    for row in rows:
        if row.get("error"):
            continue
        key = (row["experiment"], row["dataset"], row["n"], row["lam"])
        groups.setdefault(key, []).append(row)
    out: list[Row] = []
    for key in sorted(groups, key=lambda k: (k[0], str(k[1]), k[2], k[3] if k[3] is not None else -1.0)):
        members = groups[key]
        summary: Row = {
            "experiment": key[0],
            "dataset": key[1],
            "n": key[2],
            "lam": key[3],
            "cells": len(members),
        }
        for column, prefix in (
            ("ratio", "ratio"),
            ("rs_value", "rs"),
            ("gs_value", "gs"),
            ("oracle_value", "oracle"),
        ):
            mean, std = _aggregate([m.get(column) for m in members])
            summary[f"{prefix}_mean"] = mean
            summary[f"{prefix}_std"] = std
        out.append(summary)
    return out


def write_reports(
    config: ExperimentConfig, rows: list[Row], output_dir: str | Path | None = None
) -> tuple[Path, Path]:
    out = Path(output_dir if output_dir is not None else config.output_dir)
    rows_path = out / f"{config.experiment}_rows.csv"
    summary_path = out / f"{config.experiment}_summary.csv"
    atomic_write_csv(rows_path, REPORT_SCHEMA, REPORT_COLUMNS, rows)
    atomic_write_csv(summary_path, SUMMARY_SCHEMA, SUMMARY_COLUMNS, summarize(rows))
    return rows_path, summary_path
