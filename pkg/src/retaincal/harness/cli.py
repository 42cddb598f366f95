"""Command-line interface.

Subcommands: ``sensitivity`` (bounds for one instance), ``oracle``
(brute-force counterparts), ``unlearn`` (run one deletion request), ``sweep``
(full experiment grids to CSV), ``selftest`` (fast internal checks).

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
degeneracy or solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any

import numpy as np

from .. import active, erm, median, mst, pca, svm
from ..errors import (
    ConditionError,
    ConvergenceError,
    DataError,
    DomainError,
    NonSeparableError,
    UnboundedSensitivityError,
)
from ..mechanism import PrivacyParams
from . import synth
from .config import ConfigError, load_config
from .experiments import run_experiment, write_reports
from .io import ingest_csv, ingest_edges

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


def _report_json(payload: dict[str, Any], out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, default=_default)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _default(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _kernel_spec(args: argparse.Namespace) -> svm.KernelSpec:
    return svm.KernelSpec(kind=args.kernel, bandwidth=args.bandwidth)


def _recenter(x: np.ndarray, bound_b: float) -> np.ndarray:
    x = x - x.mean(axis=0)
    peak = float(np.linalg.norm(x, axis=1).max())
    if peak > 0:
        x = x * (bound_b / peak)
        x = x - x.mean(axis=0)  # rescaling amplifies centering roundoff
    return x


def _load_erm_dataset(args: argparse.Namespace) -> erm.Dataset:
    if args.data:
        return ingest_csv(
            args.data,
            label_column=args.label_column,
            standardize=args.standardize,
            project_to_b=True,
            jl_target_dim=args.jl_dim,
            seed=args.seed,
            bound_b=args.bound_b,
            bound_rw=args.bound_rw,
            normalize_labels=args.normalize_labels,
        )
    return synth.gaussian_blob(
        args.n,
        args.dim,
        args.seed,
        args.bound_b,
        args.bound_rw,
        label_kind=args.loss,
    )


def _cmd_sensitivity(args: argparse.Namespace) -> int:
    problem = args.problem
    if problem == "median":
        if args.data:
            values = np.loadtxt(args.data, ndmin=1)
            sample = median.ScalarSample(values=values, bound_b=args.bound_b)
        else:
            sample = synth.uniform_scalar(args.n, args.seed, args.bound_b)
        rs = median.rs_median(sample)
        gs = median.gs_median(args.bound_b)
    elif problem == "mst":
        graph = (
            ingest_edges(args.data)
            if args.data
            else synth.random_graph(args.n, 0.1, args.seed, args.bound_b)
        )
        rs = mst.rs_mst_edge(graph)
        gs = mst.gs_mst_edge(graph.bound_b)
    elif problem == "pca":
        data = _load_erm_dataset(args)
        x = _recenter(data.x, args.bound_b)
        report = pca.spectral(pca.covariance(x, args.bound_b, require_centered=True), args.k)
        rs = pca.rs_pca_bound(report, data.n, args.bound_b)
        gs = None
        if args.export_projector:
            pca.export_projector_csv(args.export_projector, report.projector)
    elif problem == "svm":
        data = (
            synth.margin_separable(args.n, args.dim, args.gamma, args.seed, args.bound_b)
            if not args.data
            else _load_erm_dataset(args)
        )
        trained = svm.train_hard_margin(
            data, _kernel_spec(args), true_margin=args.gamma
        )
        rs = svm.rs_svm(trained)
        gs = svm.gs_svm(args.gamma)
    elif problem in ("mse", "logistic"):
        args.loss = problem
        data = _load_erm_dataset(args)
        loss = erm.LossSpec(kind=problem, lam=args.lam)
        report = erm.curvature(data, loss)
        rs = erm.rs_erm(report, data.n)
        gs = erm.gs_erm(report.lipschitz, data.n, args.lam)
    else:
        raise ConfigError(f"unknown problem {problem!r}")
    payload: dict[str, Any] = {
        "problem": problem,
        "rs": None if rs.unbounded else rs.value,
        "rs_unbounded": rs.unbounded,
        "inputs": dict(rs.inputs),
    }
    if gs is not None:
        payload["gs"] = None if gs.unbounded else gs.value
        payload["gs_unbounded"] = gs.unbounded
        if not rs.unbounded and not gs.unbounded:
            payload["ratio"] = rs.require_value() / gs.require_value()
    _report_json(payload, args.out)
    return EXIT_OK


def _cmd_oracle(args: argparse.Namespace) -> int:
    problem = args.problem
    if problem == "median":
        sample = synth.uniform_scalar(args.n, args.seed, args.bound_b)
        bound = median.rs_median(sample)
        measured = median.oracle_rs_median(sample, grid_points=args.trials)
    elif problem == "mst":
        graph = synth.random_graph(min(args.n, 10), 0.4, args.seed, args.bound_b)
        bound = mst.rs_mst_edge(graph)
        measured = mst.oracle_rs_mst(graph)
    elif problem == "pca":
        data = synth.gaussian_blob(args.n, args.dim, args.seed, args.bound_b)
        x = _recenter(data.x, args.bound_b)
        report = pca.spectral(pca.covariance(x, args.bound_b, require_centered=True), args.k)
        bound = pca.rs_pca_bound(report, data.n, args.bound_b)
        measured = pca.oracle_rs_pca(x, args.bound_b, args.k, args.trials, args.seed)
    elif problem == "svm":
        data = synth.margin_separable(args.n, args.dim, args.gamma, args.seed, args.bound_b)
        trained = svm.train_hard_margin(data, _kernel_spec(args), true_margin=args.gamma)
        bound = svm.rs_svm(trained)
        measured = svm.oracle_rs_svm(
            data,
            _kernel_spec(args),
            lambda rng: synth.margin_candidate(rng, args.dim, args.gamma, args.bound_b),
            trial_count=args.trials,
            seed=args.seed,
        )
    elif problem in ("mse", "logistic"):
        args.loss = problem
        data = _load_erm_dataset(args)
        loss = erm.LossSpec(kind=problem, lam=args.lam)
        bound = erm.rs_erm(erm.curvature(data, loss), data.n)
        measured = erm.oracle_stability(data, loss, trial_count=args.trials, seed=args.seed)
    else:
        raise ConfigError(f"unknown problem {problem!r}")
    payload = {
        "problem": problem,
        "bound": None if bound.unbounded else bound.value,
        "oracle": measured.value,
        "dominated": bool(bound.unbounded or measured.require_value() <= bound.require_value() * (1 + 1e-9)),
    }
    _report_json(payload, args.out)
    return EXIT_OK


def _cmd_unlearn(args: argparse.Namespace) -> int:
    data = _load_erm_dataset(args)
    loss = erm.LossSpec(kind=args.loss, lam=args.lam)
    params = PrivacyParams(args.epsilon, args.delta)
    request = active.UnlearnRequest(
        full_data=data,
        delete_index=args.delete_index,
        loss=loss,
        params=params,
        sigma=args.sigma if args.algo == "d2d" else None,
        seed=args.seed,
    )
    if args.algo == "d2d":
        result = active.unlearn_d2d(request, calibration=args.calibration)
    else:
        result = active.unlearn_newton(request, calibration=args.calibration)
    audit = {
        k: v
        for k, v in result.audit.items()
        if k not in ("iterates", "w_prenoise", "sensitivity", "noise_audit")
    }
    _report_json(
        {
            "algorithm": args.algo,
            "calibration": args.calibration,
            "epsilon": params.epsilon,
            "delta": params.delta,
            "w_out": result.w_out,
            "audit": audit,
        },
        args.out,
    )
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    configs = load_config(args.config, args.experiment or None)
    for config in configs:
        if args.out:
            config = replace(config, output_dir=args.out)
        if args.workers is not None:
            config = replace(config, workers=args.workers)
        if args.master_seed is not None:
            config = replace(config, master_seed=args.master_seed)
        rows = run_experiment(config)
        rows_path, summary_path = write_reports(config, rows)
        failures = sum(1 for r in rows if r.get("error"))
        print(f"{config.experiment}: {len(rows)} rows ({failures} failed) -> {rows_path}, {summary_path}")
    return EXIT_OK


def _cmd_selftest(args: argparse.Namespace) -> int:
    del args
    checks: list[tuple[str, bool]] = []

    sample = median.ScalarSample(values=np.array([1.0, 2.0, 3.0, 4.0, 5.0]), bound_b=10.0)
    checks.append(("median rs=0.5", abs(median.rs_median(sample).require_value() - 0.5) < 1e-12))
    checks.append(
        ("median oracle match", median.oracle_rs_median(sample).require_value() == 0.5)
    )

    graph = synth.random_graph(8, 0.4, 3)
    checks.append(
        (
            "mst oracle match",
            mst.rs_mst_edge(graph).require_value()
            == mst.oracle_rs_mst(graph).require_value(),
        )
    )

    data = synth.gaussian_blob(120, 6, 0, label_kind="logistic")
    loss = erm.LossSpec("logistic", 0.01)
    report = erm.curvature(data, loss)
    rs, gs = erm.rs_erm(report, data.n), erm.gs_erm(report.lipschitz, data.n, 0.01)
    checks.append(
        (
            "erm ratio identity",
            abs(rs.require_value() / gs.require_value() - 0.01 / report.lambda_r) < 1e-12,
        )
    )

    sep = synth.margin_separable(60, 5, 0.2, 1)
    trained = svm.train_hard_margin(sep, true_margin=0.2)
    checks.append(
        (
            "svm norm identity",
            abs(trained.solution_norm * trained.gamma_r - 1.0) < 1e-6,
        )
    )

    ok = True
    for name, passed in checks:
        print(f"{'PASS' if passed else 'FAIL'}  {name}")
        ok = ok and passed
    return EXIT_OK if ok else 1


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", help="dataset CSV (or edge list for mst)")
    parser.add_argument("--label-column", dest="label_column", default=None)
    parser.add_argument("--standardize", action="store_true")
    parser.add_argument("--normalize-labels", dest="normalize_labels", action="store_true")
    parser.add_argument("--jl-dim", dest="jl_dim", type=int, default=None)
    parser.add_argument("--n", type=int, default=201)
    parser.add_argument("--dim", type=int, default=8)
    parser.add_argument("--k", type=int, default=2)
    parser.add_argument("--kernel", choices=("linear", "rbf"), default="linear")
    parser.add_argument("--bandwidth", type=float, default=1.0)
    parser.add_argument("--gamma", type=float, default=0.2)
    parser.add_argument("--export-projector", dest="export_projector", default=None)
    parser.add_argument("--lam", type=float, default=0.01)
    parser.add_argument("--loss", choices=("mse", "logistic"), default="logistic")
    parser.add_argument("--bound-b", dest="bound_b", type=float, default=1.0)
    parser.add_argument("--bound-rw", dest="bound_rw", type=float, default=1.0)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="retaincal",
        description="Retain-calibrated noise for certified machine unlearning.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sens = sub.add_parser("sensitivity", help="retain/global sensitivity for one instance")
    p_sens.add_argument("problem", choices=("median", "mst", "pca", "svm", "mse", "logistic"))
    _add_common(p_sens)
    p_sens.set_defaults(func=_cmd_sensitivity)

    p_oracle = sub.add_parser("oracle", help="brute-force oracle vs the closed-form bound")
    p_oracle.add_argument("problem", choices=("median", "mst", "pca", "svm", "mse", "logistic"))
    p_oracle.add_argument("--trials", type=int, default=64)
    _add_common(p_oracle)
    p_oracle.set_defaults(func=_cmd_oracle)

    p_unlearn = sub.add_parser("unlearn", help="run one deletion request")
    p_unlearn.add_argument("algo", choices=("d2d", "newton"))
    p_unlearn.add_argument("--delete-index", dest="delete_index", type=int, default=0)
    p_unlearn.add_argument("--calibration", choices=("retain", "global"), default="retain")
    p_unlearn.add_argument("--epsilon", type=float, default=1.0)
    p_unlearn.add_argument("--delta", type=float, default=1e-5)
    p_unlearn.add_argument("--sigma", type=float, default=0.1)
    _add_common(p_unlearn)
    p_unlearn.set_defaults(func=_cmd_unlearn)

    p_sweep = sub.add_parser("sweep", help="run configured experiment grids to CSV")
    p_sweep.add_argument("--config", default=None)
    p_sweep.add_argument("--experiment", action="append", default=[])
    p_sweep.add_argument("--out", default=None)
    p_sweep.add_argument("--workers", type=int, default=None)
    p_sweep.add_argument("--master-seed", dest="master_seed", type=int, default=None)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_self = sub.add_parser("selftest", help="fast internal consistency checks")
    p_self.set_defaults(func=_cmd_selftest)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (
        UnboundedSensitivityError,
        ConvergenceError,
        NonSeparableError,
        ConditionError,
        DomainError,
    ) as exc:
        print(f"numerical degeneracy: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
