"""Hard-margin training, the norm-margin identity, and margin-driven bounds."""

import numpy as np
import pytest

from retaincal.erm import Dataset
from retaincal.errors import (
    ConvergenceError,
    DataError,
    DomainError,
    NonSeparableError,
)
from retaincal.harness.synth import margin_candidate, margin_separable
from retaincal.mechanism import rng_from_seed
from retaincal.svm import (
    KernelSpec,
    gram,
    gs_svm,
    oracle_rs_svm,
    rkhs_distance,
    rs_svm,
    train_hard_margin,
)


def two_point_problem():
    x = np.array([[1.0, 0.0], [-1.0, 0.0]])
    y = np.array([1.0, -1.0])
    return Dataset(x=x, y=y, bound_b=1.0)


def linear_w(data, report):
    return (report.alpha * data.require_labels()) @ data.x


class TestTraining:
    def test_two_point_analytic_solution(self):
        data = two_point_problem()
        report = train_hard_margin(data)
        assert report.gamma_r == pytest.approx(1.0, rel=1e-7)
        assert np.allclose(linear_w(data, report), [1.0, 0.0], atol=1e-6)

    def test_duplicated_sample_same_classifier(self):
        data = margin_separable(40, 4, 0.3, seed=0)
        doubled = Dataset(
            np.vstack([data.x, data.x]),
            np.concatenate([data.y, data.y]),
            bound_b=data.bound_b,
        )
        a = train_hard_margin(data)
        b = train_hard_margin(doubled)
        dist = rkhs_distance(
            KernelSpec(),
            data.x,
            a.alpha * data.require_labels(),
            doubled.x,
            b.alpha * doubled.require_labels(),
        )
        assert dist < 1e-5
        assert b.gamma_r == pytest.approx(a.gamma_r, rel=1e-7)

    def test_norm_margin_identity_fuzz(self):
        for seed in range(25):
            data = margin_separable(60, 5, 0.25, seed=seed)
            report = train_hard_margin(data)
            assert report.solution_norm * report.gamma_r == pytest.approx(1.0, rel=1e-9)
            # direct norm of the recovered linear classifier agrees
            w = linear_w(data, report)
            assert np.linalg.norm(w) == pytest.approx(report.solution_norm, rel=1e-6)

    def test_empirical_margin_at_least_construction_margin(self):
        for seed in range(10):
            data = margin_separable(80, 6, 0.2, seed=seed)
            report = train_hard_margin(data, true_margin=0.2)
            assert report.gamma_r >= 0.2 * (1 - 1e-9)

    def test_labels_validated(self):
        data = Dataset(np.eye(2), np.array([1.0, 0.5]), bound_b=1.0)
        with pytest.raises(DataError):
            train_hard_margin(data)

    def test_zero_norm_point_infeasible(self):
        data = Dataset(np.array([[0.0, 0.0], [1.0, 0.0]]), np.array([1.0, -1.0]), bound_b=1.0)
        with pytest.raises(NonSeparableError):
            train_hard_margin(data)

    def test_non_separable_hits_objective_cap(self):
        x = np.array([[0.5, 0.0], [0.5, 0.0], [0.0, 0.4]])
        y = np.array([1.0, -1.0, 1.0])
        data = Dataset(x, y, bound_b=1.0)
        with pytest.raises(NonSeparableError, match="cap"):
            train_hard_margin(data, objective_cap=50.0)

    def test_sweep_budget_diagnostic(self):
        x = np.array([[0.5, 0.0], [0.5, 0.0], [0.0, 0.4]])
        y = np.array([1.0, -1.0, 1.0])
        data = Dataset(x, y, bound_b=1.0)
        with pytest.raises(ConvergenceError):
            train_hard_margin(data, max_sweeps=10)

    def test_rbf_kernel_training(self):
        data = margin_separable(50, 4, 0.25, seed=3)
        report = train_hard_margin(data, KernelSpec(kind="rbf", bandwidth=1.0))
        assert report.gamma_r > 0
        assert report.solution_norm * report.gamma_r == pytest.approx(1.0, rel=1e-9)


class TestGram:
    def test_linear_gram(self):
        x = np.array([[1.0, 0.0], [0.0, 2.0]])
        assert np.allclose(gram(KernelSpec(), x), np.diag([1.0, 4.0]))

    def test_rbf_gram_diagonal_ones_and_psd(self):
        rng = rng_from_seed(4)
        x = rng.normal(size=(20, 3))
        k = gram(KernelSpec(kind="rbf", bandwidth=0.7), x)
        assert np.allclose(np.diag(k), 1.0)
        assert np.linalg.eigvalsh(k).min() > -1e-10


class TestBounds:
    def test_equal_margins_mean_zero_sensitivity(self):
        data = two_point_problem()
        report = train_hard_margin(data, true_margin=1.0)
        assert rs_svm(report).value == pytest.approx(0.0, abs=1e-6)

    def test_closed_form_value(self):
        report = train_hard_margin(two_point_problem()).with_true_margin(0.5)
        got = rs_svm(report)
        assert got.value == pytest.approx(np.sqrt(3.0), rel=1e-6)
        ratio = got.require_value() / gs_svm(0.5).require_value()
        assert ratio == pytest.approx(np.sqrt(3.0) / 2.0, rel=1e-6)

    def test_gs_examples(self):
        assert gs_svm(0.5).value == pytest.approx(2.0)
        assert gs_svm(1.0).value == pytest.approx(1.0)
        with pytest.raises(DomainError):
            gs_svm(0.0)

    def test_margin_hypothesis_violation_rejected(self):
        report = train_hard_margin(two_point_problem()).with_true_margin(0.5)
        inflated = report.with_true_margin(2.0)  # claims gamma > gamma_R
        with pytest.raises(DomainError, match="margin"):
            rs_svm(inflated)

    def test_missing_margin_rejected(self):
        report = train_hard_margin(two_point_problem())
        with pytest.raises(DomainError):
            rs_svm(report)


class TestGeometry:
    def test_projection_inequality(self):
        # ||w'||^2 - ||w||^2 >= ||w' - w||^2 for the augmented solution
        gamma = 0.25
        for seed in range(12):
            data = margin_separable(50, 4, gamma, seed=seed)
            base = train_hard_margin(data)
            rng = rng_from_seed(seed + 100)
            x_new, y_new = margin_candidate(rng, 4, gamma)
            augmented = data.with_point(x_new, y_new)
            moved = train_hard_margin(augmented)
            dist = rkhs_distance(
                KernelSpec(),
                data.x,
                base.alpha * data.require_labels(),
                augmented.x,
                moved.alpha * augmented.require_labels(),
            )
            gap = moved.solution_norm**2 - base.solution_norm**2
            assert gap >= dist**2 - 1e-6

    def test_margins_shrink_under_additions(self):
        gamma = 0.25
        for seed in range(12):
            data = margin_separable(50, 4, gamma, seed=seed)
            base = train_hard_margin(data)
            rng = rng_from_seed(seed + 200)
            x_new, y_new = margin_candidate(rng, 4, gamma)
            moved = train_hard_margin(data.with_point(x_new, y_new))
            assert moved.gamma_r <= base.gamma_r * (1 + 1e-7)  # KKT tol 1e-8


class TestOracle:
    def test_existing_support_vector_changes_nothing(self):
        data = margin_separable(40, 4, 0.3, seed=5)
        base = train_hard_margin(data)
        support = base.support_indices[0]
        measured = oracle_rs_svm(
            data,
            KernelSpec(),
            [(data.x[support], float(data.require_labels()[support]))],
            trial_count=1,
            seed=0,
        )
        assert measured.value == pytest.approx(0.0, abs=1e-5)

    def test_oracle_below_bound(self):
        gamma = 0.25
        data = margin_separable(60, 4, gamma, seed=6)
        report = train_hard_margin(data, true_margin=gamma)
        bound = rs_svm(report).require_value()
        measured = oracle_rs_svm(
            data,
            KernelSpec(),
            lambda rng: margin_candidate(rng, 4, gamma),
            trial_count=40,
            seed=1,
        ).require_value()
        assert measured <= bound + 1e-6
