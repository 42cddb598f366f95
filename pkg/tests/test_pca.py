"""Projector sensitivity: perturbation inequalities and the noisy release path."""

import numpy as np
import pytest

from retaincal.errors import DataError, DomainError, UnboundedSensitivityError
from retaincal.mechanism import PrivacyParams, rng_from_seed
from retaincal.pca import (
    SpectralReport,
    covariance,
    oracle_rs_pca,
    project_rank_k,
    rs_pca_bound,
    spectral,
    unlearn_pca,
)


def random_psd(rng, d, scale=1.0):
    a = rng.normal(size=(d, d))
    return scale * (a @ a.T) / d


def centered_ball_data(rng, n, d, b=1.0, decay=None):
    x = rng.normal(size=(n, d))
    if decay is not None:
        x = x * np.asarray(decay)[None, :]
    x = x - x.mean(axis=0)
    x = x * (b / np.linalg.norm(x, axis=1).max())
    return x


class TestCovariance:
    def test_single_row_outer_product(self):
        x = np.array([[0.3, -0.4]])
        assert np.allclose(covariance(x, 1.0), np.outer(x[0], x[0]))

    def test_basis_rows_give_scaled_identity(self):
        d = 5
        assert np.allclose(covariance(np.eye(d), 1.0), np.eye(d) / d)

    def test_zero_data(self):
        assert not np.any(covariance(np.zeros((4, 3)), 1.0))

    def test_row_norm_enforced(self):
        with pytest.raises(DataError):
            covariance(np.array([[2.0, 0.0]]), 1.0)

    def test_centering_assertion_opt_in(self):
        x = np.array([[0.5, 0.0], [0.5, 0.1]])
        covariance(x, 1.0)  # fine without the flag
        with pytest.raises(DataError, match="centered"):
            covariance(x, 1.0, require_centered=True)


class TestSpectral:
    def test_diagonal_top_one(self):
        report = spectral(np.diag([3.0, 2.0, 1.0]), k=1)
        assert report.gap_k == 1.0
        assert np.allclose(report.projector, np.diag([1.0, 0.0, 0.0]))
        assert not report.degenerate

    def test_degenerate_gap_flagged(self):
        report = spectral(np.diag([2.0, 2.0, 1.0]), k=1)
        assert report.gap_k == pytest.approx(0.0, abs=1e-12)
        assert report.degenerate

    def test_projector_idempotent_with_correct_trace(self):
        rng = rng_from_seed(0)
        for k in (1, 2, 4):
            report = spectral(random_psd(rng, 6), k=k)
            p = report.projector
            assert np.linalg.norm(p - p.T, "fro") < 1e-10
            assert np.linalg.norm(p @ p - p, "fro") < 1e-8
            assert np.trace(p) == pytest.approx(k, abs=1e-8)

    def test_k_out_of_range(self):
        with pytest.raises(DomainError):
            spectral(np.eye(3), k=3)

    def test_projector_basis_invariance(self):
        # same top-k subspace from two factorizations gives the same matrix
        rng = rng_from_seed(1)
        a = random_psd(rng, 7)
        report = spectral(a, k=3)
        u, _, _ = np.linalg.svd(a)
        alt = u[:, :3] @ u[:, :3].T
        assert np.linalg.norm(report.projector - alt, "fro") < 1e-8


class TestRsPcaBound:
    def test_closed_form_value(self):
        report = SpectralReport(
            eigenvalues=np.array([1.0, 0.5]), k=1, gap_k=0.5, projector=np.eye(2)
        )
        got = rs_pca_bound(report, n=9, bound_b=1.0)
        assert got.value == pytest.approx(0.5656854249492380, rel=1e-12)

    def test_vanishes_for_huge_gap(self):
        report = SpectralReport(
            eigenvalues=np.array([1e9, 0.0]), k=1, gap_k=1e9, projector=np.eye(2)
        )
        assert rs_pca_bound(report, n=9, bound_b=1.0).require_value() < 1e-8

    def test_zero_gap_rejected(self):
        report = SpectralReport(
            eigenvalues=np.array([1.0, 1.0]), k=1, gap_k=0.0, projector=np.eye(2)
        )
        with pytest.raises(UnboundedSensitivityError):
            rs_pca_bound(report, n=9, bound_b=1.0)


class TestOracle:
    def test_zero_addition_never_moves_projector(self):
        rng = rng_from_seed(2)
        x = centered_ball_data(rng, 40, 5)
        base = spectral(covariance(x, 1.0), 2)
        n = x.shape[0]
        rescaled = spectral(covariance(x, 1.0) * n / (n + 1), 2)
        assert np.linalg.norm(base.projector - rescaled.projector, "fro") < 1e-10

    def test_oracle_below_bound(self):
        rng = rng_from_seed(3)
        for trial in range(20):
            x = centered_ball_data(rng, 50, 6)
            report = spectral(covariance(x, 1.0), 2)
            if report.degenerate:
                continue
            bound = rs_pca_bound(report, 50, 1.0).require_value()
            measured = oracle_rs_pca(x, 1.0, 2, trial_count=16, seed=trial).require_value()
            assert measured <= bound * (1 + 1e-9)

    def test_oracle_within_decade_of_bound_for_separated_spectrum(self):
        rng = rng_from_seed(4)
        x = centered_ball_data(
            rng, 300, 6, decay=[2.0, 1.0, 0.45, 0.2, 0.1, 0.05]
        )
        report = spectral(covariance(x, 1.0), 2)
        bound = rs_pca_bound(report, 300, 1.0).require_value()
        measured = oracle_rs_pca(x, 1.0, 2, trial_count=48, seed=9).require_value()
        assert measured <= bound
        assert measured >= bound / 10.0


class TestPerturbationInequalities:
    def test_covariance_shift_bounded(self):
        rng = rng_from_seed(5)
        b = 1.0
        for _ in range(200):
            n, d = int(rng.integers(5, 40)), int(rng.integers(2, 8))
            x = centered_ball_data(rng, n, d, b=b)
            z = rng.normal(size=d)
            z = z / np.linalg.norm(z) * b * rng.uniform()
            cov = covariance(x, b)
            cov_aug = (n * cov + np.outer(z, z)) / (n + 1)
            delta = cov_aug - cov
            limit = 2 * b**2 / (n + 1)
            assert np.linalg.norm(delta, 2) <= limit + 1e-12
            assert np.linalg.norm(delta, "fro") <= limit + 1e-12

    def test_sin_theta_frobenius_bound(self):
        rng = rng_from_seed(6)
        checked = 0
        while checked < 500:
            d = int(rng.integers(2, 8))
            k = int(rng.integers(1, d))
            a = random_psd(rng, d)
            perturbation = rng.normal(size=(d, d)) * rng.uniform(1e-3, 0.5)
            a_tilde = a + (perturbation + perturbation.T) / 2
            base = spectral(a, k)
            if base.gap_k < 1e-6:
                continue
            moved = spectral(a_tilde, k)
            lhs = np.linalg.norm(moved.projector - base.projector, "fro")
            rhs = np.sqrt(2) * np.linalg.norm(a_tilde - a, "fro") / base.gap_k
            assert lhs <= rhs + 1e-9
            checked += 1


class TestUnlearnPca:
    def test_zero_noise_limit_is_exact_projection(self):
        rng = rng_from_seed(7)
        x = centered_ball_data(rng, 60, 5)
        report = spectral(covariance(x, 1.0), 2)
        huge_gap = SpectralReport(
            eigenvalues=report.eigenvalues, k=2, gap_k=1e12, projector=report.projector
        )
        noisy = report.projector + 1e-3 * np.eye(5)
        released, spec = unlearn_pca(
            noisy, huge_gap, n=60, bound_b=1.0, params=PrivacyParams(1.0, 1e-5), seed=0
        )
        assert spec.sigma < 1e-9
        assert np.linalg.norm(released - project_rank_k(noisy, 2), "fro") < 1e-6

    def test_output_is_rank_k_projector(self):
        rng = rng_from_seed(8)
        x = centered_ball_data(rng, 80, 6)
        report = spectral(covariance(x, 1.0), 2)
        released, _ = unlearn_pca(
            report.projector, report, n=80, bound_b=1.0,
            params=PrivacyParams(1.0, 1e-5), seed=3,
        )
        assert np.linalg.norm(released @ released - released, "fro") < 1e-8
        assert np.trace(released) == pytest.approx(2.0, abs=1e-8)

    def test_noise_depends_only_on_retained_quantities(self):
        rng = rng_from_seed(9)
        x = centered_ball_data(rng, 80, 6)
        report = spectral(covariance(x, 1.0), 2)
        params = PrivacyParams(1.0, 1e-5)
        _, spec_a = unlearn_pca(report.projector, report, 80, 1.0, params, seed=5)
        other_trained = project_rank_k(report.projector + 0.05 * np.eye(6), 2)
        _, spec_b = unlearn_pca(other_trained, report, 80, 1.0, params, seed=5)
        assert spec_a == spec_b
