import numpy as np
import pytest
from scipy.stats import norm

from subspace_meta import (
    DimensionError,
    InvariantError,
    MetricsReport,
    ProjectionMatrix,
    RngStream,
    StiefelPoint,
    coverage_radius,
    empirical_coverage,
    kl_gaussian_and_bound,
    principal_angles,
    projection_from_basis,
    r_squared,
    sample_uniform_stiefel,
    sin2_theta_series,
)
from subspace_meta.metrics import spectral_norm

import oracles


class TestRSquared:
    def test_perfect_fit(self):
        y = np.array([1.0, 2.0, 3.0])
        assert r_squared(y, y) == 1.0

    def test_mean_prediction(self):
        y = np.array([1.0, 2.0, 3.0])
        assert abs(r_squared(y, np.full(3, 2.0))) < 1e-15

    def test_hand_value(self):
        assert abs(r_squared([0.0, 1.0, 2.0], [0.0, 1.0, 1.0]) - 0.5) < 1e-15

    def test_constant_truth_rejected(self):
        with pytest.raises(ValueError):
            r_squared([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_common_shift_invariance(self):
        gen = np.random.default_rng(0)
        y = gen.standard_normal(10)
        yh = y + 0.3 * gen.standard_normal(10)
        base = r_squared(y, yh)
        shifted = r_squared(y + 5.0, yh + 5.0)
        assert abs(base - shifted) < 1e-12


class TestCoverageRadius:
    def test_all_draws_at_center(self):
        draws = np.zeros((150, 2))
        assert coverage_radius(draws, np.zeros(2), 0.95) == 0.0

    def test_order_statistic(self):
        # distances 1..100 at level .95 -> the 95th smallest
        draws = np.arange(1.0, 101.0)[:, None]
        assert coverage_radius(draws, np.zeros(1), 0.95) == 95.0

    def test_gaussian_quantile(self):
        gen = RngStream(1).generator()
        draws = gen.standard_normal((200_000, 1))
        r = coverage_radius(draws, np.zeros(1), 0.95)
        target = norm.ppf(0.975)
        assert abs(r - target) < 0.03

    def test_monotone_in_level(self):
        gen = RngStream(2).generator()
        draws = gen.standard_normal((5_000, 3))
        center = np.zeros(3)
        rads = [coverage_radius(draws, center, q) for q in (0.5, 0.8, 0.9, 0.95, 0.99)]
        assert all(a <= b for a, b in zip(rads, rads[1:]))

    def test_too_few_draws(self):
        with pytest.raises(ValueError):
            coverage_radius(np.zeros((50, 1)), np.zeros(1), 0.95)


class TestEmpiricalCoverage:
    def test_infinite_radius(self):
        assert empirical_coverage(np.inf, np.ones((5, 2)), np.zeros(2)) == 1.0

    def test_zero_radius_distinct(self):
        assert empirical_coverage(0.0, np.ones((5, 2)), np.zeros(2)) == 0.0

    def test_self_consistency(self):
        gen = RngStream(3).generator()
        draws = gen.standard_normal((2_000, 2))
        center = np.zeros(2)
        for q in (0.5, 0.9, 0.95):
            r = coverage_radius(draws, center, q)
            assert empirical_coverage(r, draws, center) >= q


class TestSpectralNorm:
    def test_matches_svd(self):
        gen = np.random.default_rng(4)
        for _ in range(10):
            X = gen.standard_normal((int(gen.integers(2, 9)), int(gen.integers(2, 9))))
            assert abs(spectral_norm(X) - np.linalg.svd(X, compute_uv=False)[0]) < 1e-8


class TestKlBound:
    def _random_state(self, p, k, seed):
        z = sample_uniform_stiefel(p, k, RngStream(seed))
        return projection_from_basis(z)

    def test_equal_parameters_zero(self):
        p0 = self._random_state(4, 2, 5)
        gen = np.random.default_rng(6)
        X = gen.standard_normal((5, 4))
        res = kl_gaussian_and_bound(p0, 0.1, p0, 0.1, X, 0.5)
        assert abs(res.kl) <= 1e-12
        assert res.bound == 0.0

    def test_matches_dense_oracle(self):
        p0 = self._random_state(3, 1, 7)
        p1 = self._random_state(3, 1, 8)
        gen = np.random.default_rng(9)
        X = gen.standard_normal((4, 3))
        phi = 0.2
        res = kl_gaussian_and_bound(p1, phi, p0, phi, X, 0.7)
        eye = np.eye(3)
        cov0 = X @ (p0.matrix + phi * (eye - p0.matrix)) @ X.T + 0.7 * np.eye(4)
        cov1 = X @ (p1.matrix + phi * (eye - p1.matrix)) @ X.T + 0.7 * np.eye(4)
        assert abs(res.kl - oracles.dense_gaussian_kl(cov0, cov1)) < 1e-10

    def test_bound_holds_on_random_perturbations(self):
        gen = np.random.default_rng(10)
        p0 = self._random_state(6, 2, 11)
        X = gen.standard_normal((8, 6))
        for i in range(60):
            p1 = self._random_state(6, 2, 100 + i)
            phi = float(gen.uniform(0.02, 0.98))
            phi0 = float(gen.uniform(0.02, 0.98))
            res = kl_gaussian_and_bound(p1, phi, p0, phi0, X, 0.4)
            assert res.kl >= -1e-12
            assert res.kl <= res.bound + 1e-9 * max(1.0, res.bound)
            assert abs(sum(res.bound_terms) - res.bound) < 1e-9 * max(1.0, res.bound)

    def test_dimension_mismatch(self):
        a = self._random_state(4, 2, 12)
        b = self._random_state(4, 1, 13)
        with pytest.raises(DimensionError):
            kl_gaussian_and_bound(a, 0.1, b, 0.1, np.eye(4), 1.0)


class TestSin2Series:
    def test_exact_truth_draws(self):
        p0 = projection_from_basis(sample_uniform_stiefel(4, 2, RngStream(14)))
        series = sin2_theta_series([p0, p0, p0], p0)
        assert np.allclose(series, 0.0, atol=1e-14)

    def test_orthogonal_draws(self):
        p0 = projection_from_basis(StiefelPoint(np.eye(4)[:, :2]))
        ortho = projection_from_basis(StiefelPoint(np.eye(4)[:, 2:]))
        series = sin2_theta_series([ortho, ortho], p0)
        assert np.allclose(series, 1.0, atol=1e-12)

    def test_elementwise_recomputation(self):
        p0 = projection_from_basis(sample_uniform_stiefel(5, 2, RngStream(15)))
        projs = [
            projection_from_basis(sample_uniform_stiefel(5, 2, RngStream(16, (i,))))
            for i in range(10)
        ]
        series = sin2_theta_series(projs, p0)
        manual = [principal_angles(p, p0).sin2_theta1 for p in projs]
        assert series == manual


class TestMetricsReport:
    def test_ranges_validated(self):
        MetricsReport(sin2_theta1=[0.1, 0.9], r_squared=0.5, coverage_radius=1.0,
                      coverage_probability=0.95, trace_sigma_y=2.0, variance_proportion=0.8)
        with pytest.raises(InvariantError):
            MetricsReport(sin2_theta1=[1.5])
        with pytest.raises(InvariantError):
            MetricsReport(coverage_probability=1.5)
