import math

import numpy as np
import pytest
from scipy.stats import ks_2samp

from subspace_meta import (
    BinghamParam,
    NotPositiveDefiniteError,
    RngStream,
    StiefelPoint,
    ThetaConditionalCoeffs,
    mh_theta_update,
    sample_matrix_bingham,
    sample_matrix_vmf,
    sample_mvn,
    sample_polya_gamma_1,
    sample_trunc_inverse_gamma,
    sample_uniform_stiefel,
    sample_vector_bingham,
    sample_vector_vmf,
)
from subspace_meta.samplers import (
    _vector_bmf_step,
    theta_log_density,
    theta_proposal_log_density,
)

import oracles


class TestRngStream:
    def test_bitwise_reproducible(self):
        a = RngStream(123, (4, 5)).generator().standard_normal(100)
        b = RngStream(123, (4, 5)).generator().standard_normal(100)
        assert np.array_equal(a, b)

    def test_distinct_paths_differ(self):
        a = RngStream(123, (4, 5)).generator().standard_normal(10)
        b = RngStream(123, (4, 6)).generator().standard_normal(10)
        assert not np.array_equal(a, b)

    def test_child_is_order_independent(self):
        root = RngStream(9)
        first = [root.child(i).generator().random() for i in range(5)]
        second = [root.child(i).generator().random() for i in reversed(range(5))]
        assert first == list(reversed(second))


class TestMvn:
    def test_identity_cov_moments(self):
        gen = RngStream(1).generator()
        draws = np.array([sample_mvn(np.zeros(2), cov=np.eye(2), rng=gen) for _ in range(20_000)])
        cov = np.cov(draws.T)
        assert np.max(np.abs(cov - np.eye(2))) < 3 * math.sqrt(2.0 / draws.shape[0]) * 3

    def test_degenerate_limit(self):
        mu = np.array([2.0, -1.0])
        x = sample_mvn(mu, cov=1e-16 * np.eye(2), rng=RngStream(2))
        assert np.max(np.abs(x - mu)) < 1e-6

    def test_precision_and_covariance_paths_agree(self):
        sigma = np.array([[2.0, 1.0], [1.0, 2.0]])
        prec = np.linalg.inv(sigma)
        gen_a = RngStream(3).generator()
        gen_b = RngStream(4).generator()
        a = np.array([sample_mvn(np.zeros(2), cov=sigma, rng=gen_a) for _ in range(30_000)])
        b = np.array([sample_mvn(np.zeros(2), prec=prec, rng=gen_b) for _ in range(30_000)])
        for mat in (a, b):
            emp = mat.T @ mat / mat.shape[0]
            assert np.max(np.abs(emp - sigma)) < 0.06
        assert np.max(np.abs(a.mean(axis=0) - b.mean(axis=0))) < 0.04

    def test_not_positive_definite(self):
        with pytest.raises(NotPositiveDefiniteError):
            sample_mvn(np.zeros(2), cov=np.array([[1.0, 2.0], [2.0, 1.0]]), rng=RngStream(5))


class TestTruncInverseGamma:
    def test_untruncated_mean(self):
        gen = RngStream(6).generator()
        draws = np.array([sample_trunc_inverse_gamma(2.0, 1.0, 0.0, np.inf, gen) for _ in range(100_000)])
        oracles.assert_within_mc(draws.mean(), 1.0, draws)

    def test_truncation_respected(self):
        gen = RngStream(7).generator()
        draws = [sample_trunc_inverse_gamma(1.5, 2.0, 0.0, 1.0, gen) for _ in range(5_000)]
        assert all(0.0 < d < 1.0 for d in draws)

    def test_high_shape_truncation_inactive(self):
        gen = RngStream(8).generator()
        trunc = np.array([sample_trunc_inverse_gamma(50.0, 1.0, 0.0, 1.0, gen) for _ in range(50_000)])
        target = oracles.inverse_gamma_mean_quad(50.0, 1.0, 0.0, 1.0)
        untarget = oracles.inverse_gamma_mean_quad(50.0, 1.0, 0.0, np.inf)
        assert abs(target - untarget) < 1e-6
        oracles.assert_within_mc(trunc.mean(), target, trunc)

    def test_tv_against_quadrature(self):
        gen = RngStream(9).generator()
        draws = np.array([sample_trunc_inverse_gamma(3.0, 2.0, 0.3, 1.5, gen) for _ in range(50_000)])
        edges = np.linspace(0.3, 1.5, 41)
        counts, _ = np.histogram(draws, bins=edges)
        masses = oracles.inverse_gamma_bin_masses(3.0, 2.0, edges)
        assert oracles.tv_distance(counts, masses) < 0.05

    def test_underflowing_mass_uses_fallback(self):
        gen = RngStream(10).generator()
        draws = np.array([sample_trunc_inverse_gamma(1.0, 500.0, 0.0, 1.0, gen) for _ in range(5_000)])
        assert np.all((draws > 0) & (draws < 1))
        # mode of IG(1, 500) sits far above 1, so mass piles at the boundary
        assert draws.min() > 0.9

    def test_interval_far_in_tail(self):
        gen = RngStream(11).generator()
        draws = np.array([sample_trunc_inverse_gamma(2.0, 1.0, 50.0, 60.0, gen) for _ in range(5_000)])
        assert np.all((draws > 50.0) & (draws < 60.0))
        target = oracles.inverse_gamma_mean_quad(2.0, 1.0, 50.0, 60.0)
        oracles.assert_within_mc(draws.mean(), target, draws)


class TestPolyaGamma:
    def test_zero_tilt_mean(self):
        gen = RngStream(12).generator()
        draws = np.array([sample_polya_gamma_1(0.0, gen) for _ in range(50_000)])
        oracles.assert_within_mc(draws.mean(), 0.25, draws)

    def test_tilted_mean(self):
        gen = RngStream(13).generator()
        draws = np.array([sample_polya_gamma_1(2.0, gen) for _ in range(50_000)])
        oracles.assert_within_mc(draws.mean(), math.tanh(1.0) / 4.0, draws)

    def test_laplace_transform(self):
        gen = RngStream(14).generator()
        c, t = 3.0, 0.5
        draws = np.array([sample_polya_gamma_1(c, gen) for _ in range(50_000)])
        transformed = np.exp(-draws * t)
        oracles.assert_within_mc(transformed.mean(), oracles.pg_laplace(c, t), transformed)

    def test_density_quadrature_tv(self):
        gen = RngStream(15).generator()
        c = 1.0
        draws = np.array([sample_polya_gamma_1(c, gen) for _ in range(50_000)])
        hi = np.quantile(draws, 0.999)
        edges = np.linspace(1e-4, hi, 41)
        counts, _ = np.histogram(draws, bins=edges)
        masses = oracles.pg_bin_masses(c, edges)
        inside = counts.sum() / draws.size
        assert inside > 0.99
        assert oracles.tv_distance(counts, masses) < 0.05

    def test_sign_symmetry(self):
        a = np.array([sample_polya_gamma_1(1.5, RngStream(16, (i,))) for i in range(2_000)])
        b = np.array([sample_polya_gamma_1(-1.5, RngStream(16, (i,))) for i in range(2_000)])
        assert np.array_equal(a, b)


class TestVectorBingham:
    def test_uniform_case(self):
        gen = RngStream(17).generator()
        draws = np.array([sample_vector_bingham(np.zeros((3, 3)), gen) for _ in range(30_000)])
        target = oracles.sphere_coordinate_second_moment(3)
        vals = draws[:, 0] ** 2
        oracles.assert_within_mc(vals.mean(), target, vals)

    def test_concentrated_moment_matches_quadrature(self):
        gen = RngStream(18).generator()
        lam = np.array([10.0, 0.0, 0.0])
        draws = np.array([sample_vector_bingham(np.diag(lam), gen) for _ in range(30_000)])
        target = oracles.bingham_sphere_moment_p3(lam, lambda z: z[0] ** 2)
        vals = draws[:, 0] ** 2
        oracles.assert_within_mc(vals.mean(), target, vals)
        assert vals.mean() > 0.85

    def test_p2_angle_histogram_tv(self):
        gen = RngStream(19).generator()
        lam = np.array([2.0, -2.0])
        draws = np.array([sample_vector_bingham(np.diag(lam), gen) for _ in range(100_000)])
        ang = np.arctan2(draws[:, 1], draws[:, 0]) % (2 * np.pi)
        edges = np.linspace(0, 2 * np.pi, 61)
        counts, _ = np.histogram(ang, bins=edges)
        masses = oracles.bingham_angle_bin_masses(lam, edges)
        assert oracles.tv_distance(counts, masses) < 0.05

    def test_non_diagonal_parameter(self):
        gen = RngStream(20).generator()
        rot = np.linalg.qr(np.random.default_rng(0).standard_normal((2, 2)))[0]
        lam = np.array([3.0, -1.0])
        a = rot @ np.diag(lam) @ rot.T
        draws = np.array([sample_vector_bingham(a, gen) for _ in range(30_000)])
        # rotate back: in the eigenbasis the first-coordinate moment matches
        w = draws @ rot
        target = oracles.bingham_sphere_moment_p2(lam, lambda z: z[0] ** 2)
        vals = w[:, 0] ** 2
        oracles.assert_within_mc(vals.mean(), target, vals)


class TestMatrixBingham:
    def test_uniform_reduces_to_sphere(self):
        start = sample_uniform_stiefel(3, 1, RngStream(21))
        param = BinghamParam(a=np.zeros((3, 3)), k=1)
        gen = RngStream(22).generator()
        vals = []
        z = start
        for _ in range(20_000):
            z = sample_matrix_bingham(param, z, sweeps=1, rng=gen)
            vals.append(z.matrix[0, 0] ** 2)
        vals = np.array(vals)
        oracles.assert_within_mc(vals.mean(), 1.0 / 3.0, vals)

    def test_k2_complement_matches_quadrature(self):
        # span of a 2-frame in R^3 is determined by its unit normal q, and
        # exp(tr(Z'AZ)) induces a Bingham density prop. to exp(-q'Aq) on q
        a = np.diag([4.0, 1.0, -2.0])
        param = BinghamParam(a=a, k=2)
        z = sample_uniform_stiefel(3, 2, RngStream(23))
        gen = RngStream(24).generator()
        q_sq = []
        for _ in range(20_000):
            z = sample_matrix_bingham(param, z, sweeps=1, rng=gen)
            zz = z.matrix
            q = np.array([
                zz[1, 0] * zz[2, 1] - zz[2, 0] * zz[1, 1],
                zz[2, 0] * zz[0, 1] - zz[0, 0] * zz[2, 1],
                zz[0, 0] * zz[1, 1] - zz[1, 0] * zz[0, 1],
            ])
            q /= np.linalg.norm(q)
            q_sq.append(q[0] ** 2)
        q_sq = np.array(q_sq)
        target = oracles.bingham_sphere_moment_p3(-np.diag(a), lambda v: v[0] ** 2)
        oracles.assert_within_mc(q_sq.mean(), target, q_sq, n_sigma=4.0)

    def test_orthonormality_preserved_many_sweeps(self):
        gen = RngStream(25).generator()
        a = np.random.default_rng(1).standard_normal((6, 6))
        a = (a + a.T) / 2
        param = BinghamParam(a=a, k=2)
        z = sample_uniform_stiefel(6, 2, RngStream(26))
        z = sample_matrix_bingham(param, z, sweeps=1000, rng=gen)
        assert np.max(np.abs(z.matrix.T @ z.matrix - np.eye(2))) <= 1e-8

    def test_dimension_mismatch(self):
        param = BinghamParam(a=np.zeros((4, 4)), k=2)
        z = sample_uniform_stiefel(5, 2, RngStream(27))
        with pytest.raises(Exception):
            sample_matrix_bingham(param, z, rng=RngStream(28))


class TestMatrixVmf:
    def test_zero_parameter_uniform(self):
        z = sample_uniform_stiefel(3, 1, RngStream(29))
        gen = RngStream(30).generator()
        vals = []
        for _ in range(20_000):
            z = sample_matrix_vmf(np.zeros((3, 1)), z, gen)
            vals.append(z.matrix[0, 0] ** 2)
        vals = np.array(vals)
        oracles.assert_within_mc(vals.mean(), 1.0 / 3.0, vals)

    def test_concentrated_mean_direction(self):
        f = np.array([[10.0], [0.0]])
        z = sample_uniform_stiefel(2, 1, RngStream(31))
        gen = RngStream(32).generator()
        vals = []
        for _ in range(30_000):
            z = sample_matrix_vmf(f, z, gen)
            vals.append(z.matrix[0, 0])
        vals = np.array(vals)
        target = oracles.vmf_mean_resultant(10.0, 2)
        oracles.assert_within_mc(vals.mean(), target, vals)
        assert vals.mean() > 0.9

    def test_invariance_from_exact_draws(self):
        # one kernel application to exact draws leaves the distribution alone
        f = np.array([[3.0], [1.5]])
        gen = RngStream(33).generator()
        before, after = [], []
        for _ in range(8_000):
            u = sample_vector_vmf(f[:, 0], gen)
            before.append(math.atan2(u[1], u[0]))
            z2 = sample_matrix_vmf(f, StiefelPoint(u[:, None]), gen)
            after.append(math.atan2(z2.matrix[1, 0], z2.matrix[0, 0]))
        assert ks_2samp(before, after).pvalue > 0.01


class TestVectorBmfStep:
    def test_long_run_matches_quadrature(self):
        # mixed quadratic + linear target on the circle
        a = np.diag([2.0, -2.0])
        b = np.array([1.0, 2.0])

        def log_density(t):
            z = np.array([math.cos(t), math.sin(t)])
            return float(b @ z) + float(z @ a @ z)

        gen = RngStream(34).generator()
        x = np.array([1.0, 0.0])
        angles = []
        for i in range(60_000):
            x = _vector_bmf_step(a, b, x, gen)
            if i > 2_000:
                angles.append(math.atan2(x[1], x[0]))
        edges = np.linspace(-math.pi, math.pi, 41)
        counts, _ = np.histogram(angles, bins=edges)
        masses = oracles.generic_density_bin_masses(log_density, edges)
        assert oracles.tv_distance(counts, masses) < 0.05


class TestThetaUpdate:
    def _run_chain(self, coeffs, n, seed, burn=2_000):
        gen = RngStream(seed).generator()
        x = 0.25 * coeffs.x_max
        out = []
        for i in range(n):
            x, _ = mh_theta_update(coeffs, x, gen)
            if i >= burn:
                out.append(x)
        return np.array(out)

    def test_arcsine_case_mean(self):
        coeffs = ThetaConditionalCoeffs(alpha=1.0, gamma=1.0, delta=0.0, theta_max=math.pi / 3)
        xs = self._run_chain(coeffs, 60_000, seed=35)
        target = oracles.generic_density_mean(
            lambda x: -0.5 * math.log(x) - 0.5 * math.log1p(-x), 0.0, coeffs.x_max
        )
        # thin to tame autocorrelation before the sigma estimate
        thinned = xs[::10]
        oracles.assert_within_mc(thinned.mean(), target, thinned, n_sigma=4.0)

    def test_boundary_state_leaves(self):
        coeffs = ThetaConditionalCoeffs(alpha=0.0, gamma=0.0, delta=0.0)
        x, accepted = mh_theta_update(coeffs, 0.0, RngStream(36))
        assert accepted and 0.0 < x < 1.0

    def test_tilted_case_mean(self):
        coeffs = ThetaConditionalCoeffs(alpha=5.0, gamma=0.0, delta=1.0)

        def log_dens(x):
            return (
                -5.0 * x + 2.0 * math.sqrt(x * (1 - x))
                - 0.5 * math.log(x) - 0.5 * math.log1p(-x)
            )

        xs = self._run_chain(coeffs, 80_000, seed=37)
        target = oracles.generic_density_mean(log_dens, 0.0, 1.0)
        thinned = xs[::10]
        oracles.assert_within_mc(thinned.mean(), target, thinned, n_sigma=4.0)

    def test_detailed_balance_ratio_product(self):
        coeffs = ThetaConditionalCoeffs(alpha=3.0, gamma=1.0, delta=0.7, proposal_a=1.3, proposal_b=2.1)
        for x, x_new in [(0.2, 0.6), (0.05, 0.9), (0.45, 0.5)]:
            fwd = (
                theta_log_density(coeffs, x_new) - theta_log_density(coeffs, x)
                + theta_proposal_log_density(coeffs, x) - theta_proposal_log_density(coeffs, x_new)
            )
            bwd = (
                theta_log_density(coeffs, x) - theta_log_density(coeffs, x_new)
                + theta_proposal_log_density(coeffs, x_new) - theta_proposal_log_density(coeffs, x)
            )
            assert abs(fwd + bwd) <= 1e-12

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            ThetaConditionalCoeffs(alpha=0.0, gamma=0.0, delta=0.0, theta_max=0.0)
        coeffs = ThetaConditionalCoeffs(alpha=0.0, gamma=0.0, delta=0.0)
        with pytest.raises(ValueError):
            mh_theta_update(coeffs, 1.5, RngStream(38))
