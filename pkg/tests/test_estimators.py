import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from subspace_meta import (
    SimConfig,
    SubspaceMetaClassifier,
    SubspaceMetaRegressor,
    generate_tasks,
    principal_angles,
)

import sys, os
sys.path.insert(0, os.path.dirname(__file__))
from test_classify import make_logistic_tasks


def small_scenario(seed=0):
    cfg = SimConfig(S=8, n_s=30, p=6, k=2, phi0=0.05, sigma2_0=0.05, seed=seed)
    return generate_tasks(cfg), cfg


class TestRegressorEstimatorApi:
    def test_get_set_params_and_clone(self):
        est = SubspaceMetaRegressor(subspace_dim=3, iterations=100, random_state=7)
        params = est.get_params()
        assert params["subspace_dim"] == 3 and params["random_state"] == 7
        est2 = clone(est).set_params(subspace_dim=2)
        assert est2.get_params()["subspace_dim"] == 2
        assert est.get_params()["subspace_dim"] == 3

    def test_predict_before_fit_raises(self):
        with pytest.raises(NotFittedError):
            SubspaceMetaRegressor().predict(np.zeros((2, 3)))

    def test_fit_adapt_predict_cycle(self):
        (tasks, truth), cfg = small_scenario()
        est = SubspaceMetaRegressor(
            subspace_dim=2, iterations=600, thin=5, noise_variance=0.05, random_state=1
        )
        est.fit(tasks)
        assert est.n_features_in_ == 6
        assert 0.0 < est.phi_mean_ < 1.0
        err = principal_angles(est.projection_mean_, truth["P0"]).sin2_theta1
        assert err < 0.3

        gen = np.random.default_rng(5)
        beta_star = truth["beta0"][0]
        X_new = gen.standard_normal((25, 6))
        y_new = X_new @ beta_star + np.sqrt(0.05) * gen.standard_normal(25)
        est.adapt(X_new[:15], y_new[:15])
        score = est.score(X_new[15:], y_new[15:])
        assert score > 0.5

    def test_tuple_tasks_accepted(self):
        (tasks, _), _ = small_scenario(3)
        pairs = [(t.X, t.y) for t in tasks]
        est = SubspaceMetaRegressor(subspace_dim=2, iterations=60, burnin=30,
                                    noise_variance=0.05, random_state=2)
        est.fit(pairs)
        assert est.draws_.n_draws > 0

    def test_point_estimate_trace_not_larger(self):
        (tasks, truth), _ = small_scenario(4)
        gen = np.random.default_rng(6)
        X_new = gen.standard_normal((20, 6))
        y_new = X_new @ truth["beta0"][0] + np.sqrt(0.05) * gen.standard_normal(20)
        traces = {}
        for point in (False, True):
            est = SubspaceMetaRegressor(
                subspace_dim=2, iterations=400, noise_variance=0.05,
                point_estimate=point, draws_per_component=1 if not point else 200,
                random_state=3,
            )
            est.fit(tasks).adapt(X_new[:12], y_new[:12])
            traces[point] = est.predictive(X_new[12:]).trace_sigma_y
        # mixing over the posterior adds between-component variance
        assert traces[True] <= traces[False] * 1.05

    def test_reproducible_across_instances(self):
        (tasks, _), _ = small_scenario(5)
        a = SubspaceMetaRegressor(subspace_dim=2, iterations=80, burnin=40,
                                  noise_variance=0.05, random_state=11).fit(tasks)
        b = SubspaceMetaRegressor(subspace_dim=2, iterations=80, burnin=40,
                                  noise_variance=0.05, random_state=11).fit(tasks)
        assert np.array_equal(a.draws_.phi_values(), b.draws_.phi_values())


class TestClassifierEstimatorApi:
    def test_fit_predict_accuracy(self):
        tasks, coefs, _ = make_logistic_tasks(S=4, n=120, p=4, k=1, seed=49, scale=4.0)
        est = SubspaceMetaClassifier(subspace_dim=1, iterations=300, random_state=4)
        est.fit([(t.X, t.y) for t in tasks])
        accs = [est.score(t.X, t.y, task=s) for s, t in enumerate(tasks)]
        oracle_accs = [
            np.mean((t.X @ coefs[s] > 0).astype(float) == t.y) for s, t in enumerate(tasks)
        ]
        # within a small margin of the true-coefficient decision rule
        assert np.mean(accs) > np.mean(oracle_accs) - 0.05

    def test_adapt_path(self):
        tasks, _, q = make_logistic_tasks(S=4, n=80, p=4, k=1, seed=50, scale=4.0)
        est = SubspaceMetaClassifier(subspace_dim=1, iterations=200, max_components=20,
                                     adapt_iterations=15, random_state=5)
        est.fit(tasks)
        gen = np.random.default_rng(8)
        beta = q[:, 0] * 4.0
        X_new = gen.standard_normal((60, 4))
        y_new = (gen.random(60) < 1 / (1 + np.exp(-(X_new @ beta)))).astype(float)
        est.adapt(X_new[:30], y_new[:30])
        probs = est.adapt_predict_proba(X_new[30:])
        assert probs.shape == (30, 2)
        assert np.allclose(probs.sum(axis=1), 1.0)
        acc = np.mean((probs[:, 1] >= 0.5).astype(float) == y_new[30:])
        assert acc > 0.7
