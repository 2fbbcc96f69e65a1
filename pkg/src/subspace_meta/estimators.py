"""Estimator wrappers so the samplers compose with the scikit-learn ecosystem.

``fit`` runs the meta-training sweep over a list of tasks, ``adapt``
conditions on a new task's few labeled examples, and ``predict`` returns
the posterior predictive mean.  Hyperparameters follow the usual
get_params / set_params contract.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .classify import (
    BinaryTaskData,
    beta_pg_full_conditional,
    logistic_gibbs_meta_train,
    pg_update,
)
from .linear import (
    INFER,
    HyperParams,
    TaskData,
    gibbs_meta_train,
    meta_test_posterior,
    posterior_predictive,
)
from .manifold import StiefelPoint, frechet_mean
from .metrics import r_squared
from .rng import RngStream
from .samplers import sample_mvn
from .validation import check_design_response


def _as_task_list(tasks, noise_variance) -> list[TaskData]:
    out = []
    for i, task in enumerate(tasks):
        if isinstance(task, TaskData):
            out.append(task)
        else:
            X, y = task
            out.append(TaskData(y=y, X=X, sigma2=noise_variance, task_id=i))
    return out


def _check_fitted(est, attr: str):
    if not hasattr(est, attr):
        raise NotFittedError(
            f"this {type(est).__name__} instance is not fitted yet; call fit first"
        )


class SubspaceMetaRegressor(BaseEstimator):
    """Multi-task linear regression with a shared predictor subspace.

    Parameters
    ----------
    subspace_dim : dimension k of the shared subspace.
    iterations, burnin, thin : sweep schedule; burnin defaults to half.
    kernel : subspace update kernel, "bingham" or "cs".
    noise_variance : per-task noise variance, or "infer".
    point_estimate : adapt against the posterior point estimate (the
        Frobenius-mean projection and mean diversity) instead of the full
        posterior mixture.
    """

    def __init__(
        self,
        subspace_dim: int = 2,
        iterations: int = 2000,
        burnin: int | None = None,
        thin: int = 5,
        kernel: str = "bingham",
        bingham_sweeps: int = 1,
        shape_a: float = 2.0,
        scale_b: float = 1.0,
        kappa: float = 0.0,
        reference_basis=None,
        noise_variance: float | str = INFER,
        point_estimate: bool = False,
        draws_per_component: int = 1,
        random_state: int = 0,
    ):
        self.subspace_dim = subspace_dim
        self.iterations = iterations
        self.burnin = burnin
        self.thin = thin
        self.kernel = kernel
        self.bingham_sweeps = bingham_sweeps
        self.shape_a = shape_a
        self.scale_b = scale_b
        self.kappa = kappa
        self.reference_basis = reference_basis
        self.noise_variance = noise_variance
        self.point_estimate = point_estimate
        self.draws_per_component = draws_per_component
        self.random_state = random_state

    def _hyper(self) -> HyperParams:
        ref = self.reference_basis
        if ref is not None and not isinstance(ref, StiefelPoint):
            ref = StiefelPoint(np.asarray(ref, dtype=np.float64))
        return HyperParams(
            a=self.shape_a,
            b=self.scale_b,
            kappa=self.kappa,
            z0_prior=ref,
            bingham_sweeps=self.bingham_sweeps,
        )

    def fit(self, tasks, y=None):
        """Meta-train on a list of TaskData or (X, y) pairs."""
        task_list = _as_task_list(tasks, self.noise_variance)
        self.draws_ = gibbs_meta_train(
            task_list,
            k=self.subspace_dim,
            hyper=self._hyper(),
            iters=self.iterations,
            burnin=self.burnin,
            thin=self.thin,
            kernel=self.kernel,
            rng=RngStream(self.random_state, (0,)),
        )
        self.n_features_in_ = task_list[0].p
        self.projection_mean_ = frechet_mean(self.draws_.projections())
        self.phi_mean_ = float(self.draws_.phi_values().mean())
        return self

    def adapt(self, X, y, noise_variance: float | None = None):
        """Condition on a new task's labeled examples."""
        _check_fitted(self, "draws_")
        X, y = check_design_response(X, y)
        sigma2 = noise_variance
        if sigma2 is None:
            sigma2 = self.noise_variance if self.noise_variance != INFER else None
        if sigma2 is None:
            raise ValueError(
                "a known test-task noise variance is required; pass noise_variance"
            )
        test = TaskData(y=y, X=X, sigma2=float(sigma2), task_id="adapt")
        if self.point_estimate:
            source = {"point": (self.projection_mean_, self.phi_mean_)}
        else:
            source = {"draws": self.draws_}
        self.coef_draws_ = meta_test_posterior(
            test,
            rng=RngStream(self.random_state, (1,)),
            sigma2=float(sigma2),
            draws_per_component=self.draws_per_component,
            **source,
        )
        self.coef_ = self.coef_draws_.mean(axis=0)
        self.adapt_noise_ = float(sigma2)
        return self

    def predict(self, X) -> np.ndarray:
        """Posterior predictive mean at new covariates."""
        _check_fitted(self, "coef_draws_")
        X = np.asarray(X, dtype=np.float64)
        return X @ self.coef_

    def predictive(self, X, rng=None):
        """Full predictive summary (draws, mean, covariance) at X."""
        _check_fitted(self, "coef_draws_")
        stream = rng if rng is not None else RngStream(self.random_state, (2,))
        return posterior_predictive(
            np.asarray(X, dtype=np.float64),
            self.coef_draws_,
            sigma2_star=self.adapt_noise_,
            rng=stream,
        )

    def score(self, X, y) -> float:
        return r_squared(y, self.predict(X))


class SubspaceMetaClassifier(BaseEstimator):
    """Multi-task binary logistic regression with a shared subspace.

    ``fit`` trains the augmented chain over the tasks; per-task
    probabilities use the posterior-mean coefficients.  ``adapt`` runs a
    short augmented chain for a new task against each retained global
    draw and pools the coefficient draws.
    """

    def __init__(
        self,
        subspace_dim: int = 2,
        iterations: int = 1000,
        burnin: int | None = None,
        thin: int = 5,
        kernel: str = "bingham",
        bingham_sweeps: int = 1,
        adapt_iterations: int = 20,
        max_components: int = 100,
        random_state: int = 0,
    ):
        self.subspace_dim = subspace_dim
        self.iterations = iterations
        self.burnin = burnin
        self.thin = thin
        self.kernel = kernel
        self.bingham_sweeps = bingham_sweeps
        self.adapt_iterations = adapt_iterations
        self.max_components = max_components
        self.random_state = random_state

    def fit(self, tasks, y=None):
        task_list = []
        for i, task in enumerate(tasks):
            if isinstance(task, BinaryTaskData):
                task_list.append(task)
            else:
                X, yy = task
                task_list.append(BinaryTaskData(y=yy, X=X, task_id=i))
        self.draws_ = logistic_gibbs_meta_train(
            task_list,
            k=self.subspace_dim,
            hyper=HyperParams(bingham_sweeps=self.bingham_sweeps),
            iters=self.iterations,
            burnin=self.burnin,
            thin=self.thin,
            kernel=self.kernel,
            rng=RngStream(self.random_state, (0,)),
        )
        self.n_features_in_ = task_list[0].p
        stacked = np.array(
            [[ts.beta for ts in states] for states in self.draws_.task_states]
        )
        self.task_coef_ = stacked.mean(axis=0)
        return self

    def predict_proba(self, X, task: int = 0) -> np.ndarray:
        """Within-task class-1 probabilities from posterior-mean coefficients."""
        _check_fitted(self, "task_coef_")
        X = np.asarray(X, dtype=np.float64)
        p1 = 1.0 / (1.0 + np.exp(-(X @ self.task_coef_[task])))
        return np.column_stack([1.0 - p1, p1])

    def predict(self, X, task: int = 0) -> np.ndarray:
        return (self.predict_proba(X, task=task)[:, 1] >= 0.5).astype(int)

    def adapt(self, X, y):
        """Short augmented chains for a new task under each global draw."""
        _check_fitted(self, "draws_")
        test = BinaryTaskData(y=y, X=X, task_id="adapt")
        components = self.draws_.global_states
        if len(components) > self.max_components:
            idx = np.linspace(0, len(components) - 1, self.max_components).astype(int)
            components = [components[i] for i in idx]
        root = RngStream(self.random_state, (1,))
        coef = np.empty((len(components), test.p))
        for c, g in enumerate(components):
            gen = root.child(c).generator()
            beta = np.zeros(test.p)
            for _ in range(self.adapt_iterations):
                aug = pg_update(test, beta, gen)
                cond = beta_pg_full_conditional(test, aug, g)
                beta = sample_mvn(cond.mean, cov=cond.cov, rng=gen)
            coef[c] = beta
        self.coef_draws_ = coef
        self.coef_ = coef.mean(axis=0)
        return self

    def adapt_predict_proba(self, X) -> np.ndarray:
        """Predictive class-1 probabilities for the adapted task."""
        _check_fitted(self, "coef_draws_")
        X = np.asarray(X, dtype=np.float64)
        logits = self.coef_draws_ @ X.T
        p1 = (1.0 / (1.0 + np.exp(-logits))).mean(axis=0)
        return np.column_stack([1.0 - p1, p1])

    def score(self, X, y, task: int = 0) -> float:
        y = np.asarray(y).ravel()
        return float(np.mean(self.predict(X, task=task) == y))
