"""Binary and multiclass task models with the shared-subspace prior.

Logistic likelihoods are made conditionally Gaussian by Polya-Gamma
augmentation, after which the subspace and diversity updates are the
same as in the linear model.  Multiclass labels use a stick-breaking
cascade of binary subproblems with class-specific subspaces.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import expit

from .errors import DimensionError, NumericFailureError
from .linear import Gaussian, GlobalState, HyperParams, PosteriorDraws, TaskState
from .manifold import ProjectionMatrix, StiefelPoint, frechet_mean
from .rng import RngStream, as_generator
from .samplers import sample_matrix_bingham, sample_mvn, sample_polya_gamma_1
from .validation import check_design_response

__all__ = [
    "BinaryTaskData",
    "PgAugmentation",
    "MultiClassModel",
    "MulticlassDraws",
    "pg_update",
    "beta_pg_full_conditional",
    "logistic_gibbs_meta_train",
    "stick_breaking_probs",
    "multiclass_gibbs_meta_train",
]


@dataclass
class BinaryTaskData:
    """One binary task: labels in {0, 1} and the design matrix."""

    y: np.ndarray
    X: np.ndarray
    task_id: int | str = 0

    def __post_init__(self):
        self.X, y = check_design_response(self.X, self.y)
        if not np.all(np.isin(y, (0.0, 1.0))):
            raise ValueError("labels must all be 0 or 1")
        self.y = y

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass
class PgAugmentation:
    """Latent Polya-Gamma weights, one positive value per observation."""

    omega: np.ndarray

    def __post_init__(self):
        self.omega = np.asarray(self.omega, dtype=np.float64).ravel()
        if np.any(self.omega <= 0):
            raise ValueError("augmentation weights must be positive")


def pg_update(task: BinaryTaskData, beta: np.ndarray, rng) -> PgAugmentation:
    """Draw the augmentation weights omega_j ~ PG(1, x_j' beta)."""
    beta = np.asarray(beta, dtype=np.float64).ravel()
    if beta.size != task.p:
        raise DimensionError("beta length does not match the task design")
    gen = as_generator(rng)
    psi = task.X @ beta
    omega = np.array([sample_polya_gamma_1(float(v), gen) for v in psi])
    return PgAugmentation(omega=omega)


def beta_pg_full_conditional(task: BinaryTaskData, aug: PgAugmentation, g: GlobalState) -> Gaussian:
    """Gaussian conditional of the coefficients under the augmented likelihood.

    Precision X' diag(omega) X + P + (1/phi)(I - P); the linear term uses
    the centered labels y - 1/2.
    """
    if aug.omega.size != task.n:
        raise DimensionError("augmentation length does not match the task")
    if task.p != g.p:
        raise DimensionError("task and global state dimensions differ")
    z = g.basis.matrix
    prec = task.X.T @ (task.X * aug.omega[:, None])
    prec[np.diag_indices_from(prec)] += 1.0 / g.phi
    prec += (1.0 - 1.0 / g.phi) * (z @ z.T)
    chol = cho_factor((prec + prec.T) / 2.0)
    mean = cho_solve(chol, task.X.T @ (task.y - 0.5))
    cov = cho_solve(chol, np.eye(task.p))
    return Gaussian(mean=mean, cov=(cov + cov.T) / 2.0)


def _logistic_ridge_init(tasks: list[BinaryTaskData], k: int) -> tuple[np.ndarray, np.ndarray]:
    p = tasks[0].p
    betas = np.empty((len(tasks), p))
    for s, task in enumerate(tasks):
        gram = task.X.T @ task.X / 4.0 + np.eye(p)
        betas[s] = np.linalg.solve(gram, task.X.T @ (task.y - 0.5))
    u, _, _ = np.linalg.svd(betas.T, full_matrices=True)
    return betas, u[:, :k]


def _pg_chain(
    tasks: list[BinaryTaskData],
    k: int,
    hyper: HyperParams,
    iters: int,
    burnin: int | None,
    thin: int,
    kernel: str,
    stream: RngStream,
    record_task_states: bool,
) -> PosteriorDraws:
    from .linear import PhiConditional, _CsState, z_full_conditional_param

    p = tasks[0].p
    for t in tasks:
        if t.p != p:
            raise DimensionError("all tasks must share the predictor dimension")
    if not 1 <= k < p:
        raise DimensionError(f"need 1 <= k < p, got k={k}, p={p}")
    if burnin is None:
        burnin = iters // 2
    kernel = kernel.lower()
    if kernel in ("cs-decomposition", "cs_decomposition"):
        kernel = "cs"

    betas, z = _logistic_ridge_init(tasks, k)
    phi = 0.5
    cs_state = _CsState(z, k) if kernel == "cs" else None
    n_tasks = len(tasks)

    global_states: list[GlobalState] = []
    task_states: list[list[TaskState]] | None = [] if record_task_states else None
    kept_iters: list[int] = []

    for sweep in range(1, iters + 1):
        state = GlobalState(basis=StiefelPoint(z), phi=phi)
        for s, task in enumerate(tasks):
            aug = pg_update(task, betas[s], stream.child(1, sweep, s))
            cond = beta_pg_full_conditional(task, aug, state)
            betas[s] = sample_mvn(cond.mean, cov=cond.cov, rng=stream.child(2, sweep, s))

        param = z_full_conditional_param(betas, phi, hyper, k)
        if kernel == "bingham":
            point = sample_matrix_bingham(
                param, StiefelPoint(z), sweeps=hyper.bingham_sweeps,
                rng=stream.child(3, sweep),
            )
            z = np.array(point.matrix)
        else:
            gen = stream.child(3, sweep).generator()
            for _ in range(hyper.bingham_sweeps):
                cs_state.sweep(param.a, gen, theta_max=hyper.theta_max)
            z = cs_state.basis()

        ortho = betas - (betas @ z) @ z.T
        residual = float(np.sum(ortho * betas))
        if residual <= 1e-300:
            warnings.warn(
                f"sweep {sweep}: coefficients lie in the subspace; clamping phi",
                stacklevel=2,
            )
            phi = hyper.phi_floor
        else:
            cond_phi = PhiConditional(
                exponent=(p - k) * n_tasks / 2.0,
                residual=residual,
                convention=hyper.phi_convention,
            )
            phi = cond_phi.sample(stream.child(4, sweep))
            phi = min(max(phi, hyper.phi_floor), 1.0 - 1e-12)

        if not (np.isfinite(phi) and np.all(np.isfinite(betas))):
            raise NumericFailureError(f"non-finite sampler state at sweep {sweep}", iteration=sweep)

        if sweep > burnin and (sweep - burnin) % thin == 0:
            global_states.append(GlobalState(basis=StiefelPoint(z.copy()), phi=phi))
            kept_iters.append(sweep)
            if task_states is not None:
                task_states.append([TaskState(beta=betas[s].copy(), sigma2=None) for s in range(n_tasks)])

    return PosteriorDraws(
        global_states=global_states,
        task_states=task_states,
        iteration_index=kept_iters,
        burnin=burnin,
        thin=thin,
        seed_manifest={"seed": stream.seed, "path": list(stream.path), "kernel": kernel},
    )


def logistic_gibbs_meta_train(
    tasks: list[BinaryTaskData],
    k: int,
    hyper: HyperParams | None = None,
    iters: int = 2000,
    burnin: int | None = None,
    thin: int = 5,
    kernel: str = "bingham",
    rng: RngStream | int = 0,
    record_task_states: bool = True,
) -> PosteriorDraws:
    """Meta-train the binary model: per task omega then beta, then Z, then phi.

    The recording contract matches the linear trainer.  The chain is the
    first stick-breaking stage, so its streams hang off class index 0 and
    a two-class multiclass run is draw-for-draw identical to it.
    """
    if not tasks:
        raise ValueError("need at least one task")
    hyper = hyper or HyperParams()
    stream = rng if isinstance(rng, RngStream) else RngStream(int(rng))
    return _pg_chain(tasks, k, hyper, iters, burnin, thin, kernel,
                     stream.child(0), record_task_states)


def stick_breaking_probs(psi: np.ndarray) -> np.ndarray:
    """Class probabilities from K-1 stick-breaking logits.

    The first K-1 probabilities are logistic(psi_j) times the remaining
    stick; class K takes whatever is left, so the total is 1 up to
    rounding.  Accepts a single vector or a batch of row vectors.
    """
    psi = np.asarray(psi, dtype=np.float64)
    single = psi.ndim == 1
    psi = np.atleast_2d(psi)
    if psi.shape[1] < 1:
        raise DimensionError("need at least one logit (K >= 2)")
    cond = expit(psi)
    probs = np.empty((psi.shape[0], psi.shape[1] + 1))
    stick = np.ones(psi.shape[0])
    for j in range(psi.shape[1]):
        probs[:, j] = cond[:, j] * stick
        stick = stick * (1.0 - cond[:, j])
    probs[:, -1] = stick
    return probs[0] if single else probs


@dataclass
class MulticlassDraws:
    """Per-class posterior chains of the stick-breaking model.

    ``per_class[j]`` holds the chain for stick stage j (class label
    j + 1); a stage with no eligible observations is None.  A stage's
    chain covers only the tasks listed in ``included_tasks[j]`` (original
    task positions), since tasks can run out of eligible observations.
    """

    K: int
    per_class: list[PosteriorDraws | None]
    included_tasks: list[list[int]]
    n_tasks: int
    p: int

    def model(self) -> "MultiClassModel":
        projections: list[ProjectionMatrix | None] = []
        phis: list[float | None] = []
        coefs: list[np.ndarray | None] = []
        for j, chain in enumerate(self.per_class):
            if chain is None or chain.n_draws == 0:
                projections.append(None)
                phis.append(None)
                coefs.append(None)
                continue
            projections.append(frechet_mean(chain.projections()))
            phis.append(float(chain.phi_values().mean()))
            stacked = np.array([[ts.beta for ts in states] for states in chain.task_states])
            means = stacked.mean(axis=0)
            full = np.zeros((self.n_tasks, self.p))
            full[self.included_tasks[j]] = means
            coefs.append(full)
        return MultiClassModel(K=self.K, projections=projections, phis=phis,
                               task_coefficients=coefs)


@dataclass
class MultiClassModel:
    """Point-estimate summary of the per-class chains.

    Holds, for each stick stage, the subspace projection, diversity, and
    per-task coefficient estimates; produces class probabilities that sum
    to 1 by construction.
    """

    K: int
    projections: list[ProjectionMatrix | None]
    phis: list[float | None]
    task_coefficients: list[np.ndarray | None]

    def predict_proba(self, X: np.ndarray, task: int = 0) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        psi = np.zeros((X.shape[0], self.K - 1))
        for j, coefs in enumerate(self.task_coefficients):
            if coefs is not None:
                psi[:, j] = X @ coefs[task]
        return stick_breaking_probs(psi)

    def predict(self, X: np.ndarray, task: int = 0) -> np.ndarray:
        return np.argmax(self.predict_proba(X, task=task), axis=1) + 1


def multiclass_gibbs_meta_train(
    tasks: list,
    K: int,
    k: int,
    hyper: HyperParams | None = None,
    iters: int = 2000,
    burnin: int | None = None,
    thin: int = 5,
    kernel: str = "bingham",
    rng: RngStream | int = 0,
) -> MulticlassDraws:
    """Meta-train the stick-breaking multiclass model.

    ``tasks`` carry integer labels in 1..K.  Stage j fits a binary chain
    on the observations not assigned to classes below j (indicator: label
    equals j), with its own subspace and diversity.  Stages are
    independent given the data partition; a stage with no eligible
    observations anywhere is skipped with a warning.
    """
    if K < 2:
        raise ValueError("need at least two classes")
    hyper = hyper or HyperParams()
    stream = rng if isinstance(rng, RngStream) else RngStream(int(rng))
    prepared = []
    for task in tasks:
        X = np.asarray(task.X, dtype=np.float64)
        y = np.asarray(task.y).astype(np.int64)
        if np.any(y < 1) or np.any(y > K):
            raise ValueError(f"labels must lie in 1..{K}")
        prepared.append((X, y, getattr(task, "task_id", 0)))

    per_class: list[PosteriorDraws | None] = []
    included: list[list[int]] = []
    for j in range(1, K):
        subtasks = []
        kept_positions = []
        for pos, (X, y, tid) in enumerate(prepared):
            keep = y >= j
            if not np.any(keep):
                warnings.warn(
                    f"stage {j}: task {tid} has no eligible observations; excluded",
                    stacklevel=2,
                )
                continue
            subtasks.append(BinaryTaskData(y=(y[keep] == j).astype(float), X=X[keep], task_id=tid))
            kept_positions.append(pos)
        included.append(kept_positions)
        if not subtasks:
            warnings.warn(f"stage {j}: no eligible observations in any task; stage skipped",
                          stacklevel=2)
            per_class.append(None)
            continue
        per_class.append(
            _pg_chain(subtasks, k, hyper, iters, burnin, thin, kernel,
                      stream.child(j - 1), record_task_states=True)
        )
    return MulticlassDraws(K=K, per_class=per_class, included_tasks=included,
                           n_tasks=len(prepared), p=prepared[0][0].shape[1])
