"""Hierarchical linear multi-task model with a shared predictor subspace.

Each task regresses its responses on a common set of p predictors; the
task coefficient vectors concentrate near a shared k-dimensional
subspace, with the diversity parameter phi in (0, 1) measuring the
variance of the components orthogonal to it.  This module provides the
synthetic task generator, every Gibbs full conditional, the training
sweep over tasks plus global parameters, the few-shot adaptation of a
new task under the learned posterior, and the posterior predictive.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy import stats
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .errors import (
    DegenerateError,
    DimensionError,
    ModeError,
    NumericFailureError,
)
from .manifold import (
    ProjectionMatrix,
    StiefelPoint,
    basis_from_projection,
    sample_uniform_stiefel,
)
from .rng import RngStream, as_generator
from .samplers import (
    BinghamParam,
    sample_matrix_bingham,
    sample_mvn,
    sample_trunc_inverse_gamma,
)
from .validation import check_design_informativeness, check_design_response

__all__ = [
    "TaskData",
    "TaskState",
    "GlobalState",
    "HyperParams",
    "SimConfig",
    "PosteriorDraws",
    "Gaussian",
    "InverseGammaSpec",
    "PhiConditional",
    "generate_tasks",
    "variance_proportion",
    "beta_full_conditional",
    "sigma2_full_conditional",
    "phi_full_conditional",
    "z_full_conditional_param",
    "gibbs_meta_train",
    "meta_test_posterior",
    "posterior_predictive",
    "PredictiveSummary",
    "calibrate_b1",
]

INFER = "infer"


# ---------------------------------------------------------------------------
# Data and state containers

@dataclass
class TaskData:
    """One task's responses, design matrix, and noise-variance mode.

    ``sigma2`` is either a known positive variance or the string
    ``"infer"`` to give it an inverse-gamma update in the sweep.
    """

    y: np.ndarray
    X: np.ndarray
    sigma2: float | Literal["infer"] = INFER
    task_id: int | str = 0

    def __post_init__(self):
        self.X, self.y = check_design_response(self.X, self.y)
        if self.sigma2 != INFER:
            self.sigma2 = float(self.sigma2)
            if self.sigma2 <= 0:
                raise ValueError("known noise variance must be positive")

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def infers_noise(self) -> bool:
        return self.sigma2 == INFER


@dataclass
class TaskState:
    """Per-task sampler state: coefficients and noise variance.

    Likelihoods without a noise variance (the logistic model) leave
    ``sigma2`` as None.
    """

    beta: np.ndarray
    sigma2: float | None

    def __post_init__(self):
        self.beta = np.asarray(self.beta, dtype=np.float64).ravel()
        if self.sigma2 is not None and self.sigma2 <= 0:
            raise ValueError("sigma2 must be positive")

    def coords_in(self, basis: StiefelPoint) -> np.ndarray:
        """Coordinates of the coefficients in the shared subspace basis."""
        return basis.matrix.T @ self.beta


@dataclass
class GlobalState:
    """Cross-task sampler state: the shared basis and diversity phi."""

    basis: StiefelPoint
    phi: float

    def __post_init__(self):
        if not 0.0 < self.phi < 1.0:
            raise ValueError(f"phi must lie in (0, 1), got {self.phi}")

    @property
    def p(self) -> int:
        return self.basis.p

    @property
    def k(self) -> int:
        return self.basis.k

    def projection(self) -> np.ndarray:
        z = self.basis.matrix
        return z @ z.T


@dataclass
class HyperParams:
    """Hyperparameters of the hierarchical model and sampler knobs."""

    a: float = 2.0
    b: float = 1.0
    kappa: float = 0.0
    z0_prior: StiefelPoint | None = None
    bingham_sweeps: int = 1
    phi_convention: Literal["density", "rate"] = "density"
    phi_floor: float = 1e-8
    theta_max: float = math.pi / 2

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ValueError("inverse-gamma hyperparameters a, b must be positive")
        if self.kappa < 0:
            raise ValueError("kappa must be nonnegative")
        if self.bingham_sweeps < 1:
            raise ValueError("bingham_sweeps must be >= 1")
        if self.phi_convention not in ("density", "rate"):
            raise ValueError("phi_convention must be 'density' or 'rate'")


@dataclass
class SimConfig:
    """Synthetic multi-task scenario description."""

    S: int
    n_s: int
    p: int
    k: int
    phi0: float
    sigma2_0: float
    seed: int = 0
    noise_mode: Literal["known", "infer"] = "known"

    def __post_init__(self):
        if self.S < 1:
            raise ValueError("need at least one task")
        if not 1 <= self.k < self.p:
            raise DimensionError(f"need 1 <= k < p, got k={self.k}, p={self.p}")
        if not 0 < self.phi0 < 1:
            raise ValueError("phi0 must lie in (0, 1)")
        if self.sigma2_0 <= 0:
            raise ValueError("sigma2_0 must be positive")


@dataclass
class PosteriorDraws:
    """Thinned chain of global (and optionally per-task) states."""

    global_states: list[GlobalState]
    task_states: list[list[TaskState]] | None
    iteration_index: list[int]
    burnin: int
    thin: int
    seed_manifest: dict = field(default_factory=dict)

    @property
    def n_draws(self) -> int:
        return len(self.global_states)

    def phi_values(self) -> np.ndarray:
        return np.array([g.phi for g in self.global_states])

    def projections(self) -> list[ProjectionMatrix]:
        return [
            ProjectionMatrix(g.projection(), rank=g.k) for g in self.global_states
        ]


@dataclass(frozen=True)
class Gaussian:
    """Mean and covariance of a multivariate Gaussian conditional."""

    mean: np.ndarray
    cov: np.ndarray


@dataclass(frozen=True)
class InverseGammaSpec:
    """Shape/scale pair of an inverse-gamma conditional."""

    shape: float
    scale: float

    def mean(self) -> float:
        if self.shape <= 1:
            return math.inf
        return self.scale / (self.shape - 1.0)

    def sample(self, rng) -> float:
        gen = as_generator(rng)
        return float(self.scale / gen.gamma(self.shape, 1.0))


# ---------------------------------------------------------------------------
# Task generation and the variance split

def variance_proportion(k: int, p: int, phi: float) -> float:
    """Fraction of total coefficient variance aligned with the subspace.

    Equals k / (k + phi (p - k)); the total variance of a coefficient
    vector with unit subspace variance and off-subspace variance phi.
    """
    if not 0 <= phi <= 1:
        raise ValueError("phi must lie in [0, 1]")
    if not 1 <= k < p:
        raise DimensionError(f"need 1 <= k < p, got k={k}, p={p}")
    return k / (k + phi * (p - k))


def generate_tasks(cfg: SimConfig, rng=None) -> tuple[list[TaskData], dict]:
    """Simulate tasks with coefficients concentrated near a random subspace.

    Returns the task list and a truth record with the basis, projection,
    coefficient matrix, and generating scalars for later evaluation.
    """
    stream = rng if isinstance(rng, RngStream) else RngStream(cfg.seed if rng is None else int(rng))
    phi0 = max(cfg.phi0, 1e-12)
    z0 = sample_uniform_stiefel(cfg.p, cfg.k, stream.child(0))
    zmat = z0.matrix
    tasks = []
    beta0 = np.empty((cfg.S, cfg.p))
    for s in range(cfg.S):
        gen_x = stream.child(1, s).generator()
        gen_b = stream.child(2, s).generator()
        gen_e = stream.child(3, s).generator()
        X = gen_x.standard_normal((cfg.n_s, cfg.p))
        coef = math.sqrt(1.0 - phi0) * (zmat @ gen_b.standard_normal(cfg.k))
        coef = coef + math.sqrt(phi0) * gen_b.standard_normal(cfg.p)
        y = X @ coef + math.sqrt(cfg.sigma2_0) * gen_e.standard_normal(cfg.n_s)
        beta0[s] = coef
        sigma2 = INFER if cfg.noise_mode == "infer" else cfg.sigma2_0
        tasks.append(TaskData(y=y, X=X, sigma2=sigma2, task_id=s))
    truth = {
        "Z0": z0,
        "P0": ProjectionMatrix(zmat @ zmat.T, rank=cfg.k),
        "beta0": beta0,
        "phi0": phi0,
        "sigma2_0": cfg.sigma2_0,
    }
    return tasks, truth


# ---------------------------------------------------------------------------
# Full conditionals

def _resolve_sigma2(task: TaskData, sigma2: float | None) -> float:
    if sigma2 is not None:
        return float(sigma2)
    if task.infers_noise:
        raise ModeError(
            "task noise variance is in 'infer' mode; pass the current sigma2 explicitly"
        )
    return float(task.sigma2)


def _beta_conditional_arrays(
    X: np.ndarray,
    y: np.ndarray,
    z: np.ndarray,
    phi: float,
    sigma2: float,
    route: str,
) -> Gaussian:
    n, p = X.shape
    if route == "auto":
        route = "woodbury" if p > n else "direct"
    if route == "direct":
        # precision = X'X/sigma^2 + (1/phi) I + (1 - 1/phi) Z Z'
        prec = X.T @ X / sigma2
        prec[np.diag_indices_from(prec)] += 1.0 / phi
        prec += (1.0 - 1.0 / phi) * (z @ z.T)
        chol = cho_factor((prec + prec.T) / 2.0)
        cov = cho_solve(chol, np.eye(p))
        mean = cho_solve(chol, X.T @ y / sigma2)
    elif route == "woodbury":
        # V = phi I + (1 - phi) Z Z' is the prior covariance
        vxt = phi * X.T + (1.0 - phi) * (z @ (z.T @ X.T))
        core = sigma2 * np.eye(n) + X @ vxt
        chol = cho_factor((core + core.T) / 2.0)
        mean = vxt @ cho_solve(chol, y)
        cov = -vxt @ cho_solve(chol, vxt.T)
        cov += (1.0 - phi) * (z @ z.T)
        cov[np.diag_indices_from(cov)] += phi
    else:
        raise ValueError(f"unknown route '{route}'")
    return Gaussian(mean=mean, cov=(cov + cov.T) / 2.0)


def _sample_beta_conditional(
    X: np.ndarray,
    y: np.ndarray,
    xtx: np.ndarray | None,
    xty: np.ndarray | None,
    z: np.ndarray,
    phi: float,
    sigma2: float,
    gen: np.random.Generator,
) -> np.ndarray:
    """One draw from the coefficient conditional without forming its covariance.

    Low-dimensional route: factor the precision once and solve.  When
    p > n, draw structured prior noise u ~ N(0, V), perturb the data, and
    correct through the n-by-n system (exact, no p-by-p factorization).
    """
    n, p = X.shape
    if p <= n:
        prec = xtx / sigma2
        prec = prec + (1.0 - 1.0 / phi) * (z @ z.T)
        prec[np.diag_indices_from(prec)] += 1.0 / phi
        chol = np.linalg.cholesky((prec + prec.T) / 2.0)
        mean = cho_solve((chol, True), xty / sigma2)
        return mean + solve_triangular(chol.T, gen.standard_normal(p), lower=False)
    g1 = gen.standard_normal(p)
    proj = z @ (z.T @ g1)
    u = math.sqrt(phi) * (g1 - proj) + proj  # N(0, P + phi (I - P))
    v = X @ u + math.sqrt(sigma2) * gen.standard_normal(n)
    vxt = phi * X.T + (1.0 - phi) * (z @ (z.T @ X.T))
    core = sigma2 * np.eye(n) + X @ vxt
    w = cho_solve(cho_factor((core + core.T) / 2.0), y - v)
    return u + vxt @ w


def beta_full_conditional(
    task: TaskData,
    g: GlobalState,
    sigma2: float | None = None,
    route: str = "auto",
) -> Gaussian:
    """Gaussian conditional of one task's coefficients.

    The prior covariance P + phi (I - P) has closed-form inverse
    P + (1/phi)(I - P).  The high-dimensional branch (p > n) rewrites
    the posterior moments through the matrix inversion lemma so only an
    n-by-n system is factorized; both routes agree to rounding.
    """
    if task.p != g.p:
        raise DimensionError(f"task has p={task.p}, global state has p={g.p}")
    if not 0.0 < g.phi < 1.0:
        raise ValueError("phi must lie in (0, 1)")
    sig2 = _resolve_sigma2(task, sigma2)
    return _beta_conditional_arrays(task.X, task.y, g.basis.matrix, g.phi, sig2, route)


def sigma2_full_conditional(task: TaskData, beta: np.ndarray, hyper: HyperParams) -> InverseGammaSpec:
    """Inverse-gamma conditional of one task's noise variance."""
    if not task.infers_noise:
        raise ModeError(f"task {task.task_id} carries a known noise variance")
    beta = np.asarray(beta, dtype=np.float64).ravel()
    if beta.size != task.p:
        raise DimensionError("beta length does not match the task design")
    resid = task.y - task.X @ beta
    return InverseGammaSpec(shape=hyper.a + task.n / 2.0, scale=hyper.b + 0.5 * float(resid @ resid))


@dataclass(frozen=True)
class PhiConditional:
    """Truncated conditional of the diversity parameter on (0, 1).

    The conditional is proportional to
    phi^(-exponent) * exp(-residual/(2 phi)) on (0, 1) with
    exponent = (p - k) S / 2 and residual the summed squared coefficient
    mass orthogonal to the subspace.  Under the 'density' convention the
    matching inverse-gamma shape is exponent - 1; the 'rate' convention
    uses exponent itself (the same conditional with one extra 1/phi
    factor), kept selectable because both appear in practice.
    """

    exponent: float
    residual: float
    convention: Literal["density", "rate"] = "density"

    @property
    def ig_shape(self) -> float:
        return self.exponent - 1.0 if self.convention == "density" else self.exponent

    @property
    def ig_scale(self) -> float:
        return self.residual / 2.0

    def log_density(self, phi: float) -> float:
        if not 0.0 < phi < 1.0:
            return -math.inf
        shape = self.ig_shape
        return -(shape + 1.0) * math.log(phi) - self.ig_scale / phi

    def sample(self, rng) -> float:
        if self.ig_shape > 0:
            return sample_trunc_inverse_gamma(self.ig_shape, self.ig_scale, 0.0, 1.0, rng)
        return _sample_log_density_01(self.log_density, as_generator(rng))

    def mean(self, n_grid: int = 200_001) -> float:
        """Quadrature mean on (0, 1), exact up to grid resolution."""
        grid = np.linspace(1e-12, 1.0 - 1e-12, n_grid)
        logd = np.array([self.log_density(x) for x in grid])
        w = np.exp(logd - logd.max())
        return float(np.trapezoid(w * grid, grid) / np.trapezoid(w, grid))


def _sample_log_density_01(log_density, gen, n_grid: int = 8192) -> float:
    # inverse-CDF on a dense grid over (0, 1); used only for the corner
    # cases where the matching inverse-gamma shape is nonpositive
    grid = np.linspace(1e-12, 1.0 - 1e-12, n_grid)
    logd = np.array([log_density(x) for x in grid])
    peak = logd.max()
    if not np.isfinite(peak):
        raise DegenerateError("conditional has no representable mass on (0, 1)")
    dens = np.exp(logd - peak)
    cdf = np.concatenate([[0.0], np.cumsum((dens[1:] + dens[:-1]) / 2.0 * np.diff(grid))])
    if cdf[-1] <= 0:
        raise DegenerateError("conditional has no representable mass on (0, 1)")
    u = gen.random() * cdf[-1]
    idx = int(np.searchsorted(cdf, u))
    idx = min(max(idx, 1), n_grid - 1)
    lo, hi = cdf[idx - 1], cdf[idx]
    frac = 0.0 if hi <= lo else (u - lo) / (hi - lo)
    return float(grid[idx - 1] + frac * (grid[idx] - grid[idx - 1]))


def phi_full_conditional(
    P: ProjectionMatrix | np.ndarray,
    betas: list[np.ndarray] | np.ndarray,
    rank: int | None = None,
    convention: Literal["density", "rate"] = "density",
) -> PhiConditional:
    """Conditional of the diversity parameter given coefficients and subspace.

    Raises DegenerateError when every coefficient vector lies exactly in
    the subspace (zero orthogonal residual).
    """
    if isinstance(P, ProjectionMatrix):
        pm = P.matrix
        k = P.rank
    else:
        pm = np.asarray(P, dtype=np.float64)
        if rank is None:
            raise ValueError("rank is required when P is a raw array")
        k = int(rank)
    betas = np.atleast_2d(np.asarray(betas, dtype=np.float64))
    S, p = betas.shape
    if pm.shape != (p, p):
        raise DimensionError("projection and coefficient dimensions differ")
    resid_mat = betas - betas @ pm
    residual = float(np.sum(resid_mat * betas))
    if residual <= 1e-300:
        raise DegenerateError(
            "all coefficient vectors lie in the subspace; the diversity "
            "conditional is degenerate at 0"
        )
    return PhiConditional(exponent=(p - k) * S / 2.0, residual=residual, convention=convention)


def z_full_conditional_param(
    betas: list[np.ndarray] | np.ndarray,
    phi: float,
    hyper: HyperParams,
    k: int,
) -> BinghamParam:
    """Matrix Bingham parameter of the subspace conditional.

    The parameter is A0 + delta B B' with B the stacked coefficient
    matrix, delta = (1/phi - 1)/2, and A0 = kappa Z0 Z0' (zero for the
    uniform prior).
    """
    if not 0.0 < phi < 1.0:
        raise ValueError("phi must lie in (0, 1)")
    betas = np.atleast_2d(np.asarray(betas, dtype=np.float64))
    p = betas.shape[1]
    delta = 0.5 * (1.0 / phi - 1.0)
    a = delta * (betas.T @ betas)
    if hyper.kappa > 0 and hyper.z0_prior is not None:
        z0 = hyper.z0_prior.matrix
        a = a + hyper.kappa * (z0 @ z0.T)
    return BinghamParam(a=(a + a.T) / 2.0, k=k)


# ---------------------------------------------------------------------------
# Cosine-sine subspace kernel

class _CsState:
    """Persistent chain coordinates for the cosine-sine subspace kernel.

    The basis splits as Z = [U1 cos(theta); U2 sin(theta)] against the
    first-k-coordinates reference.  The invariant measure of a uniform
    subspace puts density
    prod_j x_j^{(p-2k-1)/2} (1-x_j)^{-1/2} * prod_{i<j} |x_i - x_j|
    on the squared sines x, which this kernel includes so that it targets
    the same posterior as the Bingham update.
    """

    def __init__(self, z: np.ndarray, k: int):
        p = z.shape[0]
        if p < 2 * k:
            raise DimensionError("cosine-sine kernel requires k <= p - k")
        self.p = p
        self.k = k
        u1, c, vt = np.linalg.svd(z[:k, :])
        c = np.clip(c, 0.0, 1.0)
        self.u1 = u1
        self.x = np.clip(1.0 - c * c, 1e-14, 1.0 - 1e-14)
        s = np.sqrt(self.x)
        z2v = z[k:, :] @ vt.T
        u2 = np.zeros((p - k, k))
        for j in range(k):
            if s[j] > 1e-7:
                u2[:, j] = z2v[:, j] / s[j]
        u2 = self._complete_columns(u2, s)
        self.u2 = u2

    @staticmethod
    def _complete_columns(u2: np.ndarray, s: np.ndarray) -> np.ndarray:
        # columns with a vanishing sine are unconstrained; fill them with
        # an orthonormal completion against the well-defined ones
        bad = [j for j in range(u2.shape[1]) if s[j] <= 1e-7]
        if not bad:
            return u2
        good = [j for j in range(u2.shape[1]) if j not in bad]
        basis = u2[:, good] if good else np.zeros((u2.shape[0], 0))
        for j in bad:
            v = np.zeros(u2.shape[0])
            for col in range(u2.shape[0]):
                v[:] = 0.0
                v[col] = 1.0
                v -= basis @ (basis.T @ v)
                if np.linalg.norm(v) > 1e-6:
                    break
            v /= np.linalg.norm(v)
            u2[:, j] = v
            basis = np.column_stack([basis, v])
        return u2

    def basis(self) -> np.ndarray:
        c = np.sqrt(1.0 - self.x)
        s = np.sqrt(self.x)
        return np.vstack([self.u1 * c, self.u2 * s])

    def _angle_log_target(self, j: int, xj: float, alpha: float, gamma: float,
                          delta: float, x_max: float) -> float:
        if not 0.0 < xj < min(x_max, 1.0 - 1e-15):
            return -math.inf
        val = -(alpha - gamma) * xj + 2.0 * delta * math.sqrt(xj * (1.0 - xj))
        val += 0.5 * (self.p - 2 * self.k - 1) * math.log(xj)
        val -= 0.5 * math.log1p(-xj)
        for i in range(self.k):
            if i != j:
                gap = abs(xj - self.x[i])
                val += math.log(gap) if gap > 0 else -math.inf
        return val

    def sweep(self, a: np.ndarray, gen, theta_max: float = math.pi / 2) -> None:
        k, p = self.k, self.p
        a11 = a[:k, :k]
        a12 = a[:k, k:]
        a22 = a[k:, k:]
        x_max = math.sin(theta_max) ** 2

        # squared-sine angle coordinates, one MH step each
        for j in range(k):
            c = np.sqrt(1.0 - self.x)
            s = np.sqrt(self.x)
            alpha = float(self.u1[:, j] @ a11 @ self.u1[:, j])
            gamma = float(self.u2[:, j] @ a22 @ self.u2[:, j])
            delta = float(self.u1[:, j] @ a12 @ self.u2[:, j])
            x_prop = gen.uniform(0.0, x_max)
            log_ratio = self._angle_log_target(j, x_prop, alpha, gamma, delta, x_max) - \
                self._angle_log_target(j, self.x[j], alpha, gamma, delta, x_max)
            if math.log(gen.random()) <= log_ratio:
                self.x[j] = x_prop

        c = np.sqrt(1.0 - self.x)
        s = np.sqrt(self.x)

        # U1 on the orthogonal group: exact column-sign draws, then
        # Givens-pair Metropolis rotations for the continuous directions
        lin1 = 2.0 * a12 @ (self.u2 * (s * c))
        for j in range(k):
            inner = float(lin1[:, j] @ self.u1[:, j])
            if gen.random() >= 1.0 / (1.0 + math.exp(-2.0 * inner)):
                self.u1[:, j] = -self.u1[:, j]
        if k > 1:
            def u1_energy(u):
                quad = np.sum((c * c) * np.sum(u * (a11 @ u), axis=0))
                return float(quad + np.sum(lin1 * u))

            for _ in range(k):
                i, j = gen.choice(k, size=2, replace=False)
                ang = gen.uniform(-0.5, 0.5)
                rot = np.eye(k)
                rot[i, i] = rot[j, j] = math.cos(ang)
                rot[i, j] = -math.sin(ang)
                rot[j, i] = math.sin(ang)
                cand = self.u1 @ rot
                if math.log(gen.random()) <= u1_energy(cand) - u1_energy(self.u1):
                    self.u1 = cand

        # U2 on the Stiefel manifold: composite column kernel
        from .samplers import _matrix_bmf_sweep  # deferred to avoid cycle at import

        lin2 = 2.0 * a12.T @ (self.u1 * (c * s))
        self.u2 = _matrix_bmf_sweep(lin2, a22, s * s, self.u2, gen)


# ---------------------------------------------------------------------------
# Meta-training

def _ridge_initial(tasks: list[TaskData], k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    p = tasks[0].p
    betas = np.empty((len(tasks), p))
    sig2 = np.empty(len(tasks))
    for s, task in enumerate(tasks):
        gram = task.X.T @ task.X + np.eye(p)
        beta = np.linalg.solve(gram, task.X.T @ task.y)
        betas[s] = beta
        resid = task.y - task.X @ beta
        sig2[s] = max(float(resid @ resid) / max(task.n, 1), 1e-8)
    u, _, _ = np.linalg.svd(betas.T, full_matrices=True)
    return betas, sig2, u[:, :k]


def gibbs_meta_train(
    tasks: list[TaskData],
    k: int,
    hyper: HyperParams | None = None,
    iters: int = 2000,
    burnin: int | None = None,
    thin: int = 5,
    kernel: str = "bingham",
    rng: RngStream | int = 0,
    record_task_states: bool = True,
    initial: tuple[np.ndarray, np.ndarray, np.ndarray, float] | None = None,
    start_iteration: int = 0,
) -> PosteriorDraws:
    """Run the training sweep and return thinned posterior draws.

    Sweep order per iteration: every task's coefficients, then its noise
    variance when inferred, then the shared basis with the chosen kernel
    ("bingham" or "cs"), then the diversity parameter.  The run is
    bit-reproducible for a fixed seed: every draw uses a stream addressed
    by (phase, sweep, task), independent of execution order.

    ``initial``/``start_iteration`` resume an interrupted chain: pass the
    final (betas, sigma2s, Z, phi) state and the number of sweeps already
    performed, keeping the original master seed.
    """
    if not tasks:
        raise ValueError("need at least one task")
    hyper = hyper or HyperParams()
    p = tasks[0].p
    for t in tasks:
        if t.p != p:
            raise DimensionError("all tasks must share the predictor dimension")
    if not 1 <= k < p:
        raise DimensionError(f"need 1 <= k < p, got k={k}, p={p}")
    if burnin is None:
        burnin = iters // 2
    if not 0 <= burnin < iters + start_iteration:
        raise ValueError("need 0 <= burnin < total iterations")
    kernel = kernel.lower()
    if kernel in ("cs-decomposition", "cs_decomposition"):
        kernel = "cs"
    if kernel not in ("bingham", "cs"):
        raise ValueError(f"unknown kernel '{kernel}'")
    stream = rng if isinstance(rng, RngStream) else RngStream(int(rng))

    check_design_informativeness([t.X for t in tasks])

    if initial is None:
        betas, sig2, z = _ridge_initial(tasks, k)
        phi = 0.5
    else:
        betas, sig2, z, phi = initial
        betas = np.array(betas, dtype=np.float64)
        sig2 = np.array(sig2, dtype=np.float64)
        z = np.array(z, dtype=np.float64)
    cs_state = _CsState(z, k) if kernel == "cs" else None

    n_tasks = len(tasks)
    global_states: list[GlobalState] = []
    task_states: list[list[TaskState]] | None = [] if record_task_states else None
    kept_iters: list[int] = []
    grams = [
        (t.X.T @ t.X, t.X.T @ t.y) if t.p <= t.n else (None, None) for t in tasks
    ]

    total = start_iteration + iters
    for sweep in range(start_iteration + 1, total + 1):
        for s, task in enumerate(tasks):
            xtx, xty = grams[s]
            gen = stream.child(1, sweep, s).generator()
            betas[s] = _sample_beta_conditional(
                task.X, task.y, xtx, xty, z, phi, sig2[s], gen
            )
            if task.infers_noise:
                spec = sigma2_full_conditional(task, betas[s], hyper)
                sig2[s] = spec.sample(stream.child(2, sweep, s))

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
                f"sweep {sweep}: coefficients lie in the subspace; "
                f"clamping phi at the floor {hyper.phi_floor}",
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

        if not (np.isfinite(phi) and np.all(np.isfinite(betas)) and np.all(np.isfinite(z))):
            raise NumericFailureError(
                f"non-finite sampler state at sweep {sweep}", iteration=sweep
            )

        if sweep > burnin and (sweep - burnin) % thin == 0:
            global_states.append(GlobalState(basis=StiefelPoint(z.copy()), phi=phi))
            kept_iters.append(sweep)
            if task_states is not None:
                task_states.append(
                    [TaskState(beta=betas[s].copy(), sigma2=float(sig2[s])) for s in range(n_tasks)]
                )

    draws = PosteriorDraws(
        global_states=global_states,
        task_states=task_states,
        iteration_index=kept_iters,
        burnin=burnin,
        thin=thin,
        seed_manifest={"seed": stream.seed, "path": list(stream.path), "kernel": kernel},
    )
    expected = max(0, (total - burnin) // thin) - max(0, (start_iteration - burnin) // thin)
    if draws.n_draws != expected:
        raise AssertionError(f"draw bookkeeping error: {draws.n_draws} != {expected}")
    draws.final_state = (betas, sig2, z, phi)
    draws.total_iterations = total
    return draws


# ---------------------------------------------------------------------------
# Meta-testing and prediction

def meta_test_posterior(
    test: TaskData,
    draws: PosteriorDraws | list[GlobalState] | None = None,
    point: tuple[ProjectionMatrix | np.ndarray, float] | None = None,
    rng: RngStream | int = 0,
    sigma2: float | None = None,
    draws_per_component: int = 1,
) -> np.ndarray:
    """Draw test-task coefficients from the posterior mixture.

    Each retained global draw (or the single point estimate) contributes
    a Gaussian conditional given the labeled test data; pooling the draws
    approximates the mixture posterior.  Returns an array of shape
    (n_components * draws_per_component, p).
    """
    if (draws is None) == (point is None):
        raise ValueError("provide exactly one of draws or point")
    if point is not None:
        proj, phi_hat = point
        if not isinstance(proj, ProjectionMatrix):
            proj = ProjectionMatrix(np.asarray(proj, dtype=np.float64),
                                    rank=int(round(float(np.trace(proj)))))
        components = [GlobalState(basis=basis_from_projection(proj), phi=float(phi_hat))]
    else:
        components = draws.global_states if isinstance(draws, PosteriorDraws) else list(draws)
    if not components:
        raise ValueError("no global draws to mix over")
    sig2 = _resolve_sigma2(test, sigma2)
    stream = rng if isinstance(rng, RngStream) else RngStream(int(rng))
    out = np.empty((len(components) * draws_per_component, test.p))
    row = 0
    for idx, g in enumerate(components):
        cond = _beta_conditional_arrays(test.X, test.y, g.basis.matrix, g.phi, sig2, "auto")
        chol = np.linalg.cholesky(cond.cov)
        gen = stream.child(idx).generator()
        for _ in range(draws_per_component):
            out[row] = cond.mean + chol @ gen.standard_normal(test.p)
            row += 1
    return out


@dataclass
class PredictiveSummary:
    """Posterior predictive draws and moments at validation covariates."""

    y_draws: np.ndarray
    y_hat: np.ndarray
    sigma_y: np.ndarray

    @property
    def trace_sigma_y(self) -> float:
        return float(np.trace(self.sigma_y))


def posterior_predictive(
    X_val: np.ndarray,
    beta_draws: np.ndarray,
    sigma2_star: float,
    rng: RngStream | int = 0,
    y_draws_per_beta: int = 1,
) -> PredictiveSummary:
    """Posterior predictive over new covariates.

    Per coefficient draw the responses are Gaussian around X beta with
    the known noise variance; the reported covariance composes the
    between-draw covariance of the means with the noise term (law of
    total variance).
    """
    X_val = np.asarray(X_val, dtype=np.float64)
    beta_draws = np.atleast_2d(np.asarray(beta_draws, dtype=np.float64))
    if X_val.ndim != 2 or X_val.shape[0] < 1:
        raise DimensionError("X_val must be a nonempty matrix")
    if beta_draws.shape[0] < 1:
        raise ValueError("need at least one coefficient draw")
    if sigma2_star < 0:
        raise ValueError("sigma2_star must be nonnegative")
    means = beta_draws @ X_val.T
    y_hat = means.mean(axis=0)
    centered = means - y_hat
    sigma_y = centered.T @ centered / means.shape[0]
    sigma_y[np.diag_indices_from(sigma_y)] += sigma2_star
    stream = rng if isinstance(rng, RngStream) else RngStream(int(rng))
    gen = stream.generator()
    n_draws = means.shape[0] * y_draws_per_beta
    y_draws = np.repeat(means, y_draws_per_beta, axis=0)
    if sigma2_star > 0:
        y_draws = y_draws + math.sqrt(sigma2_star) * gen.standard_normal((n_draws, X_val.shape[0]))
    return PredictiveSummary(y_draws=y_draws, y_hat=y_hat, sigma_y=(sigma_y + sigma_y.T) / 2.0)


# ---------------------------------------------------------------------------
# Prior-scale calibration via tail bounds

def calibrate_b1(a1: float, mu_lambda: float, k: int, t: int, delta: float) -> float:
    """Largest scale hyperparameter meeting a norm tail bound across tasks.

    Under an inverse-gamma scale with shape a1, the squared coordinate
    norm over the scale follows an F distribution; bounding its upper
    quantile at level delta/t (union bound over t tasks) by the
    incoherence budget gives
    b1 <= a1 * mu_lambda / (k * F_inv_{k, 2 a1}(1 - delta / t)).
    """
    if a1 <= 0 or mu_lambda <= 0 or k <= 0 or t <= 0 or delta <= 0:
        raise ValueError("all inputs must be positive")
    if delta >= 1:
        raise ValueError("delta must be below 1")
    q = 1.0 - delta / t
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile level {q} outside (0, 1)")
    f_quant = float(stats.f.ppf(q, k, 2.0 * a1))
    if not np.isfinite(f_quant) or f_quant <= 0:
        raise ValueError("F quantile is not finite and positive")
    return a1 * mu_lambda / (k * f_quant)
