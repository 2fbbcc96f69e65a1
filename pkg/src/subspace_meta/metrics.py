"""Diagnostics: subspace recovery, predictive accuracy, coverage, KL bound."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import DimensionError, InvariantError, NotPositiveDefiniteError
from .manifold import ProjectionMatrix, principal_angles

__all__ = [
    "MetricsReport",
    "r_squared",
    "coverage_radius",
    "empirical_coverage",
    "spectral_norm",
    "KlBoundResult",
    "kl_gaussian_and_bound",
    "sin2_theta_series",
]


@dataclass
class MetricsReport:
    """Bundle of the diagnostics reported for one experiment cell."""

    sin2_theta1: list[float] = field(default_factory=list)
    r_squared: float | None = None
    coverage_radius: float | None = None
    coverage_probability: float | None = None
    trace_sigma_y: float | None = None
    variance_proportion: float | None = None

    def __post_init__(self):
        for v in self.sin2_theta1:
            if not -1e-12 <= v <= 1.0 + 1e-12:
                raise InvariantError(f"sin^2 theta_1 value {v} outside [0, 1]")
        if self.r_squared is not None and self.r_squared > 1.0 + 1e-12:
            raise InvariantError("r_squared cannot exceed 1")
        if self.coverage_radius is not None and self.coverage_radius < 0:
            raise InvariantError("coverage radius must be nonnegative")
        if self.coverage_probability is not None and not 0 <= self.coverage_probability <= 1:
            raise InvariantError("coverage probability must lie in [0, 1]")
        if self.trace_sigma_y is not None and self.trace_sigma_y < 0:
            raise InvariantError("predictive trace must be nonnegative")
        if self.variance_proportion is not None and not 0 < self.variance_proportion <= 1:
            raise InvariantError("variance proportion must lie in (0, 1]")

    def as_dict(self) -> dict:
        return {
            "r_squared": self.r_squared,
            "coverage_radius": self.coverage_radius,
            "coverage_probability": self.coverage_probability,
            "trace_sigma_y": self.trace_sigma_y,
            "variance_proportion": self.variance_proportion,
        }


def r_squared(y_true, y_hat) -> float:
    """Coefficient of determination with mean-centered total sum of squares."""
    y_true = np.asarray(y_true, dtype=np.float64).ravel()
    y_hat = np.asarray(y_hat, dtype=np.float64).ravel()
    if y_true.size != y_hat.size:
        raise DimensionError("y_true and y_hat lengths differ")
    if y_true.size < 2:
        raise ValueError("need at least two observations")
    ss_tot = float(np.sum((y_true - y_true.mean()) ** 2))
    if ss_tot <= 1e-300:
        raise ValueError("y_true is constant; R^2 is undefined")
    ss_res = float(np.sum((y_true - y_hat) ** 2))
    return 1.0 - ss_res / ss_tot


def coverage_radius(pred_draws, y_hat, level: float) -> float:
    """Smallest radius covering the given fraction of predictive draws.

    The level-quantile of the Euclidean distances between predictive
    draws and the predictive mean, as an order statistic.
    """
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    draws = np.atleast_2d(np.asarray(pred_draws, dtype=np.float64))
    if draws.shape[0] < 100:
        raise ValueError(f"need at least 100 predictive draws, got {draws.shape[0]}")
    y_hat = np.asarray(y_hat, dtype=np.float64).ravel()
    dist = np.sort(np.linalg.norm(draws - y_hat, axis=1))
    idx = math.ceil(level * dist.size) - 1
    return float(dist[idx])


def empirical_coverage(r: float, truth_samples, y_hat) -> float:
    """Fraction of realized outcomes within radius r of the prediction."""
    samples = np.atleast_2d(np.asarray(truth_samples, dtype=np.float64))
    if samples.shape[0] < 1:
        raise ValueError("need at least one realized sample")
    y_hat = np.asarray(y_hat, dtype=np.float64).ravel()
    dist = np.linalg.norm(samples - y_hat, axis=1)
    return float(np.mean(dist <= r))


def spectral_norm(X: np.ndarray, tol: float = 1e-10, max_iter: int = 100_000) -> float:
    """Largest singular value by power iteration on X'X."""
    X = np.asarray(X, dtype=np.float64)
    gen = np.random.default_rng(np.random.SeedSequence(1863))
    v = gen.standard_normal(X.shape[1])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = X.T @ (X @ v)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v_new = w / norm
        lam_new = float(v_new @ (X.T @ (X @ v_new)))
        if abs(lam_new - lam) <= tol * max(lam_new, 1e-300):
            return math.sqrt(lam_new)
        v, lam = v_new, lam_new
    return math.sqrt(lam)


@dataclass(frozen=True)
class KlBoundResult:
    """Exact predictive KL divergence and its closed-form upper bound."""

    kl: float
    bound: float
    bound_terms: tuple[float, float, float]


def kl_gaussian_and_bound(
    P: ProjectionMatrix,
    phi: float,
    P0: ProjectionMatrix,
    phi0: float,
    X_val: np.ndarray,
    sigma_star2: float,
) -> KlBoundResult:
    """Predictive KL divergence against the truth, with its upper bound.

    The KL is between the zero-mean Gaussians with covariances
    X (P0 + phi0 (I - P0)) X' + s2 I  and  X (P + phi (I - P)) X' + s2 I.
    The bound is
    (1/4) s2^{-2} ||X||_2^4 ((1 - phi0) ||P - P0||_F + sqrt(p-k) |phi - phi0|)^2,
    reported together with its three expanded terms.  Raises when the
    computed KL exceeds the bound beyond rounding, since the inequality
    holds exactly.
    """
    if sigma_star2 <= 0:
        raise ValueError("sigma_star2 must be positive")
    if P.p != P0.p or P.rank != P0.rank:
        raise DimensionError("P and P0 must share dimension and rank")
    X_val = np.asarray(X_val, dtype=np.float64)
    m = X_val.shape[0]
    p, k = P.p, P.rank

    def predictive_cov(proj, diversity):
        inner = proj.matrix + diversity * (np.eye(p) - proj.matrix)
        cov = X_val @ inner @ X_val.T
        cov[np.diag_indices_from(cov)] += sigma_star2
        return (cov + cov.T) / 2.0

    sigma0 = predictive_cov(P0, phi0)
    sigma = predictive_cov(P, phi)
    try:
        chol = cho_factor(sigma)
        chol0 = cho_factor(sigma0)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(str(exc)) from exc
    trace_term = float(np.trace(cho_solve(chol, sigma0)))
    logdet = 2.0 * float(np.sum(np.log(np.diag(chol[0]))))
    logdet0 = 2.0 * float(np.sum(np.log(np.diag(chol0[0]))))
    kl = 0.5 * (trace_term - m + logdet - logdet0)

    xnorm = spectral_norm(X_val)
    dp = float(np.linalg.norm(P.matrix - P0.matrix, "fro"))
    dphi = abs(phi - phi0)
    lead = 0.25 * xnorm**4 / sigma_star2**2
    t1 = lead * (1.0 - phi0) ** 2 * dp**2
    t2 = lead * 2.0 * (1.0 - phi0) * math.sqrt(p - k) * dphi * dp
    t3 = lead * (p - k) * dphi**2
    bound = lead * ((1.0 - phi0) * dp + math.sqrt(p - k) * dphi) ** 2
    if kl > bound + 1e-9 * max(1.0, bound):
        raise InvariantError(
            f"computed KL {kl:.6e} exceeds its bound {bound:.6e}; numerical failure"
        )
    return KlBoundResult(kl=kl, bound=bound, bound_terms=(t1, t2, t3))


def sin2_theta_series(draws, P0: ProjectionMatrix) -> list[float]:
    """Per-draw squared sine of the largest principal angle to the truth."""
    if hasattr(draws, "projections"):
        projections = draws.projections()
    else:
        projections = list(draws)
    if not projections:
        raise ValueError("no draws supplied")
    return [principal_angles(proj, P0).sin2_theta1 for proj in projections]
