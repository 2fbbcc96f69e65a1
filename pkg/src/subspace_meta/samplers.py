"""Exact and MCMC samplers used by the Gibbs sweep.

Multivariate Gaussians and (truncated) inverse-gamma draws are exact.
The Polya-Gamma PG(1, c) sampler is the exact alternating-series
accept/reject method on the exponentially tilted Jacobi density.  Vector
Bingham draws use an angular-central-Gaussian rejection envelope whose
acceptance rate stays bounded as the density concentrates, so the matrix
Bingham update is a genuine column Gibbs sweep.  Matrix von Mises-Fisher
columns are drawn exactly; a composite kernel handles the mixed
quadratic-plus-linear conditionals of the cosine-sine parameterization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special
from scipy.linalg import solve_triangular
from scipy.optimize import brentq

from .errors import (
    DimensionError,
    InvariantError,
    MassUnderflowError,
    NotPositiveDefiniteError,
)
from .manifold import StiefelPoint
from .rng import as_generator

__all__ = [
    "BinghamParam",
    "ThetaConditionalCoeffs",
    "sample_mvn",
    "sample_trunc_inverse_gamma",
    "sample_polya_gamma_1",
    "sample_vector_bingham",
    "sample_matrix_bingham",
    "sample_vector_vmf",
    "sample_matrix_vmf",
    "mh_theta_update",
    "theta_log_density",
    "theta_proposal_log_density",
    "theta_from_x",
]


# ---------------------------------------------------------------------------
# Gaussian draws

def sample_mvn(mean, cov=None, prec=None, rng=None) -> np.ndarray:
    """Draw from N(mean, Sigma) given either the covariance or the precision.

    Cholesky based; raises NotPositiveDefiniteError when the factorization
    fails.
    """
    if (cov is None) == (prec is None):
        raise ValueError("provide exactly one of cov or prec")
    mean = np.asarray(mean, dtype=np.float64).ravel()
    mat = np.asarray(cov if cov is not None else prec, dtype=np.float64)
    if mat.shape != (mean.size, mean.size):
        raise DimensionError(f"matrix shape {mat.shape} does not match mean size {mean.size}")
    try:
        chol = np.linalg.cholesky(mat)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"matrix is not positive definite: {exc}") from exc
    xi = as_generator(rng).standard_normal(mean.size)
    if cov is not None:
        return mean + chol @ xi
    return mean + solve_triangular(chol.T, xi, lower=False)


# ---------------------------------------------------------------------------
# Truncated inverse-gamma

def _ig_gamma_bounds(scale: float, lo: float, hi: float) -> tuple[float, float]:
    # X in (lo, hi)  <=>  g = scale/X in (scale/hi, scale/lo)
    g_lo = 0.0 if np.isinf(hi) else scale / hi
    g_hi = np.inf if lo <= 0.0 else scale / lo
    return g_lo, g_hi


def _trunc_gamma_rejection(shape: float, g_lo: float, g_hi: float, gen, max_iter: int = 100_000) -> float:
    """Exact draw of g ~ Gamma(shape, 1) restricted to (g_lo, g_hi).

    Used when the region mass underflows the inverse-CDF path.  Envelopes:
    a tangent exponential on tail regions, a uniform cap when the interval
    straddles the mode.
    """
    mode = max(shape - 1.0, 0.0)

    def log_h(g):
        return (shape - 1.0) * math.log(g) - g

    if g_lo >= mode and g_lo > 0.0:
        lam = 1.0 - (shape - 1.0) / g_lo if shape >= 1.0 else 1.0
        span = g_hi - g_lo
        for _ in range(max_iter):
            u = gen.random()
            if np.isinf(span):
                g = g_lo + gen.exponential() / lam
            else:
                g = g_lo - math.log1p(-u * (1.0 - math.exp(-lam * span))) / lam
            log_acc = log_h(g) - log_h(g_lo) + lam * (g - g_lo)
            if math.log(gen.random()) <= log_acc:
                return g
    elif g_hi <= mode:
        lam = (shape - 1.0) / g_hi - 1.0
        for _ in range(max_iter):
            u = gen.random()
            if lam > 1e-300:
                g = g_hi + math.log1p(-u * (1.0 - math.exp(-lam * (g_hi - g_lo)))) / lam
            else:
                g = g_lo + u * (g_hi - g_lo)
            log_acc = log_h(g) - log_h(g_hi) - lam * (g - g_hi)
            if math.log(gen.random()) <= log_acc:
                return g
    else:
        log_peak = log_h(mode) if mode > 0 else 0.0
        for _ in range(max_iter):
            g = g_lo + gen.random() * (g_hi - g_lo)
            if math.log(gen.random()) <= log_h(g) - log_peak:
                return g
    raise MassUnderflowError(
        f"rejection fallback failed: Gamma({shape}) on ({g_lo:.6g}, {g_hi:.6g}) "
        "has no reachable mass"
    )


def sample_trunc_inverse_gamma(shape: float, scale: float, lo: float, hi: float, rng) -> float:
    """Draw from IG(shape, scale) restricted to (lo, hi).

    Inverse-CDF in the incomplete-gamma parameterization of 1/X; falls
    back to exact rejection sampling when the region mass is below 1e-12.
    Raises MassUnderflowError with diagnostics when even the fallback
    finds no mass.
    """
    if shape <= 0 or scale <= 0:
        raise ValueError(f"shape and scale must be positive, got {shape}, {scale}")
    if not (0 <= lo < hi):
        raise ValueError(f"need 0 <= lo < hi, got lo={lo}, hi={hi}")
    gen = as_generator(rng)
    g_lo, g_hi = _ig_gamma_bounds(scale, lo, hi)

    p_lo = special.gammainc(shape, g_lo) if g_lo > 0 else 0.0
    p_hi = special.gammainc(shape, g_hi) if np.isfinite(g_hi) else 1.0
    mass = p_hi - p_lo
    if mass >= 1e-12:
        if p_hi <= 0.5:
            u = p_lo + gen.random() * mass
            g = special.gammaincinv(shape, u)
        else:
            q_lo = special.gammaincc(shape, g_hi) if np.isfinite(g_hi) else 0.0
            q_hi = special.gammaincc(shape, g_lo) if g_lo > 0 else 1.0
            u = q_lo + gen.random() * (q_hi - q_lo)
            g = special.gammainccinv(shape, u)
    else:
        try:
            g = _trunc_gamma_rejection(shape, g_lo, g_hi, gen)
        except MassUnderflowError as exc:
            raise MassUnderflowError(
                f"truncated IG(shape={shape}, scale={scale}) on ({lo}, {hi}) "
                f"has mass {mass:.3e}; {exc}"
            ) from exc
    g = min(max(g, g_lo), g_hi)
    if g <= 0:
        return hi if np.isfinite(hi) else float("inf")
    return scale / g


# ---------------------------------------------------------------------------
# Polya-Gamma PG(1, c)

_PG_TRUNC = 0.64


def _pg_coef(n: int, x: float) -> float:
    # n-th coefficient of the alternating series for the Jacobi density
    if x > _PG_TRUNC:
        return math.pi * (n + 0.5) * math.exp(-((n + 0.5) ** 2) * math.pi**2 * x / 2.0)
    return (
        (2.0 / (math.pi * x)) ** 1.5
        * math.pi
        * (n + 0.5)
        * math.exp(-2.0 * (n + 0.5) ** 2 / x)
    )


def _log_inv_gauss_cdf(t: float, z: float) -> float:
    # log P(X <= t), X inverse-Gaussian with mean 1/z, shape 1 (z >= 0)
    rt = math.sqrt(t)
    la = special.log_ndtr((t * z - 1.0) / rt)
    lb = 2.0 * z + special.log_ndtr(-(t * z + 1.0) / rt)
    return np.logaddexp(la, lb)


def _sample_trunc_inv_gauss(z: float, gen) -> float:
    # inverse-Gaussian(mean 1/z, shape 1) restricted to (0, _PG_TRUNC)
    t = _PG_TRUNC
    if z < 1.0 / t:
        while True:
            e1 = gen.exponential()
            e2 = gen.exponential()
            while e1 * e1 > 2.0 * e2 / t:
                e1 = gen.exponential()
                e2 = gen.exponential()
            x = t / (1.0 + t * e1) ** 2
            if math.log(gen.random()) <= -0.5 * z * z * x:
                return x
    mu = 1.0 / z
    while True:
        y = gen.standard_normal() ** 2
        x = mu + 0.5 * mu * mu * y - 0.5 * mu * math.sqrt(4.0 * mu * y + (mu * y) ** 2)
        if gen.random() > mu / (mu + x):
            x = mu * mu / x
        if x < t:
            return x


def sample_polya_gamma_1(c: float, rng) -> float:
    """Exact draw from the Polya-Gamma distribution PG(1, c).

    Alternating-series accept/reject on the exponentially tilted Jacobi
    density; the tilt c = 0 case is the untilted sampler.
    """
    if not np.isfinite(c):
        raise ValueError("tilt must be finite")
    gen = as_generator(rng)
    z = abs(c) / 2.0
    t = _PG_TRUNC
    rate = math.pi**2 / 8.0 + z * z / 2.0
    log_p = math.log(math.pi / (2.0 * rate)) - rate * t
    log_q = math.log(2.0) - z + _log_inv_gauss_cdf(t, z)
    prob_right = 1.0 / (1.0 + math.exp(log_q - log_p))
    while True:
        if gen.random() < prob_right:
            x = t + gen.exponential() / rate
        else:
            x = _sample_trunc_inv_gauss(z, gen)
        s = _pg_coef(0, x)
        y = gen.random() * s
        n = 0
        while True:
            n += 1
            if n % 2 == 1:
                s -= _pg_coef(n, x)
                if y <= s:
                    return x / 4.0
            else:
                s += _pg_coef(n, x)
                if y > s:
                    break


# ---------------------------------------------------------------------------
# Vector and matrix Bingham

@dataclass(frozen=True)
class BinghamParam:
    """Symmetric log-density parameter of a matrix Bingham distribution.

    The target density on bases with k orthonormal columns is
    proportional to exp(tr(Z' A Z)).
    """

    a: np.ndarray
    k: int

    def __post_init__(self):
        a = np.asarray(self.a, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError(f"A must be square, got shape {a.shape}")
        if np.max(np.abs(a - a.T)) > 1e-10:
            raise InvariantError("A must be symmetric within 1e-10")
        if not 1 <= self.k < a.shape[0]:
            raise DimensionError(f"need 1 <= k < p, got k={self.k}, p={a.shape[0]}")
        a = (a + a.T) / 2.0
        a.flags.writeable = False
        object.__setattr__(self, "a", a)

    @property
    def p(self) -> int:
        return self.a.shape[0]


def _acg_concentration(mu: np.ndarray) -> float:
    # solve sum_i 1/(b + 2 mu_i) = 1 for b in (0, d]; mu >= 0 with min(mu) = 0
    d = mu.size

    def f(b):
        return np.sum(1.0 / (b + 2.0 * mu)) - 1.0

    hi = float(d)
    if f(hi) >= 0.0:
        return hi
    lo = 1e-12
    while f(lo) < 0.0:
        lo /= 16.0
        if lo < 1e-280:
            return hi
    return float(brentq(f, lo, hi, xtol=1e-12))


def _vector_bingham_eigen(lam: np.ndarray, gen) -> np.ndarray:
    # exact draw of w on S^{d-1} with density prop. to exp(sum lam_i w_i^2),
    # via rejection from an angular central Gaussian envelope
    d = lam.size
    if d == 1:
        return np.array([1.0 if gen.random() < 0.5 else -1.0])
    mu = lam.max() - lam
    if mu.max() < 1e-14:
        w = gen.standard_normal(d)
        return w / np.linalg.norm(w)
    b = _acg_concentration(mu)
    omega = 1.0 + 2.0 * mu / b
    log_bound = -(d - b) / 2.0 + (d / 2.0) * math.log(d / b)
    scale = 1.0 / np.sqrt(omega)
    while True:
        y = gen.standard_normal(d) * scale
        w = y / np.linalg.norm(y)
        m = float(mu @ (w * w))
        log_acc = -m + (d / 2.0) * math.log1p(2.0 * m / b) - log_bound
        if math.log(gen.random()) <= log_acc:
            return w


def sample_vector_bingham(a: np.ndarray, rng) -> np.ndarray:
    """Exact draw from the density prop. to exp(x' A x) on the unit sphere."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError("A must be square")
    gen = as_generator(rng)
    lam, vecs = np.linalg.eigh((a + a.T) / 2.0)
    w = _vector_bingham_eigen(lam, gen)
    return vecs @ w


def _complement_basis(z_rest: np.ndarray, p: int) -> np.ndarray:
    if z_rest.shape[1] == 0:
        return np.eye(p)
    # orthonormal basis of the orthogonal complement of the column span
    u, s, _ = np.linalg.svd(z_rest, full_matrices=True)
    return u[:, z_rest.shape[1]:]


def _reorthonormalize(z: np.ndarray) -> np.ndarray:
    # roundoff cleanup of an already near-orthonormal matrix
    q, r = np.linalg.qr(z)
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return q * d


def sample_matrix_bingham(param: BinghamParam, current: StiefelPoint, sweeps: int = 1, rng=None) -> StiefelPoint:
    """Gibbs sweeps over columns for the matrix Bingham distribution.

    Each column conditional is a vector Bingham density on the unit
    sphere of the orthogonal complement of the remaining columns and is
    drawn exactly, so the chain is invariant for exp(tr(Z' A Z)).
    """
    if current.p != param.p:
        raise DimensionError(f"current has p={current.p}, parameter has p={param.p}")
    if current.k != param.k:
        raise DimensionError(f"current has k={current.k}, parameter has k={param.k}")
    if sweeps < 1:
        raise ValueError("sweeps must be >= 1")
    gen = as_generator(rng)
    z = current.matrix.copy()
    p, k = z.shape
    for _ in range(sweeps):
        for i in range(k):
            rest = np.delete(z, i, axis=1)
            basis = _complement_basis(rest, p)
            a_proj = basis.T @ param.a @ basis
            u = sample_vector_bingham(a_proj, gen)
            z[:, i] = basis @ u
        z = _reorthonormalize(z)
    return StiefelPoint(z)


# ---------------------------------------------------------------------------
# Vector and matrix von Mises-Fisher, and the composite kernel

def sample_vector_vmf(b: np.ndarray, rng) -> np.ndarray:
    """Exact draw from the density prop. to exp(b' x) on the unit sphere."""
    b = np.asarray(b, dtype=np.float64).ravel()
    gen = as_generator(rng)
    d = b.size
    kappa = float(np.linalg.norm(b))
    if d == 1:
        prob_pos = special.expit(2.0 * b[0])
        return np.array([1.0 if gen.random() < prob_pos else -1.0])
    if kappa < 1e-14:
        x = gen.standard_normal(d)
        return x / np.linalg.norm(x)
    mu = b / kappa
    if d == 2:
        ref = math.atan2(mu[1], mu[0])
        ang = gen.vonmises(ref, kappa)
        return np.array([math.cos(ang), math.sin(ang)])
    # rejection with a beta envelope for the cosine of the polar angle
    dim = d - 1
    bb = (-2.0 * kappa + math.sqrt(4.0 * kappa**2 + dim**2)) / dim
    x0 = (1.0 - bb) / (1.0 + bb)
    cc = kappa * x0 + dim * math.log(1.0 - x0 * x0)
    while True:
        zz = gen.beta(dim / 2.0, dim / 2.0)
        w = (1.0 - (1.0 + bb) * zz) / (1.0 - (1.0 - bb) * zz)
        if kappa * w + dim * math.log(1.0 - x0 * w) - cc >= math.log(gen.random()):
            break
    g = gen.standard_normal(d)
    g -= (g @ mu) * mu
    norm = np.linalg.norm(g)
    if norm < 1e-300:
        g = np.eye(d)[np.argmin(np.abs(mu))] - mu * mu[np.argmin(np.abs(mu))]
        norm = np.linalg.norm(g)
    tangent = g / norm
    return w * mu + math.sqrt(max(0.0, 1.0 - w * w)) * tangent


_SURFACE_LOG = {}


def _log_sphere_surface(d: int) -> float:
    if d not in _SURFACE_LOG:
        _SURFACE_LOG[d] = math.log(2.0) + (d / 2.0) * math.log(math.pi) - special.gammaln(d / 2.0)
    return _SURFACE_LOG[d]


def _log_vmf_pdf(x: np.ndarray, b: np.ndarray) -> float:
    d = x.size
    kappa = float(np.linalg.norm(b))
    if kappa < 1e-14:
        return -_log_sphere_surface(d)
    nu = d / 2.0 - 1.0
    log_norm = nu * math.log(kappa) - (d / 2.0) * math.log(2.0 * math.pi)
    log_norm -= math.log(special.ive(nu, kappa)) + kappa
    return log_norm + float(b @ x)


def _log_acg_pdf(x: np.ndarray, omega: np.ndarray, vecs: np.ndarray) -> float:
    # omega: eigenvalues of the inverse-covariance in the basis `vecs`
    d = x.size
    w = vecs.T @ x
    quad = float(np.sum(omega * w * w))
    return 0.5 * float(np.sum(np.log(omega))) - _log_sphere_surface(d) - (d / 2.0) * math.log(quad)


def _vector_bmf_step(a: np.ndarray | None, b: np.ndarray, x_old: np.ndarray, gen, n_steps: int = 2) -> np.ndarray:
    """Metropolis-Hastings update invariant for exp(b'x + x'Ax) on the sphere.

    Independence proposals mix an angular central Gaussian matched to the
    quadratic term with a von Mises-Fisher matched to the linear term, so
    acceptance stays healthy whichever term dominates.
    """
    d = x_old.size
    if d == 1:
        prob_pos = special.expit(2.0 * b[0])
        return np.array([1.0 if gen.random() < prob_pos else -1.0])
    lam, vecs = np.linalg.eigh((a + a.T) / 2.0)
    mu = lam.max() - lam
    bb = _acg_concentration(mu) if mu.max() > 1e-14 else float(d)
    omega = 1.0 + 2.0 * mu / bb
    scale = 1.0 / np.sqrt(omega)

    def log_target(x):
        w = vecs.T @ x
        return float(b @ x) + float(np.sum(lam * w * w))

    def log_proposal(x):
        la = math.log(0.5) + _log_acg_pdf(x, omega, vecs)
        lb = math.log(0.5) + _log_vmf_pdf(x, b)
        return np.logaddexp(la, lb)

    x = x_old
    lt_x = log_target(x)
    lq_x = log_proposal(x)
    for _ in range(n_steps):
        if gen.random() < 0.5:
            y = gen.standard_normal(d) * scale
            prop = vecs @ (y / np.linalg.norm(y))
        else:
            prop = sample_vector_vmf(b, gen)
        lt_p = log_target(prop)
        lq_p = log_proposal(prop)
        if math.log(gen.random()) <= lt_p - lt_x + lq_x - lq_p:
            x, lt_x, lq_x = prop, lt_p, lq_p
    return x


def _matrix_bmf_sweep(
    linear: np.ndarray,
    quad: np.ndarray | None,
    quad_weights: np.ndarray | None,
    z: np.ndarray,
    gen,
) -> np.ndarray:
    """One column-Gibbs sweep for exp(tr(F'U) + sum_j w_j u_j' A u_j).

    Pure linear conditionals (no quadratic term) are drawn exactly; mixed
    conditionals use the composite Metropolis kernel.
    """
    p, k = z.shape
    for j in range(k):
        rest = np.delete(z, j, axis=1)
        basis = _complement_basis(rest, p)
        b = basis.T @ linear[:, j]
        if quad is None or quad_weights is None or abs(quad_weights[j]) < 1e-300:
            u = sample_vector_vmf(b, gen)
        else:
            a_proj = quad_weights[j] * (basis.T @ quad @ basis)
            u = _vector_bmf_step(a_proj, b, basis.T @ z[:, j], gen)
        z[:, j] = basis @ u
    return _reorthonormalize(z)


def sample_matrix_vmf(f: np.ndarray, current: StiefelPoint, rng, sweeps: int = 1,
                      quad: np.ndarray | None = None,
                      quad_weights: np.ndarray | None = None) -> StiefelPoint:
    """MCMC update invariant for exp(tr(F'U)) on the Stiefel manifold.

    With ``quad``/``quad_weights`` the target gains per-column quadratic
    terms sum_j w_j u_j' Q u_j and the composite Bingham-vMF kernel is
    used; without them every column conditional is drawn exactly.
    """
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (current.p, current.k):
        raise DimensionError(f"F has shape {f.shape}, expected {(current.p, current.k)}")
    gen = as_generator(rng)
    z = current.matrix.copy()
    for _ in range(sweeps):
        z = _matrix_bmf_sweep(f, quad, quad_weights, z, gen)
    return StiefelPoint(z)


# ---------------------------------------------------------------------------
# Scaled-beta Metropolis-Hastings kernel for squared-sine angle coordinates

@dataclass(frozen=True)
class ThetaConditionalCoeffs:
    """Coefficients of one angle's conditional in x = sin^2(theta) form.

    The target on [0, x_max] is proportional to
    exp(-(alpha - gamma) x + 2 delta sqrt(x (1 - x))) x^{-1/2} (1-x)^{-1/2},
    proposals are a Beta(a, b) scaled to [0, x_max].
    """

    alpha: float
    gamma: float
    delta: float
    theta_max: float = math.pi / 2
    proposal_a: float = 1.0
    proposal_b: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.theta_max <= math.pi / 2 + 1e-12):
            raise ValueError("theta_max must lie in (0, pi/2]")
        if self.proposal_a <= 0 or self.proposal_b <= 0:
            raise ValueError("proposal shape parameters must be positive")

    @property
    def x_max(self) -> float:
        return math.sin(self.theta_max) ** 2


def theta_log_density(coeffs: ThetaConditionalCoeffs, x: float) -> float:
    """Unnormalized log density of the angle conditional at x.

    Returns -inf outside (0, x_max) and +inf at the integrable arcsine
    endpoints (x = 0, and x = 1 when reachable).
    """
    x_max = coeffs.x_max
    if x < 0.0 or x > x_max:
        return -math.inf
    if x == 0.0 or x == 1.0:
        return math.inf
    val = -(coeffs.alpha - coeffs.gamma) * x + 2.0 * coeffs.delta * math.sqrt(x * (1.0 - x))
    return val - 0.5 * math.log(x) - 0.5 * math.log1p(-x)


def theta_proposal_log_density(coeffs: ThetaConditionalCoeffs, x: float) -> float:
    """Log density (up to a constant) of the scaled-beta proposal at x."""
    x_max = coeffs.x_max
    if x < 0.0 or x > x_max:
        return -math.inf
    if x == 0.0 or x == x_max:
        edge = coeffs.proposal_a - 1.0 if x == 0.0 else coeffs.proposal_b - 1.0
        if edge == 0.0:
            return 0.0
        return -math.inf if edge > 0 else math.inf
    t = x / x_max
    return (coeffs.proposal_a - 1.0) * math.log(t) + (coeffs.proposal_b - 1.0) * math.log1p(-t)


def mh_theta_update(coeffs: ThetaConditionalCoeffs, x_old: float, rng) -> tuple[float, bool]:
    """One Metropolis-Hastings step for the angle conditional.

    Returns the new state and an acceptance flag.  The singular endpoints
    carry zero probability mass, so a chain started exactly there accepts
    the first interior proposal.
    """
    x_max = coeffs.x_max
    if x_max <= 0.0:
        raise ValueError("x_max must be positive")
    if not 0.0 <= x_old <= x_max:
        raise ValueError(f"x_old={x_old} outside [0, {x_max}]")
    gen = as_generator(rng)
    x_prop = x_max * gen.beta(coeffs.proposal_a, coeffs.proposal_b)
    if not 0.0 < x_prop < min(x_max, 1.0):
        return x_old, False
    if x_old == 0.0 or x_old == 1.0:
        return x_prop, True
    log_ratio = (
        theta_log_density(coeffs, x_prop)
        - theta_log_density(coeffs, x_old)
        + theta_proposal_log_density(coeffs, x_old)
        - theta_proposal_log_density(coeffs, x_prop)
    )
    if math.log(gen.random()) <= log_ratio:
        return x_prop, True
    return x_old, False


def theta_from_x(x: float) -> float:
    """Angle in [0, pi/2] whose squared sine is x."""
    return math.asin(math.sqrt(min(max(x, 0.0), 1.0)))
