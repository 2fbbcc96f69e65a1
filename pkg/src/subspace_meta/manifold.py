"""Stiefel and Grassmann geometry: bases, projections, principal angles.

A k-dimensional subspace of R^p is represented either by a basis matrix
with orthonormal columns (a point on the Stiefel manifold) or by its
rank-k orthogonal projection matrix (a point on the Grassmann manifold).
The subspace error metric used throughout is sin^2 of the largest
principal angle between two subspaces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, DimensionError, InvariantError
from .rng import as_generator
from .validation import as_matrix, check_orthonormal_columns, check_projection_matrix

__all__ = [
    "StiefelPoint",
    "ProjectionMatrix",
    "PrincipalAngleSet",
    "CsFactors",
    "sample_uniform_stiefel",
    "projection_from_basis",
    "basis_from_projection",
    "principal_angles",
    "frechet_mean",
    "cs_recover_projection",
]


@dataclass(frozen=True)
class StiefelPoint:
    """A p-by-k matrix with orthonormal columns, k < p."""

    matrix: np.ndarray

    def __post_init__(self):
        z = as_matrix(self.matrix, "Z")
        p, k = z.shape
        if not 1 <= k < p:
            raise DimensionError(f"need 1 <= k < p, got p={p}, k={k}")
        check_orthonormal_columns(z, tol=1e-10)
        z = z.copy()
        z.flags.writeable = False
        object.__setattr__(self, "matrix", z)

    @property
    def p(self) -> int:
        return self.matrix.shape[0]

    @property
    def k(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True)
class ProjectionMatrix:
    """A symmetric idempotent p-by-p matrix of the given rank."""

    matrix: np.ndarray
    rank: int

    def __post_init__(self):
        m = as_matrix(self.matrix, "P")
        if m.shape[0] != m.shape[1]:
            raise DimensionError(f"P must be square, got shape {m.shape}")
        check_projection_matrix(m, self.rank)
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def p(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class PrincipalAngleSet:
    """Principal angles between two subspaces, sorted descending.

    All angles are in [0, pi/2]; ``sin2_theta1`` is the squared sine of
    the largest angle, the subspace-recovery error used everywhere.
    """

    angles: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.angles, dtype=np.float64)
        if a.ndim != 1 or a.size < 1:
            raise DimensionError("angles must be a nonempty 1-d array")
        if np.any(a < -1e-12) or np.any(a > np.pi / 2 + 1e-12):
            raise InvariantError("principal angles must lie in [0, pi/2]")
        if np.any(np.diff(a) > 1e-12):
            raise InvariantError("principal angles must be sorted descending")
        a = np.clip(a, 0.0, np.pi / 2)
        a.flags.writeable = False
        object.__setattr__(self, "angles", a)

    @property
    def theta1(self) -> float:
        return float(self.angles[0])

    @property
    def sin2_theta1(self) -> float:
        return float(np.sin(self.angles[0]) ** 2)


@dataclass(frozen=True)
class CsFactors:
    """Cosine-sine block factors of a subspace basis.

    Encodes Z = [U1 cos(theta); U2 sin(theta)] V' with U1, V orthogonal
    k-by-k, U2 a (p-k)-by-k orthonormal-column matrix, and the k angles
    in [0, theta_max].  V does not affect the spanned subspace.
    """

    u1: np.ndarray
    u2: np.ndarray
    theta: np.ndarray
    v: np.ndarray
    theta_max: float = np.pi / 2

    def __post_init__(self):
        u1 = as_matrix(self.u1, "U1")
        u2 = as_matrix(self.u2, "U2")
        v = as_matrix(self.v, "V")
        theta = np.asarray(self.theta, dtype=np.float64).ravel()
        k = u1.shape[0]
        if u1.shape != (k, k) or v.shape != (k, k):
            raise DimensionError("U1 and V must be square k-by-k")
        if u2.shape[1] != k:
            raise DimensionError("U2 must have k columns")
        if u2.shape[0] < k:
            raise DimensionError("U2 needs at least k rows (requires k <= p - k)")
        if theta.shape != (k,):
            raise DimensionError("theta must have k entries")
        check_orthonormal_columns(u1, name="U1")
        check_orthonormal_columns(u2, name="U2")
        check_orthonormal_columns(v, name="V")
        if not (0 < self.theta_max <= np.pi / 2 + 1e-12):
            raise InvariantError("theta_max must lie in (0, pi/2]")
        if np.any(theta < -1e-12) or np.any(theta > self.theta_max + 1e-12):
            raise InvariantError("all angles must lie in [0, theta_max]")
        for name, arr in (("u1", u1), ("u2", u2), ("v", v), ("theta", theta)):
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def p(self) -> int:
        return self.u1.shape[0] + self.u2.shape[0]

    @property
    def k(self) -> int:
        return self.u1.shape[0]

    def basis(self) -> StiefelPoint:
        """Rebuild the basis Z = [U1 cos(theta); U2 sin(theta)] V'."""
        c = np.cos(self.theta)
        s = np.sin(self.theta)
        z = np.vstack([self.u1 * c, self.u2 * s]) @ self.v.T
        return StiefelPoint(z)


def sample_uniform_stiefel(p: int, k: int, rng) -> StiefelPoint:
    """Draw a basis uniformly (invariant measure) on the Stiefel manifold.

    Orthonormalizes a p-by-k standard Gaussian matrix, forcing the
    triangular factor to have a positive diagonal so the map is unique.
    """
    if not 1 <= k < p:
        raise DimensionError(f"need 1 <= k < p, got p={p}, k={k}")
    gen = as_generator(rng)
    g = gen.standard_normal((p, k))
    q, r = np.linalg.qr(g)
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return StiefelPoint(q * d)


def projection_from_basis(z: StiefelPoint | np.ndarray) -> ProjectionMatrix:
    """Orthogonal projection onto the span of the basis columns."""
    if not isinstance(z, StiefelPoint):
        z = StiefelPoint(z)
    m = z.matrix @ z.matrix.T
    return ProjectionMatrix((m + m.T) / 2.0, rank=z.k)


def basis_from_projection(p: ProjectionMatrix) -> StiefelPoint:
    """Thin orthonormal basis of the range of a projection matrix."""
    vals, vecs = np.linalg.eigh(p.matrix)
    return StiefelPoint(vecs[:, -p.rank:])


def _coerce_basis(obj) -> StiefelPoint:
    if isinstance(obj, StiefelPoint):
        return obj
    if isinstance(obj, ProjectionMatrix):
        return basis_from_projection(obj)
    raise TypeError("expected a StiefelPoint or ProjectionMatrix")


def principal_angles(a, b) -> PrincipalAngleSet:
    """Principal angles between two k-dimensional subspaces.

    Angles are arccos of the singular values of Za' Zb (clamped to [0, 1])
    computed from bases, which is numerically stable for nearly equal
    subspaces.
    """
    za = _coerce_basis(a)
    zb = _coerce_basis(b)
    if za.p != zb.p:
        raise DimensionError(f"ambient dimensions differ: {za.p} vs {zb.p}")
    if za.k != zb.k:
        raise DimensionError(f"subspace ranks differ: {za.k} vs {zb.k}")
    sigma = np.linalg.svd(za.matrix.T @ zb.matrix, compute_uv=False)
    sigma = np.clip(sigma, 0.0, 1.0)
    angles = np.sort(np.arccos(sigma))[::-1]
    return PrincipalAngleSet(angles)


def frechet_mean(samples: list[ProjectionMatrix]) -> ProjectionMatrix:
    """Extrinsic Frobenius-metric mean of projection matrices.

    Returns the rank-k spectral projection of the entrywise average,
    the exact minimizer of the summed squared Frobenius distance over
    rank-k projections.  Raises when the k-th and (k+1)-th eigenvalues
    of the average tie, in which case the minimizer is not unique.
    """
    if not samples:
        raise ValueError("need at least one projection matrix")
    p = samples[0].p
    k = samples[0].rank
    for s in samples[1:]:
        if s.p != p or s.rank != k:
            raise DimensionError("all samples must share p and rank")
    mean = np.zeros((p, p))
    for s in samples:
        mean += s.matrix
    mean /= len(samples)
    vals, vecs = np.linalg.eigh(mean)
    if k < p and vals[-k] - vals[-k - 1] <= 1e-12:
        raise DegenerateError(
            f"Frobenius mean has a tied spectral gap at rank {k} "
            f"(eigenvalues {vals[-k]:.3e} and {vals[-k - 1]:.3e})"
        )
    top = vecs[:, -k:]
    m = top @ top.T
    return ProjectionMatrix((m + m.T) / 2.0, rank=k)


def cs_recover_projection(f: CsFactors) -> ProjectionMatrix:
    """Projection spanned by the basis encoded in cosine-sine factors."""
    z = f.basis()
    return projection_from_basis(z)
