"""Input validation helpers used across modules and estimators."""

from __future__ import annotations

import warnings

import numpy as np

from .errors import DimensionError, InvariantError

__all__ = [
    "as_matrix",
    "as_vector",
    "check_orthonormal_columns",
    "check_projection_matrix",
    "check_design_response",
    "check_design_informativeness",
]


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionError(f"{name} must be 2-dimensional, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def as_vector(a, name: str = "vector") -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 1:
        raise DimensionError(f"{name} must be 1-dimensional, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def check_orthonormal_columns(z: np.ndarray, tol: float = 1e-10, name: str = "Z") -> None:
    k = z.shape[1]
    gram_err = np.max(np.abs(z.T @ z - np.eye(k)))
    if gram_err > tol:
        raise InvariantError(
            f"{name} does not have orthonormal columns: max |Z'Z - I| = {gram_err:.3e} > {tol:.1e}"
        )


def check_projection_matrix(p: np.ndarray, rank: int, name: str = "P") -> None:
    sym_err = np.max(np.abs(p - p.T))
    if sym_err > 1e-10:
        raise InvariantError(f"{name} is not symmetric: max |P - P'| = {sym_err:.3e}")
    idem_err = np.max(np.abs(p @ p - p))
    if idem_err > 1e-8:
        raise InvariantError(f"{name} is not idempotent: max |P^2 - P| = {idem_err:.3e}")
    tr_err = abs(np.trace(p) - rank)
    if tr_err > 1e-8:
        raise InvariantError(f"trace({name}) = {np.trace(p):.12g} differs from rank {rank}")


def check_design_response(X, y) -> tuple[np.ndarray, np.ndarray]:
    X = as_matrix(X, "X")
    y = as_vector(y, "y")
    if X.shape[0] != y.shape[0]:
        raise DimensionError(
            f"X has {X.shape[0]} rows but y has {y.shape[0]} entries"
        )
    if X.shape[0] < 1:
        raise DimensionError("need at least one observation")
    return X, y


def check_design_informativeness(designs, c0: float = 1e-8) -> float:
    """Smallest eigenvalue of the pooled Gram matrix, with a warning when weak.

    Diagnostic only: a tiny value means the task designs jointly carry
    almost no information about some predictor directions.
    """
    gram = sum(X.T @ X for X in designs)
    lam_min = float(np.linalg.eigvalsh(gram)[0])
    if lam_min < c0:
        warnings.warn(
            f"pooled design Gram matrix is nearly singular (lambda_min = {lam_min:.3e}); "
            "some predictor directions are uninformed",
            stacklevel=2,
        )
    return lam_min
