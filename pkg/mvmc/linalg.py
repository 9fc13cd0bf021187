"""Linear-algebra kernels shared by the two ALM solvers."""

from __future__ import annotations

import numpy as np
from scipy import linalg

from .errors import ParameterError

# denominators below rtol * max(denominator) count as zero: the component is
# unconstrained by the quadratic and takes the minimum-norm value 0
SYLVESTER_RTOL = 1e-12


def solve_symmetric_sylvester(
    A: np.ndarray, B: np.ndarray, C: np.ndarray, rtol: float = SYLVESTER_RTOL
) -> np.ndarray:
    """Minimum-norm solution Z of A Z + Z B = C for symmetric PSD A and B.

    This is the stationarity condition of the convex quadratic
    0.5 tr(Z^T A Z) + 0.5 tr(Z B Z^T) - <C, Z>, so the result is its exact
    minimiser even when A + B pairs are singular.
    """
    a, P = linalg.eigh((A + A.T) / 2.0)
    b, Q = linalg.eigh((B + B.T) / 2.0)
    denom = a[:, None] + b[None, :]
    Ct = P.T @ C @ Q
    cutoff = rtol * max(float(np.abs(denom).max()), np.finfo(float).tiny)
    Zt = np.divide(Ct, denom, out=np.zeros_like(Ct), where=denom > cutoff)
    return P @ Zt @ Q.T


def gram(views) -> np.ndarray:
    """sum_v (X^v)^T X^v."""
    return sum(X.T @ X for X in views)


def constraint_residual(X: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """X - X Z."""
    return X - X @ Z


def relative_residual(X: np.ndarray, Z: np.ndarray) -> float:
    """||X - X Z||_F / ||X||_F (absolute norm when X is zero)."""
    scale = np.linalg.norm(X)
    res = np.linalg.norm(constraint_residual(X, Z))
    return float(res / scale) if scale > 0 else float(res)


def all_finite(*arrays) -> bool:
    return all(np.all(np.isfinite(a)) for a in arrays)


def ridge_self_representation(X: np.ndarray, ridge: float) -> np.ndarray:
    """argmin_Z ||X - X Z||_F^2 + ridge ||Z||_F^2 = X^T (X X^T + ridge I)^-1 X.

    Solved on the d x d side, so wide sample sets stay cheap.
    """
    if not ridge > 0:
        raise ParameterError(f"ridge must be positive, got {ridge}")
    d = X.shape[0]
    return X.T @ linalg.solve(X @ X.T + ridge * np.eye(d), X, assume_a="pos")
