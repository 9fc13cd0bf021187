"""Semi-NMF and nonnegative tri-factorization heads.

Semi-NMF:  M ~ B R^T with R >= 0 (Ding, Li and Jordan multiplicative rule).
Tri-factor: T ~ C S R^T with C, R >= 0 and S unconstrained.
Both updates never increase the squared Frobenius residual.
"""

from __future__ import annotations

import logging

import numpy as np
from scipy import linalg
from sklearn.cluster import KMeans

from .errors import ParameterError
from .models import SemiNmfPair, TriFactorTriple

log = logging.getLogger(__name__)

EPS_DIV = 1e-12
INIT_SMOOTHING = 0.2


def _pos(A: np.ndarray) -> np.ndarray:
    return (np.abs(A) + A) / 2.0


def _neg(A: np.ndarray) -> np.ndarray:
    return (np.abs(A) - A) / 2.0


def _multiplicative_step(M: np.ndarray, B: np.ndarray, R: np.ndarray) -> np.ndarray:
    """Update the nonnegative factor R of M ~ B R^T with B held fixed.

    Entries are floored at EPS_DIV: an exact zero never leaves zero under a
    multiplicative rule, and a fully zero row has no cluster.
    """
    MtB = M.T @ B
    BtB = B.T @ B
    num = _pos(MtB) + R @ _neg(BtB)
    den = _neg(MtB) + R @ _pos(BtB)
    return np.maximum(R * np.sqrt(num / (den + EPS_DIV)), EPS_DIV)


def _least_squares_basis(M: np.ndarray, R: np.ndarray) -> np.ndarray:
    """argmin_B ||M - B R^T||_F (minimum norm when R is rank deficient)."""
    return linalg.lstsq(R, M.T)[0].T


def _one_hot(labels: np.ndarray, k: int) -> np.ndarray:
    R = np.full((labels.shape[0], k), INIT_SMOOTHING)
    R[np.arange(labels.shape[0]), labels] += 1.0
    return R


def _kmeans_labels(points: np.ndarray, k: int, seed: int) -> np.ndarray:
    return KMeans(n_clusters=k, n_init=10, random_state=seed).fit(points).labels_


def residual(M: np.ndarray, pair: SemiNmfPair) -> float:
    return float(np.linalg.norm(M - pair.B @ pair.R.T))


def tri_residual(T: np.ndarray, triple: TriFactorTriple) -> float:
    return float(np.linalg.norm(T - triple.C @ triple.S @ triple.R.T))


def init_semi_nmf(M: np.ndarray, r: int, seed: int = 0) -> SemiNmfPair:
    """k-means warm start on the columns of M, then the least-squares basis."""
    n = M.shape[1]
    if not 1 <= r <= n:
        raise ParameterError(f"cluster count r={r} must be between 1 and n={n}")
    R = _one_hot(_kmeans_labels(M.T, r, seed), r)
    return SemiNmfPair(B=_least_squares_basis(M, R), R=R)


def semi_nmf_update(M: np.ndarray, state: SemiNmfPair) -> SemiNmfPair:
    """One alternation: exact basis, then the multiplicative indicator step."""
    if state.r > M.shape[1]:
        raise ParameterError(f"r={state.r} exceeds the number of samples {M.shape[1]}")
    if state.R.shape[0] != M.shape[1]:
        raise ParameterError(f"R has {state.R.shape[0]} rows for {M.shape[1]} samples")
    B = _least_squares_basis(M, state.R)
    return SemiNmfPair(B=B, R=_multiplicative_step(M, B, state.R))


def init_tri_factor(T: np.ndarray, c: int, r: int, seed: int = 0) -> TriFactorTriple:
    """k-means on rows (features) for C and on columns (samples) for R, then the exact core."""
    d, n = T.shape
    if not 1 <= c <= d:
        raise ParameterError(f"row-cluster count c={c} must be between 1 and d={d}")
    if not 1 <= r <= n:
        raise ParameterError(f"column-cluster count r={r} must be between 1 and n={n}")
    C = _one_hot(_kmeans_labels(T, c, seed), c)
    R = _one_hot(_kmeans_labels(T.T, r, seed), r)
    S = linalg.pinv(C) @ T @ linalg.pinv(R).T
    return TriFactorTriple(C=C, S=S, R=R)


def tri_factor_update(
    T: np.ndarray, state: TriFactorTriple, update_rows: bool = True
) -> TriFactorTriple:
    """One alternation of ||T - C S R^T||_F^2: exact S, then C, then R.

    With update_rows=False, C stays fixed.
    """
    d, n = T.shape
    if state.c > d or state.C.shape[0] != d:
        raise ParameterError(f"C has shape {state.C.shape} for a {d}-row target")
    if state.r > n or state.R.shape[0] != n:
        raise ParameterError(f"R has shape {state.R.shape} for a {n}-column target")
    C, R = state.C, state.R
    S = linalg.pinv(C) @ T @ linalg.pinv(R).T
    if update_rows:
        C = _multiplicative_step(T.T, (S @ R.T).T, C)
    R = _multiplicative_step(T, C @ S, R)
    return TriFactorTriple(C=C, S=S, R=R)


def harden_assignments(R: np.ndarray, logs: list[dict] | None = None) -> np.ndarray:
    """Row-wise argmax of a nonnegative indicator; ties go to the lowest cluster.

    All-zero rows are assigned cluster 0 and counted in `logs`.
    """
    R = np.asarray(R, dtype=np.float64)
    if R.ndim != 2 or R.shape[1] < 1:
        raise ParameterError(f"indicator must be a 2-D matrix with columns, got {R.shape}")
    if (R < 0).any():
        raise ParameterError("indicator matrix has negative entries")
    empty = ~(R > 0).any(axis=1)
    if empty.any():
        msg = f"{int(empty.sum())} sample(s) with an all-zero indicator row assigned to cluster 0"
        log.warning(msg)
        if logs is not None:
            logs.append({"level": "warn", "message": msg})
    return np.argmax(R, axis=1).astype(np.int64)
