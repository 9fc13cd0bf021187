"""Per-view kNN similarity graphs and the summed Laplacian used for smoothness."""

from __future__ import annotations

import logging

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import ParameterError, ShapeError
from .models import GraphSet, MultiViewDataset

log = logging.getLogger(__name__)


def kernel_width(X: np.ndarray) -> float:
    """Standard deviation of all pairwise Euclidean distances between columns of X."""
    dists = pdist(X.T)
    sigma = float(np.std(dists)) if dists.size else 0.0
    if sigma <= 0:
        # every pair at the same distance (or n < 3); the heat kernel is then
        # constant over neighbours for any width
        return 1.0
    return sigma


def build_knn_graph(X: np.ndarray, epsilon: int, width: float | None = None) -> np.ndarray:
    """Gaussian heat-kernel similarities on the union-symmetrized kNN graph.

    X is d x n (columns are samples). `width=None` uses kernel_width(X).
    Neighbour ties are broken by the lower sample index.
    """
    n = X.shape[1]
    if not 1 <= epsilon < n:
        raise ParameterError(f"epsilon must satisfy 1 <= epsilon < n={n}, got {epsilon}")
    sigma = kernel_width(X) if width is None else float(width)
    if sigma <= 0:
        raise ParameterError(f"kernel width must be > 0, got {sigma}")

    sq = squareform(pdist(X.T, "sqeuclidean"))
    order = np.argsort(np.where(np.eye(n, dtype=bool), np.inf, sq), axis=1, kind="stable")
    mask = np.zeros((n, n), dtype=bool)
    mask[np.repeat(np.arange(n), epsilon), order[:, :epsilon].ravel()] = True
    mask |= mask.T
    np.fill_diagonal(mask, False)
    return np.where(mask, np.exp(-sq / (2.0 * sigma**2)), 0.0)


def laplacian_sum(graphs: list[np.ndarray]) -> np.ndarray:
    """sum_v (Lambda^v - W^v) for symmetric similarity matrices W^v."""
    if not graphs:
        raise ShapeError("need at least one similarity matrix")
    shape = graphs[0].shape
    L = np.zeros(shape)
    for v, W in enumerate(graphs):
        if W.shape != shape or shape[0] != shape[1]:
            raise ShapeError(f"similarity {v}: shape {W.shape}, expected square {shape}")
        L += np.diag(W.sum(axis=1)) - W
    return L


def build_graphs(
    ds: MultiViewDataset, epsilon: int = 5, width: float | None = None
) -> GraphSet:
    """Build W^v, Lambda^v and the summed Laplacian for every view of ds."""
    sims, degrees, widths = [], [], []
    for v, X in enumerate(ds.views):
        sigma = kernel_width(X) if width is None else float(width)
        W = build_knn_graph(X, epsilon, sigma)
        sims.append(W)
        degrees.append(np.diag(W.sum(axis=1)))
        widths.append(sigma)
        log.debug("%s: sigma=%.4g, %d edges", ds.view_name(v), sigma, int((W > 0).sum() // 2))
    return GraphSet(
        similarities=tuple(sims),
        degrees=tuple(degrees),
        laplacian_sum=laplacian_sum(sims),
        epsilon=epsilon,
        kernel_widths=tuple(widths),
    )


def smoothness_penalty(U: np.ndarray, L: np.ndarray) -> float:
    """tr(U L U^T): penalizes differences between columns of U joined by graph edges."""
    if U.ndim != 2 or L.shape != (U.shape[1], U.shape[1]):
        raise ShapeError(f"U {U.shape} and Laplacian {L.shape} do not match")
    return float(np.einsum("ij,ij->", U @ L, U))
