"""Empirical HSIC with inner-product kernels, used as the diversity penalty.

For individuality matrices D^k (n x n) the kernel over samples is
K^k = (D^k)^T D^k and HSIC(D^k, D^k') = (n-1)^-2 tr(K^k H K^k' H).
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError, ShapeError
from .models import DiversityContext


def centering_matrix(n: int) -> np.ndarray:
    if n < 2:
        raise ParameterError(f"centering needs n >= 2, got {n}")
    return np.eye(n) - np.full((n, n), 1.0 / n)


def _check_pair(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"HSIC arguments differ in shape: {a.shape} vs {b.shape}")


def _centered(K: np.ndarray) -> np.ndarray:
    # H K H without forming H
    Kc = K - K.mean(axis=0, keepdims=True)
    return Kc - Kc.mean(axis=1, keepdims=True)


def hsic_pair(Dk: np.ndarray, Dk2: np.ndarray) -> float:
    _check_pair(Dk, Dk2)
    n = Dk.shape[1]
    if n < 2:
        raise ParameterError(f"HSIC needs n >= 2, got {n}")
    K1 = _centered(Dk.T @ Dk)
    K2 = _centered(Dk2.T @ Dk2)
    # tr(K1 H K2 H) = <H K1 H, H K2 H> for symmetric kernels
    return float(np.sum(K1 * K2)) / (n - 1) ** 2


def aggregated_kernels(Ds: list[np.ndarray]) -> list[np.ndarray]:
    """K~^k = (n-1)^-2 sum_{k' != k} H K^k' H for every k (zeros when h == 1)."""
    if not Ds:
        raise ParameterError("need at least one individuality matrix")
    for D in Ds[1:]:
        _check_pair(Ds[0], D)
    n = Ds[0].shape[1]
    centered = [_centered(D.T @ D) for D in Ds]
    total = np.sum(centered, axis=0)
    scale = 1.0 / (n - 1) ** 2
    out = []
    for Kc in centered:
        agg = (total - Kc) * scale
        out.append((agg + agg.T) / 2.0)
    return out


def diversity_context(Ds: list[np.ndarray]) -> DiversityContext:
    n = Ds[0].shape[1]
    return DiversityContext(
        h=len(Ds),
        kernels=tuple(D.T @ D for D in Ds),
        centering=centering_matrix(n),
        aggregated=tuple(aggregated_kernels(Ds)),
    )


def kernel_penalty(Ds: list[np.ndarray], kernels: list[np.ndarray]) -> float:
    """sum_k tr(D^k K~^k (D^k)^T) for given (possibly frozen) aggregated kernels."""
    return float(sum(np.einsum("ij,ij->", D @ K, D) for D, K in zip(Ds, kernels)))


def diversity_penalty(Ds: list[np.ndarray]) -> tuple[float, list[np.ndarray]]:
    """Sum of HSIC over ordered pairs k != k', and the aggregated kernels."""
    kernels = aggregated_kernels(Ds)
    return kernel_penalty(Ds, kernels), kernels
