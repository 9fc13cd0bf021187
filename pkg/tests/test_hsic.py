"""Tests for the HSIC diversity machinery."""

import numpy as np
import pytest

from mvmc.errors import ParameterError, ShapeError
from mvmc.hsic import (
    aggregated_kernels,
    centering_matrix,
    diversity_context,
    diversity_penalty,
    hsic_pair,
    kernel_penalty,
)


def _brute_hsic(D1, D2):
    n = D1.shape[1]
    H = np.eye(n) - np.ones((n, n)) / n
    return np.trace(D1.T @ D1 @ H @ D2.T @ D2 @ H) / (n - 1) ** 2


def test_centering_matrix_n2():
    assert np.allclose(centering_matrix(2), [[0.5, -0.5], [-0.5, 0.5]])


def test_centering_matrix_properties():
    assert np.allclose(centering_matrix(5) @ np.ones(5), 0.0)
    H = centering_matrix(7)
    assert np.allclose(H @ H, H, atol=1e-10)
    assert np.allclose(H, H.T)


def test_centering_matrix_too_small():
    with pytest.raises(ParameterError):
        centering_matrix(1)


def test_hsic_constant_matrix_is_zero():
    rng = np.random.default_rng(0)
    D = rng.normal(size=(5, 5))
    assert abs(hsic_pair(D, np.full((5, 5), 3.0))) < 1e-10


def test_hsic_2x2_trace():
    D1 = np.array([[1.0, 0.0], [0.0, 1.0]])
    D2 = np.array([[1.0, 1.0], [0.0, 0.0]])
    assert hsic_pair(D1, D2) == pytest.approx(_brute_hsic(D1, D2), abs=1e-12)


def test_hsic_shape_mismatch():
    with pytest.raises(ShapeError):
        hsic_pair(np.eye(3), np.eye(4))


def test_hsic_random_properties():
    rng = np.random.default_rng(1)
    for _ in range(50):
        n = int(rng.integers(2, 21))
        D1 = rng.normal(size=(n, n))
        D2 = rng.normal(size=(n, n))
        value = hsic_pair(D1, D2)
        assert value == pytest.approx(_brute_hsic(D1, D2), rel=1e-8, abs=1e-8)
        assert value == pytest.approx(hsic_pair(D2, D1), abs=1e-10)
        assert hsic_pair(D1, D1) >= -1e-10
        # adding a constant to every entry of D2 shifts its kernel by terms H annihilates
        assert hsic_pair(D1, D2 + 2.5) == pytest.approx(value, rel=1e-8, abs=1e-8)


def test_diversity_single_head_is_zero():
    rng = np.random.default_rng(2)
    value, kernels = diversity_penalty([rng.normal(size=(4, 4))])
    assert value == 0.0
    assert np.array_equal(kernels[0], np.zeros((4, 4)))


def test_diversity_constant_second_head():
    rng = np.random.default_rng(3)
    value, _ = diversity_penalty([rng.normal(size=(4, 4)), np.ones((4, 4))])
    assert abs(value) < 1e-10


def test_diversity_equals_pairwise_sum():
    rng = np.random.default_rng(4)
    for _ in range(50):
        h = int(rng.integers(2, 5))
        n = int(rng.integers(2, 21))
        Ds = [rng.normal(size=(n, n)) for _ in range(h)]
        value, _ = diversity_penalty(Ds)
        pairwise = sum(hsic_pair(Ds[a], Ds[b]) for a in range(h) for b in range(h) if a != b)
        assert value == pytest.approx(pairwise, rel=1e-8, abs=1e-8)
        assert value >= -1e-8


def test_aggregated_kernels_symmetric():
    rng = np.random.default_rng(5)
    for K in aggregated_kernels([rng.normal(size=(6, 6)) for _ in range(3)]):
        assert np.allclose(K, K.T)


def test_aggregated_kernels_shape_mismatch():
    with pytest.raises(ShapeError):
        aggregated_kernels([np.eye(3), np.eye(4)])


def test_kernel_penalty_with_frozen_kernels():
    rng = np.random.default_rng(6)
    Ds = [rng.normal(size=(5, 5)) for _ in range(2)]
    kernels = aggregated_kernels(Ds)
    assert kernel_penalty(Ds, kernels) == pytest.approx(diversity_penalty(Ds)[0])


def test_diversity_context():
    rng = np.random.default_rng(7)
    Ds = [rng.normal(size=(4, 4)) for _ in range(3)]
    ctx = diversity_context(Ds)
    assert ctx.h == 3
    assert np.allclose(ctx.centering @ np.ones(4), 0.0)
    for D, K in zip(Ds, ctx.kernels):
        assert np.allclose(K, D.T @ D)
        assert np.linalg.eigvalsh(K).min() >= -1e-10
    assert len(ctx.aggregated) == 3
