"""Tests for the MVMC solver."""

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from mvmc import mvmc_solver
from mvmc.data import generate_synthetic
from mvmc.errors import DivergenceError, ParameterError, ShapeError
from mvmc.factorize import harden_assignments
from mvmc.graph import build_graphs
from mvmc.hsic import hsic_pair
from mvmc.metrics import build_report, nmi
from mvmc.models import MultiViewDataset, MvmcConfig, MvmcState, SemiNmfPair, SyntheticSpec
from mvmc.mvmc_solver import MvmcSolver, objective, solve, solver_trace

STEP_SLACK = 1e-8
QUALITY_SLACK = 1e-9


def _planted(seed=0, n=40, dims=(5, 5)):
    return generate_synthetic(SyntheticSpec(
        n=n, m=2, view_dims=list(dims), num_labelings=2,
        clusters_per_labeling=[3, 2], noise_sigma=0.1, seed=seed,
    ))


def _random_state(rng, ds, h, r=2, mu=0.5):
    n = ds.n
    return MvmcState(
        U=rng.normal(size=(n, n)),
        Ds=[rng.normal(size=(n, n)) for _ in range(h)],
        heads=[SemiNmfPair(B=rng.normal(size=(n, r)), R=rng.uniform(size=(n, r))) for _ in range(h)],
        multipliers=[[rng.normal(size=X.shape) for X in ds.views] for _ in range(h)],
        mu=mu,
    )


def test_objective_zero_at_exact_solution():
    rng = np.random.default_rng(0)
    ds = MultiViewDataset(views=(rng.normal(size=(2, 4)),))
    state = MvmcState(
        U=np.eye(4),
        Ds=[np.zeros((4, 4))],
        heads=[SemiNmfPair(B=np.eye(4), R=np.eye(4))],
        multipliers=[[np.zeros((2, 4))]],
        mu=1.0,
    )
    cfg = MvmcConfig(h=1, r=[4], lambda1=0.0, lambda2=0.0)
    terms = objective(state, ds, build_graphs(ds, epsilon=1), cfg)
    assert terms.total == pytest.approx(0.0, abs=1e-12)


def test_objective_hsic_zero_without_weight():
    rng = np.random.default_rng(1)
    ds = _planted(n=10)
    state = _random_state(rng, ds, h=2)
    cfg = MvmcConfig(h=2, lambda1=0.0)
    assert objective(state, ds, build_graphs(ds, 3), cfg).hsic == 0.0


def test_objective_matches_term_by_term_recomputation():
    rng = np.random.default_rng(2)
    ds = _planted(n=10)
    graphs = build_graphs(ds, 3)
    h, m = 3, ds.m
    state = _random_state(rng, ds, h=h)
    cfg = MvmcConfig(h=h, lambda1=2.0, lambda2=3.0)
    terms = objective(state, ds, graphs, cfg)

    fit = sum(np.linalg.norm(state.U + D - p.B @ p.R.T) ** 2 for D, p in zip(state.Ds, state.heads)) / h
    hsic = 2.0 * sum(hsic_pair(state.Ds[a], state.Ds[b]) for a in range(h) for b in range(h) if a != b)
    smooth = 3.0 * np.trace(state.U @ graphs.laplacian_sum @ state.U.T)
    penalty = 0.0
    for k in range(h):
        for v, X in enumerate(ds.views):
            E = X - X @ (state.U + state.Ds[k])
            penalty += np.trace(state.multipliers[k][v].T @ E) + 0.25 * np.linalg.norm(E) ** 2
    penalty /= h * m

    assert terms.fit == pytest.approx(fit, rel=1e-10)
    assert terms.hsic == pytest.approx(hsic, rel=1e-8)
    assert terms.smooth == pytest.approx(smooth, rel=1e-10)
    assert terms.penalty == pytest.approx(penalty, rel=1e-10)
    assert terms.total == pytest.approx(fit + hsic + smooth + penalty, rel=1e-8)


def test_objective_shape_mismatch():
    rng = np.random.default_rng(3)
    ds = _planted(n=10)
    state = _random_state(rng, ds, h=2)
    state.U = np.eye(9)
    with pytest.raises(ShapeError):
        objective(state, ds, build_graphs(ds, 3), MvmcConfig())


@pytest.mark.parametrize("seed", range(10))
def test_each_update_step_does_not_increase_objective(seed):
    ds = _planted(seed=seed)
    solver = MvmcSolver(ds, MvmcConfig(h=2, r=[3, 2], seed=seed))
    state = solver.initial_state()
    for it in range(1, 6):
        row = solver.step(state, it)
        assert len(row.step_totals) == 4
        for before, after in zip(row.step_totals, row.step_totals[1:]):
            assert after <= before + STEP_SLACK * max(1.0, abs(before))


def test_trace_rows():
    ds = _planted(n=20)
    cfg = MvmcConfig(h=2, max_outer_iters=10, tol_obj=0.0)
    result = solve(ds, cfg)
    rows = solver_trace(result.state)
    assert len(rows) == 10
    assert [row["iter"] for row in rows] == list(range(1, 11))
    assert all(row["feasibility"] >= 0 for row in rows)
    assert all(np.isfinite(row["total"]) for row in rows)
    assert not result.state.converged
    assert any("not converged" in w["message"] for w in result.warnings)


def test_mu_grows_to_cap():
    ds = _planted(n=12)
    cfg = MvmcConfig(h=2, mu0=1.0, rho=2.0, mu_max=4.0, max_outer_iters=4, tol_obj=0.0)
    result = solve(ds, cfg)
    assert [row["mu"] for row in solver_trace(result.state)] == [1.0, 2.0, 4.0, 4.0]


def test_outputs_nonnegative_and_sized():
    ds = _planted(n=20)
    result = solve(ds, MvmcConfig(h=2, r=[3, 2], max_outer_iters=5))
    assert len(result.labelings) == 2
    for pair, labels, r in zip(result.state.heads, result.labelings, [3, 2]):
        assert (pair.R >= 0).all()
        assert labels.shape == (20,)
        assert labels.max() < r


def test_initial_heads_follow_their_views():
    ds = generate_synthetic(SyntheticSpec(
        n=40, m=2, view_dims=[5, 5], num_labelings=2,
        clusters_per_labeling=[3, 2], noise_sigma=0.0, seed=4,
    ))
    for use_shared in (True, False):
        state = MvmcSolver(ds, MvmcConfig(h=2, r=[3, 2], use_shared=use_shared)).initial_state()
        labels = [harden_assignments(pair.R) for pair in state.heads]
        assert nmi(labels[0], ds.ground_truths[0]) == pytest.approx(1.0)
        assert nmi(labels[1], ds.ground_truths[1]) == pytest.approx(1.0)


def test_short_run_keeps_planted_labelings():
    ds = _planted(seed=0, n=60, dims=(6, 6))
    result = solve(ds, MvmcConfig(h=2, r=[3, 2], seed=0, max_outer_iters=40))
    assert (_matched_truth_nmi(result.labelings, ds.ground_truths) >= 0.8).all()
    assert nmi(result.labelings[0], result.labelings[1]) <= 0.3


def test_indicator_rows_never_empty():
    for seed in range(3):
        ds = _planted(seed=seed, n=30)
        result = solve(ds, MvmcConfig(h=2, seed=seed, max_outer_iters=40, tol_obj=0.0))
        for pair in result.state.heads:
            assert (pair.R > 0).any(axis=1).all()
        assert not any("all-zero" in w["message"] for w in result.warnings)


def test_without_shared_matrix_u_stays_zero():
    ds = _planted(n=16)
    solver = MvmcSolver(ds, MvmcConfig(h=2, use_shared=False))
    state = solver.initial_state()
    for it in range(1, 4):
        row = solver.step(state, it)
        assert len(row.step_totals) == 3
        assert row.smooth == 0.0
    assert np.array_equal(state.U, np.zeros((16, 16)))


def test_single_head_has_no_hsic():
    ds = _planted(n=16)
    result = solve(ds, MvmcConfig(h=1, r=[3], lambda1=50.0, max_outer_iters=8))
    assert all(row["hsic"] == 0.0 for row in solver_trace(result.state))


def test_deterministic_single_threaded():
    ds = _planted(n=24)
    cfg = MvmcConfig(h=2, r=[3, 2], seed=5, max_outer_iters=15)
    a = solve(ds, cfg)
    b = solve(ds, cfg)
    for la, lb in zip(a.labelings, b.labelings):
        assert np.array_equal(la, lb)
    assert [r.total for r in a.state.trace] == [r.total for r in b.state.trace]


def test_threads_match_single_thread():
    ds = _planted(n=24)
    a = solve(ds, MvmcConfig(h=2, seed=1, max_outer_iters=5))
    b = solve(ds, MvmcConfig(h=2, seed=1, max_outer_iters=5, threads=2))
    assert np.allclose(a.state.U, b.state.U)
    for Da, Db in zip(a.state.Ds, b.state.Ds):
        assert np.allclose(Da, Db)


def test_cluster_count_above_n_rejected():
    ds = _planted(n=10)
    with pytest.raises(ParameterError):
        MvmcSolver(ds, MvmcConfig(h=2, r=[11, 2]))


def test_cluster_sum_above_n_warns():
    ds = _planted(n=10)
    solver = MvmcSolver(ds, MvmcConfig(h=3, r=[4, 4, 4]))
    assert any("exceeds n" in w["message"] for w in solver.logs)


def test_epsilon_clamped_on_small_datasets():
    ds = _planted(n=4, dims=(2, 2))
    solver = MvmcSolver(ds, MvmcConfig(h=2, epsilon_knn=5))
    assert solver.graphs.epsilon == 3
    assert any("epsilon_knn" in w["message"] for w in solver.logs)


def test_divergence_reports_iteration(monkeypatch):
    def broken(M, pair):
        return SemiNmfPair(B=np.full_like(pair.B, np.nan), R=pair.R)

    monkeypatch.setattr(mvmc_solver, "semi_nmf_update", broken)
    ds = _planted(n=12)
    with pytest.raises(DivergenceError) as info:
        solve(ds, MvmcConfig(h=2, max_outer_iters=5))
    assert info.value.iteration == 1
    assert len(info.value.trace) == 1


def test_invalid_config_rejected():
    with pytest.raises(ParameterError):
        MvmcConfig.from_dict({"h": 2, "rho": 1.0})
    with pytest.raises(ParameterError):
        MvmcConfig.from_dict({"h": 2, "r": [2, 1]})
    with pytest.raises(ParameterError):
        MvmcConfig.from_dict({"h": 2, "gamma": 3})


def test_config_broadcasts_r():
    assert MvmcConfig(h=3, r=4).r == [4, 4, 4]
    assert MvmcConfig(h=3).r == [2, 2, 2]
    assert MvmcConfig.from_dict({"h": 2, "r": [3]}).r == [3, 3]


def _matched_truth_nmi(labelings, truths):
    scores = np.array([[nmi(lab, t) for t in truths] for lab in labelings])
    rows, cols = linear_sum_assignment(-scores)
    return scores[rows, cols]


PLANTED_SPEC = dict(n=200, m=2, view_dims=[10, 10], num_labelings=2,
                    clusters_per_labeling=[3, 2], noise_sigma=0.1)


@pytest.mark.slow
def test_recovers_planted_labelings():
    successes = 0
    for seed in range(10):
        ds = generate_synthetic(SyntheticSpec(seed=seed, **PLANTED_SPEC))
        result = solve(ds, MvmcConfig(h=2, r=[3, 2], seed=seed))
        matched = _matched_truth_nmi(result.labelings, ds.ground_truths)
        cross = nmi(result.labelings[0], result.labelings[1])
        successes += bool((matched >= 0.8).all() and cross <= 0.3)
    assert successes >= 8


@pytest.mark.slow
def test_dropping_shared_matrix_never_helps():
    # on planted views both variants can recover the truth, so ties count
    holds = 0
    for seed in range(10):
        ds = generate_synthetic(SyntheticSpec(seed=seed, **PLANTED_SPEC))
        with_u = build_report(ds, solve(ds, MvmcConfig(h=2, r=[3, 2], seed=seed)).labelings)
        without = build_report(
            ds, solve(ds, MvmcConfig(h=2, r=[3, 2], seed=seed, use_shared=False)).labelings
        )
        a, b = with_u.averages, without.averages
        holds += bool(
            b["sc"] <= a["sc"] + QUALITY_SLACK
            and b["di"] <= a["di"] + QUALITY_SLACK
            and abs(a["nmi"] - b["nmi"]) < 0.1
        )
    assert holds >= 8


@pytest.mark.slow
def test_planted_run_is_reproducible():
    ds = generate_synthetic(SyntheticSpec(seed=0, **PLANTED_SPEC))
    a = solve(ds, MvmcConfig(h=2, r=[3, 2], seed=0))
    b = solve(ds, MvmcConfig(h=2, r=[3, 2], seed=0))
    for la, lb in zip(a.labelings, b.labelings):
        assert np.array_equal(la, lb)
    assert build_report(ds, a.labelings).to_dict() == build_report(ds, b.labelings).to_dict()


@pytest.mark.slow
def test_feasibility_mostly_decreases():
    steps = decreases = 0
    for seed in range(5):
        ds = _planted(seed=seed, n=30)
        result = solve(ds, MvmcConfig(h=2, seed=seed, max_outer_iters=40, tol_obj=0.0))
        feas = [row.feasibility for row in result.state.trace]
        steps += len(feas) - 1
        decreases += sum(b <= a for a, b in zip(feas, feas[1:]))
    assert decreases >= 0.9 * steps


@pytest.mark.slow
def test_diversity_grows_with_lambda1():
    ds = generate_synthetic(SyntheticSpec(seed=0, **PLANTED_SPEC))
    diversity = []
    for lambda1 in [1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1e3]:
        result = solve(ds, MvmcConfig(h=2, r=[3, 2], lambda1=lambda1, lambda2=100.0))
        diversity.append(1.0 - nmi(result.labelings[0], result.labelings[1]))
    inversions = sum(b < a for a, b in zip(diversity, diversity[1:]))
    assert inversions <= 1
