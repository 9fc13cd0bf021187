"""Multi-view multiple clustering (MVMC).

Learns a shared self-representation U, h individuality matrices D^k and one
semi-NMF head (B^k, R^k) per clustering, under X^v = X^v (U + D^k) for every
view v and head k. The HSIC penalty pushes the D^k apart, the Laplacian
smoothness term ties U to the kNN graphs of all views.
"""

from __future__ import annotations

import logging

import numpy as np

from .alm import AlmSolver, trace_rows
from .errors import ParameterError, ShapeError
from .factorize import harden_assignments, init_semi_nmf, semi_nmf_update
from .graph import smoothness_penalty
from .hsic import aggregated_kernels, kernel_penalty
from .linalg import constraint_residual, relative_residual, solve_symmetric_sylvester
from .models import (
    GraphSet,
    MultiViewDataset,
    MvmcConfig,
    MvmcResult,
    MvmcState,
    ObjectiveTerms,
)

log = logging.getLogger(__name__)


def _check_state(state: MvmcState, ds: MultiViewDataset) -> None:
    n = ds.n
    if state.U.shape != (n, n):
        raise ShapeError(f"U has shape {state.U.shape}, expected {(n, n)}")
    for k, D in enumerate(state.Ds):
        if D.shape != (n, n):
            raise ShapeError(f"D^{k} has shape {D.shape}, expected {(n, n)}")
    if len(state.heads) != len(state.Ds):
        raise ShapeError(f"{len(state.heads)} heads for {len(state.Ds)} individuality matrices")
    for k, pair in enumerate(state.heads):
        if pair.R.shape[0] != n or pair.B.shape != (n, pair.r):
            raise ShapeError(f"head {k}: B {pair.B.shape} and R {pair.R.shape} do not fit n={n}")
    if len(state.multipliers) != len(state.Ds):
        raise ShapeError("need one multiplier list per head")
    for k, psis in enumerate(state.multipliers):
        if len(psis) != ds.m:
            raise ShapeError(f"head {k}: {len(psis)} multipliers for {ds.m} views")
        for v, (psi, X) in enumerate(zip(psis, ds.views)):
            if psi.shape != X.shape:
                raise ShapeError(f"multiplier ({v}, {k}) has shape {psi.shape}, expected {X.shape}")


def objective(
    state: MvmcState,
    ds: MultiViewDataset,
    graphs: GraphSet,
    cfg: MvmcConfig,
    kernels: list[np.ndarray] | None = None,
) -> ObjectiveTerms:
    """Augmented objective terms at `state`.

    `kernels` freezes the aggregated HSIC kernels (the solver's proximal form);
    by default they are rebuilt from state.Ds, giving the exact HSIC sum.
    """
    _check_state(state, ds)
    h, m = len(state.Ds), ds.m
    U = state.U

    fit = sum(
        float(np.linalg.norm(U + D - pair.B @ pair.R.T) ** 2)
        for D, pair in zip(state.Ds, state.heads)
    ) / h

    hsic = 0.0
    if cfg.lambda1 and h > 1:
        if kernels is None:
            kernels = aggregated_kernels(state.Ds)
        hsic = cfg.lambda1 * kernel_penalty(state.Ds, kernels)

    smooth = 0.0
    if cfg.lambda2:
        smooth = cfg.lambda2 * smoothness_penalty(U, graphs.laplacian_sum)

    penalty = 0.0
    for D, psis in zip(state.Ds, state.multipliers):
        Z = U + D
        for X, psi in zip(ds.views, psis):
            E = constraint_residual(X, Z)
            penalty += float(np.sum(psi * E)) + 0.5 * state.mu * float(np.sum(E * E))
    penalty /= h * m

    return ObjectiveTerms(fit=fit, hsic=hsic, smooth=smooth, penalty=penalty)


class MvmcSolver(AlmSolver):
    """One MVMC run. `run()` returns the final state and hardened labelings."""

    def __init__(self, ds: MultiViewDataset, cfg: MvmcConfig, graphs: GraphSet | None = None):
        super().__init__(ds, cfg, graphs)
        n = self.ds.n
        for k, rk in enumerate(cfg.r):
            if rk > n:
                raise ParameterError(f"clustering {k}: r={rk} exceeds n={n}")
        if sum(cfg.r) > n:
            self._warn(f"sum of cluster counts {sum(cfg.r)} exceeds n={n}")

    def initial_state(self) -> MvmcState:
        """Data-driven start: head k begins on view k mod m.

        U + D^k is that view's ridge self-representation plus small seeded
        noise, and the head is a k-means warm start on it.
        """
        cfg = self.cfg
        U = self._initial_shared()
        targets = self._view_representations()
        Ds = [
            targets[k % self.ds.m] - U + noise
            for k, noise in enumerate(self._random_individuals(cfg.h))
        ]
        heads = [
            init_semi_nmf(U + D, rk, cfg.seed + k)
            for k, (D, rk) in enumerate(zip(Ds, cfg.r))
        ]
        multipliers = [[np.zeros_like(X) for X in self.ds.views] for _ in range(cfg.h)]
        return MvmcState(U=U, Ds=Ds, heads=heads, multipliers=multipliers, mu=cfg.mu0)

    def objective(self, state: MvmcState, kernels=None) -> ObjectiveTerms:
        return objective(state, self.ds, self.graphs, self.cfg, kernels)

    def update_steps(self) -> list:
        steps = [("heads", self.update_heads), ("individual", self.update_individual)]
        if self.cfg.use_shared:
            steps.append(("shared", self.update_shared))
        return steps

    def _psi_sums(self, state: MvmcState) -> list[np.ndarray]:
        """sum_v (X^v)^T psi^{v,k} for every head k."""
        return [
            sum(X.T @ psi for X, psi in zip(self.ds.views, psis))
            for psis in state.multipliers
        ]

    def update_heads(self, state: MvmcState, kernels=None) -> None:
        U = state.U
        state.heads = self._map(
            lambda D, pair: semi_nmf_update(U + D, pair), zip(state.Ds, state.heads)
        )

    def update_individual(self, state: MvmcState, kernels: list[np.ndarray]) -> None:
        """Exact minimiser in each D^k with U, the heads and the kernels fixed."""
        h, m, n = self.cfg.h, self.ds.m, self.ds.n
        G, U, mu = self.gram, state.U, state.mu
        A = (2.0 / h) * np.eye(n) + (mu / (h * m)) * G
        base = (mu / (h * m)) * (G - G @ U) - (2.0 / h) * U

        def solve_one(pair, K, psi_sum):
            C = (2.0 / h) * (pair.B @ pair.R.T) + base + psi_sum / (h * m)
            return solve_symmetric_sylvester(A, 2.0 * self.cfg.lambda1 * K, C)

        state.Ds = self._map(solve_one, zip(state.heads, kernels, self._psi_sums(state)))

    def update_shared(self, state: MvmcState, kernels=None) -> None:
        """Exact minimiser in U with everything else fixed."""
        h, m, n = self.cfg.h, self.ds.m, self.ds.n
        G, mu = self.gram, state.mu
        D_sum = np.sum(state.Ds, axis=0)
        fits = sum(pair.B @ pair.R.T for pair in state.heads) - D_sum
        A = 2.0 * np.eye(n) + (mu / m) * G
        C = (
            (2.0 / h) * fits
            + np.sum(self._psi_sums(state), axis=0) / (h * m)
            + (mu / (h * m)) * (h * G - G @ D_sum)
        )
        state.U = solve_symmetric_sylvester(
            A, 2.0 * self.cfg.lambda2 * self.graphs.laplacian_sum, C
        )

    def update_multipliers(self, state: MvmcState) -> None:
        mu = state.mu
        for D, psis in zip(state.Ds, state.multipliers):
            Z = state.U + D
            for v, X in enumerate(self.ds.views):
                psis[v] = psis[v] + mu * constraint_residual(X, Z)

    def feasibility(self, state: MvmcState) -> float:
        return max(
            relative_residual(X, state.U + D) for D in state.Ds for X in self.ds.views
        )

    def _arrays(self, state: MvmcState) -> list[np.ndarray]:
        out = [state.U, *state.Ds]
        for pair in state.heads:
            out += [pair.B, pair.R]
        return out

    def run(self) -> MvmcResult:
        log.info(
            "MVMC: n=%d, m=%d, h=%d, r=%s, lambda1=%g, lambda2=%g, shared=%s",
            self.ds.n, self.ds.m, self.cfg.h, self.cfg.r,
            self.cfg.lambda1, self.cfg.lambda2, self.cfg.use_shared,
        )
        state = self.run_state()
        labelings = [harden_assignments(pair.R, self.logs) for pair in state.heads]
        return MvmcResult(state=state, labelings=labelings, warnings=list(self.logs))


def solve(
    ds: MultiViewDataset, cfg: MvmcConfig, graphs: GraphSet | None = None
) -> MvmcResult:
    return MvmcSolver(ds, cfg, graphs).run()


def solver_trace(state: MvmcState) -> list[dict]:
    return trace_rows(state.trace)
