"""Multi-view multiple co-clustering (MVMCC).

One individuality matrix and one tri-factor head per view: the represented
data X^v (U + D^v) is co-clustered as C^v S^v (R^v)^T, giving a feature
partition from C^v and a sample partition from R^v for every view.
"""

from __future__ import annotations

import logging

import numpy as np

from .alm import AlmSolver, trace_rows
from .errors import ShapeError
from .factorize import harden_assignments, init_tri_factor, tri_factor_update
from .graph import smoothness_penalty
from .hsic import aggregated_kernels, kernel_penalty
from .linalg import constraint_residual, relative_residual, solve_symmetric_sylvester
from .models import (
    GraphSet,
    MultiViewDataset,
    MvmccConfig,
    MvmccResult,
    MvmccState,
    ObjectiveTerms,
)

log = logging.getLogger(__name__)


def _check_state(state: MvmccState, ds: MultiViewDataset) -> None:
    n, m = ds.n, ds.m
    if state.U.shape != (n, n):
        raise ShapeError(f"U has shape {state.U.shape}, expected {(n, n)}")
    if len(state.Ds) != m or len(state.triples) != m or len(state.multipliers) != m:
        raise ShapeError(f"need one D, one head and one multiplier per view (m={m})")
    for v, (X, D, t, psi) in enumerate(zip(ds.views, state.Ds, state.triples, state.multipliers)):
        d = X.shape[0]
        if D.shape != (n, n):
            raise ShapeError(f"D^{v} has shape {D.shape}, expected {(n, n)}")
        if t.C.shape[0] != d or t.R.shape[0] != n or t.S.shape != (t.c, t.r):
            raise ShapeError(
                f"view {v}: C {t.C.shape}, S {t.S.shape}, R {t.R.shape} do not fit {X.shape}"
            )
        if psi.shape != X.shape:
            raise ShapeError(f"multiplier {v} has shape {psi.shape}, expected {X.shape}")


def objective_cc(
    state: MvmccState,
    ds: MultiViewDataset,
    graphs: GraphSet,
    cfg: MvmccConfig,
    kernels: list[np.ndarray] | None = None,
) -> ObjectiveTerms:
    _check_state(state, ds)
    m = ds.m
    U = state.U

    fit = 0.0
    penalty = 0.0
    for X, D, t, psi in zip(ds.views, state.Ds, state.triples, state.multipliers):
        Z = U + D
        fit += float(np.linalg.norm(X @ Z - t.C @ t.S @ t.R.T) ** 2)
        E = constraint_residual(X, Z)
        penalty += float(np.sum(psi * E)) + 0.5 * state.mu * float(np.sum(E * E))

    hsic = 0.0
    if cfg.lambda1 and m > 1:
        if kernels is None:
            kernels = aggregated_kernels(state.Ds)
        hsic = cfg.lambda1 * kernel_penalty(state.Ds, kernels)

    smooth = 0.0
    if cfg.lambda2:
        smooth = cfg.lambda2 * smoothness_penalty(U, graphs.laplacian_sum)

    return ObjectiveTerms(fit=fit / m, hsic=hsic, smooth=smooth, penalty=penalty / m)


class MvmccSolver(AlmSolver):
    """One MVMCC run; h is the number of views."""

    def __init__(self, ds: MultiViewDataset, cfg: MvmccConfig, graphs: GraphSet | None = None):
        super().__init__(ds, cfg, graphs)
        self.r, self.c = cfg.resolve(self.ds.dims, self.ds.n)
        self.grams = [X.T @ X for X in self.ds.views]

    def initial_state(self) -> MvmccState:
        cfg = self.cfg
        U = self._initial_shared()
        Ds = self._random_individuals(self.ds.m)
        triples = [
            init_tri_factor(X @ (U + D), cv, rv, cfg.seed + v)
            for v, (X, D, cv, rv) in enumerate(zip(self.ds.views, Ds, self.c, self.r))
        ]
        multipliers = [np.zeros_like(X) for X in self.ds.views]
        return MvmccState(U=U, Ds=Ds, triples=triples, multipliers=multipliers, mu=cfg.mu0)

    def objective(self, state: MvmccState, kernels=None) -> ObjectiveTerms:
        return objective_cc(state, self.ds, self.graphs, self.cfg, kernels)

    def update_steps(self) -> list:
        steps = [("heads", self.update_heads), ("individual", self.update_individual)]
        if self.cfg.use_shared:
            steps.append(("shared", self.update_shared))
        return steps

    def update_heads(self, state: MvmccState, kernels=None) -> None:
        U = state.U
        state.triples = self._map(
            lambda X, D, t: tri_factor_update(X @ (U + D), t),
            zip(self.ds.views, state.Ds, state.triples),
        )

    def update_individual(self, state: MvmccState, kernels: list[np.ndarray]) -> None:
        m, mu, U = self.ds.m, state.mu, state.U

        def solve_one(X, Gv, t, K, psi):
            target = X.T @ (t.C @ t.S @ t.R.T)
            A = ((2.0 + mu) / m) * Gv
            C = (2.0 / m) * (target - Gv @ U) + (X.T @ psi) / m + (mu / m) * (Gv - Gv @ U)
            return solve_symmetric_sylvester(A, 2.0 * self.cfg.lambda1 * K, C)

        state.Ds = self._map(
            solve_one,
            zip(self.ds.views, self.grams, state.triples, kernels, state.multipliers),
        )

    def update_shared(self, state: MvmccState, kernels=None) -> None:
        m, mu = self.ds.m, state.mu
        A = ((2.0 + mu) / m) * self.gram
        C = np.zeros_like(state.U)
        for X, Gv, D, t, psi in zip(
            self.ds.views, self.grams, state.Ds, state.triples, state.multipliers
        ):
            C += (2.0 / m) * (X.T @ (t.C @ t.S @ t.R.T) - Gv @ D)
            C += (X.T @ psi) / m + (mu / m) * (Gv - Gv @ D)
        state.U = solve_symmetric_sylvester(
            A, 2.0 * self.cfg.lambda2 * self.graphs.laplacian_sum, C
        )

    def update_multipliers(self, state: MvmccState) -> None:
        for v, (X, D) in enumerate(zip(self.ds.views, state.Ds)):
            state.multipliers[v] = state.multipliers[v] + state.mu * constraint_residual(
                X, state.U + D
            )

    def feasibility(self, state: MvmccState) -> float:
        return max(
            relative_residual(X, state.U + D) for X, D in zip(self.ds.views, state.Ds)
        )

    def _arrays(self, state: MvmccState) -> list[np.ndarray]:
        out = [state.U, *state.Ds]
        for t in state.triples:
            out += [t.C, t.S, t.R]
        return out

    def run(self) -> MvmccResult:
        log.info(
            "MVMCC: n=%d, m=%d, r=%s, c=%s, lambda1=%g, lambda2=%g",
            self.ds.n, self.ds.m, self.r, self.c, self.cfg.lambda1, self.cfg.lambda2,
        )
        state = self.run_state()
        rows = [harden_assignments(t.C, self.logs) for t in state.triples]
        columns = [harden_assignments(t.R, self.logs) for t in state.triples]
        return MvmccResult(
            state=state, row_labelings=rows, column_labelings=columns, warnings=list(self.logs)
        )


def solve_cc(
    ds: MultiViewDataset, cfg: MvmccConfig, graphs: GraphSet | None = None
) -> MvmccResult:
    return MvmccSolver(ds, cfg, graphs).run()


def solver_trace(state: MvmccState) -> list[dict]:
    return trace_rows(state.trace)
