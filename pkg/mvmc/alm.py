"""Augmented-Lagrangian outer loop shared by the MVMC and MVMCC solvers.

Each outer iteration refreshes the aggregated HSIC kernels from the current
individuality matrices, runs the subclass's update steps in order (heads,
individuality matrices, shared matrix), records the augmented objective after
every step, then takes the multiplier ascent step and grows the penalty.
"""

from __future__ import annotations

import logging

import numpy as np
from joblib import Parallel, delayed

from .data import normalize_views
from .errors import DivergenceError
from .graph import build_graphs
from .hsic import aggregated_kernels
from .linalg import all_finite, gram, ridge_self_representation
from .models import GraphSet, MultiViewDataset, ObjectiveTerms, TraceRow

log = logging.getLogger(__name__)

INIT_NOISE = 1e-3
# ridge of the warm-start self-representation, relative to the mean Gram eigenvalue
INIT_RIDGE = 0.1


class AlmSolver:
    """Base class; subclasses provide the state, objective and update steps."""

    def __init__(self, ds: MultiViewDataset, cfg, graphs: GraphSet | None = None):
        cfg.validate()
        self.cfg = cfg
        self.ds = normalize_views(ds, cfg.normalize)
        self.logs: list[dict] = [dict(w) for w in self.ds.warnings]
        self.graphs = graphs if graphs is not None else self._build_graphs()
        self.gram = gram(self.ds.views)

    def _build_graphs(self) -> GraphSet:
        n = self.ds.n
        eps = self.cfg.epsilon_knn
        if eps >= n:
            eps = n - 1
            self._warn(f"epsilon_knn={self.cfg.epsilon_knn} >= n={n}; using {eps} neighbours")
        return build_graphs(self.ds, eps, self.cfg.kernel_width)

    def _warn(self, msg: str) -> None:
        log.warning(msg)
        self.logs.append({"level": "warn", "message": msg})

    def _map(self, fn, items) -> list:
        items = list(items)
        if self.cfg.threads == 1 or len(items) < 2:
            return [fn(*args) for args in items]
        return Parallel(n_jobs=self.cfg.threads, prefer="threads")(
            delayed(fn)(*args) for args in items
        )

    # -- subclass hooks ------------------------------------------------------

    def initial_state(self):
        raise NotImplementedError

    def objective(self, state, kernels: list[np.ndarray] | None = None) -> ObjectiveTerms:
        raise NotImplementedError

    def update_steps(self) -> list:
        """Ordered (name, fn(state, kernels)) pairs making up one sweep."""
        raise NotImplementedError

    def update_multipliers(self, state) -> None:
        raise NotImplementedError

    def feasibility(self, state) -> float:
        raise NotImplementedError

    def _arrays(self, state) -> list[np.ndarray]:
        raise NotImplementedError

    # -- outer loop ----------------------------------------------------------

    def step(self, state, iteration: int) -> TraceRow:
        """One outer iteration. Appends and returns its trace row."""
        kernels = aggregated_kernels(state.Ds)
        totals = [self.objective(state, kernels).total]
        for _name, update in self.update_steps():
            update(state, kernels)
            totals.append(self.objective(state, kernels).total)

        terms = self.objective(state)
        row = TraceRow(
            iteration=iteration,
            fit=terms.fit,
            hsic=terms.hsic,
            smooth=terms.smooth,
            penalty=terms.penalty,
            total=terms.total,
            feasibility=self.feasibility(state),
            mu=state.mu,
            step_totals=tuple(totals),
        )
        state.trace.append(row)
        if not (np.isfinite(row.total) and np.isfinite(row.feasibility)
                and all_finite(*self._arrays(state))):
            raise DivergenceError(
                f"non-finite value at iteration {iteration}", iteration, state.trace
            )

        self.update_multipliers(state)
        state.mu = min(self.cfg.rho * state.mu, self.cfg.mu_max)
        return row

    def run_state(self):
        cfg = self.cfg
        state = self.initial_state()
        prev = None
        for it in range(1, cfg.max_outer_iters + 1):
            row = self.step(state, it)
            if it % cfg.log_every == 0 or it == 1:
                log.info(
                    "iter %d: fit=%.4g hsic=%.4g smooth=%.4g feas=%.3g mu=%.3g",
                    it, row.fit, row.hsic, row.smooth, row.feasibility, row.mu,
                )
            else:
                log.debug("iter %d: total=%.6g feas=%.3g", it, row.total, row.feasibility)
            if prev is not None:
                change = abs(row.total - prev) / max(abs(prev), 1e-12)
                if change < cfg.tol_obj and row.feasibility < cfg.tol_feas:
                    state.converged = True
                    log.info("Converged after %d iteration(s)", it)
                    break
            prev = row.total
        if not state.converged:
            last = state.trace[-1]
            self._warn(
                f"not converged after {cfg.max_outer_iters} iteration(s) "
                f"(feasibility {last.feasibility:.3g})"
            )
        return state

    def _random_individuals(self, count: int) -> list[np.ndarray]:
        rng = np.random.default_rng(self.cfg.seed)
        n = self.ds.n
        return [rng.uniform(-INIT_NOISE, INIT_NOISE, size=(n, n)) for _ in range(count)]

    def _initial_shared(self) -> np.ndarray:
        n = self.ds.n
        return np.eye(n) / n if self.cfg.use_shared else np.zeros((n, n))

    def _view_representations(self) -> list[np.ndarray]:
        """Ridge self-representation of every view, used as warm-start targets."""
        out = []
        for X in self.ds.views:
            scale = float(np.sum(X * X)) / X.shape[0]
            ridge = INIT_RIDGE * scale if scale > 0 else 1.0
            out.append(ridge_self_representation(X, ridge))
        return out


def trace_rows(trace: list[TraceRow]) -> list[dict]:
    """Per-iteration rows ready for CSV output."""
    return [
        {
            "iter": row.iteration,
            "fit": row.fit,
            "hsic": row.hsic,
            "smooth": row.smooth,
            "penalty": row.penalty,
            "feasibility": row.feasibility,
            "mu": row.mu,
            "total": row.total,
        }
        for row in trace
    ]
