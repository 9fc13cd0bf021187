"""Parameter sweeps: a cartesian grid of sub-runs with a flat summary CSV."""

from __future__ import annotations

import itertools
import logging
import os
from dataclasses import fields
from pathlib import Path

from joblib import Parallel, delayed

from .dataio.grammar import parse_sweep
from .dataio.writer import write_rows
from .errors import DivergenceError, MvmcError, ParameterError
from .models import MultiViewDataset, MvmccConfig, MvmcConfig, SweepAxis, SweepRun
from .runner import run_mvmc, run_mvmcc

log = logging.getLogger(__name__)

SUMMARY_CSV = "sweep_summary.csv"

INT_KEYS = {"h", "r", "c", "max_outer_iters", "seed", "epsilon_knn", "log_every"}
# keys that are not numeric, or that change how a run executes rather than what it computes
FIXED_KEYS = {"use_shared", "normalize", "threads"}

STATUS_EXIT = {"ok": 0, "not_converged": 3, "diverged": 4, "failed": 2}


def parse_axes(expressions: list[str], cfg_cls) -> list[SweepAxis]:
    """Parse `--sweep` expressions and coerce their values to the config's field types."""
    known = {f.name for f in fields(cfg_cls)}
    axes = []
    seen = set()
    for text in expressions:
        axis = parse_sweep(text)
        if axis.key not in known or axis.key in FIXED_KEYS:
            raise ParameterError(f"cannot sweep over {axis.key!r}")
        if axis.key in seen:
            raise ParameterError(f"{axis.key!r} swept twice")
        seen.add(axis.key)
        if axis.key in INT_KEYS:
            if any(v != int(v) for v in axis.values):
                raise ParameterError(f"{axis.key!r} takes integer values, got {axis.values}")
            axis = SweepAxis(axis.key, [int(v) for v in axis.values])
        axes.append(axis)
    return axes


def expand_grid(axes: list[SweepAxis]) -> list[dict]:
    """All combinations of axis values, the last axis varying fastest."""
    keys = [a.key for a in axes]
    return [dict(zip(keys, combo)) for combo in itertools.product(*(a.values for a in axes))]


def _sub_config(cfg, params: dict):
    data = cfg.to_dict()
    data.update(params)
    if "h" in params and "r" not in params:
        # keep a per-clustering r consistent with the new h
        data["r"] = data["r"][:1]
    data["threads"] = 1
    return type(cfg).from_dict(data)


def _sweep_one(command: str, ds: MultiViewDataset, cfg, run: SweepRun, options: dict) -> SweepRun:
    try:
        sub_cfg = _sub_config(cfg, run.params)
        fn = run_mvmc if command == "mvmc" else run_mvmcc
        manifest, report = fn(ds, sub_cfg, run.out_dir, **options)
        run.status = "ok" if manifest.converged else "not_converged"
        run.averages = dict(report.averages)
    except DivergenceError as e:
        log.warning("sweep run %d diverged at iteration %d", run.index, e.iteration)
        run.status = "diverged"
    except MvmcError as e:
        log.warning("sweep run %d failed: %s", run.index, e)
        run.status = "failed"
    return run


def run_sweep(
    command: str,
    ds: MultiViewDataset,
    cfg: MvmcConfig | MvmccConfig,
    axes: list[SweepAxis],
    out_dir: str | os.PathLike,
    n_jobs: int = 1,
    **options,
) -> tuple[list[SweepRun], str]:
    """Run every grid point into out_dir/run_<i>/ and write sweep_summary.csv.

    Sub-runs are single-threaded; with n_jobs > 1 they run in parallel processes.
    """
    if command not in ("mvmc", "mvmcc"):
        raise ParameterError(f"unknown sweep command {command!r}")
    out = Path(out_dir)
    grid = expand_grid(axes)
    runs = [
        SweepRun(index=i, params=params, out_dir=str(out / f"run_{i:03d}"))
        for i, params in enumerate(grid)
    ]
    log.info("Sweep: %d run(s) over %s", len(runs), ", ".join(a.key for a in axes))
    if n_jobs == 1:
        runs = [_sweep_one(command, ds, cfg, run, options) for run in runs]
    else:
        runs = Parallel(n_jobs=n_jobs)(
            delayed(_sweep_one)(command, ds, cfg, run, options) for run in runs
        )

    keys = [a.key for a in axes]
    columns = ["run", *keys]
    for fixed in ("lambda1", "lambda2", "h"):
        if fixed not in columns:
            columns.append(fixed)
    columns += ["status", "sc", "di", "nmi", "jc", "out_dir"]
    rows = []
    for run in runs:
        row = {"run": run.index, "status": run.status, "out_dir": run.out_dir}
        row["lambda1"] = run.params.get("lambda1", cfg.lambda1)
        row["lambda2"] = run.params.get("lambda2", cfg.lambda2)
        row["h"] = run.params.get("h", getattr(cfg, "h", ds.m))
        row.update(run.params)
        row.update({k: run.averages.get(k) for k in ("sc", "di", "nmi", "jc")})
        rows.append(row)
    summary = write_rows(out / SUMMARY_CSV, rows, columns)
    return runs, summary


def sweep_exit_code(runs: list[SweepRun]) -> int:
    return max((STATUS_EXIT.get(run.status, 4) for run in runs), default=0)
