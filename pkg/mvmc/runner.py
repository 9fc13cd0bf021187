"""One solver run end to end: solve, write outputs, build the report and manifest.

Shared by the CLI commands and by sweep sub-runs (which execute in worker
processes, so everything here takes plain arguments).
"""

from __future__ import annotations

import logging
import os
from datetime import datetime, timezone
from pathlib import Path

from .dataio.writer import (
    config_hash,
    save_logs,
    write_graphs,
    write_labels,
    write_manifest,
    write_mvmc_state,
    write_mvmcc_state,
    write_report,
    write_trace,
)
from .errors import DivergenceError, ParameterError
from .metrics import build_report, build_row_report
from .models import ClusteringReport, MultiViewDataset, MvmccConfig, MvmcConfig, RunManifest
from .mvmc_solver import MvmcSolver
from .mvmcc_solver import MvmccSolver

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NOT_CONVERGED = 3

CLUSTER_AXES = ("columns", "rows")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _manifest(command: str, dataset_path: str, cfg) -> RunManifest:
    config = cfg.to_dict()
    return RunManifest(
        command=command,
        dataset_path=str(dataset_path),
        seed=cfg.seed,
        config_hash=config_hash(config),
        started_at=_now(),
        config=config,
    )


def _finish(out: Path, manifest: RunManifest, outputs: list[str], logs: list[dict]) -> None:
    logged = save_logs(out, logs)
    if logged:
        outputs.append(logged)
    manifest.outputs = outputs
    manifest.finished_at = _now()
    write_manifest(out, manifest)


def _diverged(out: Path, manifest: RunManifest, outputs: list[str], logs: list[dict],
              err: DivergenceError) -> None:
    logs.append({"level": "warn", "message": f"diverged at iteration {err.iteration}"})
    outputs.append(write_trace(out, err.trace or []))
    manifest.converged = False
    _finish(out, manifest, outputs, logs)


def run_mvmc(
    ds: MultiViewDataset,
    cfg: MvmcConfig,
    out_dir: str | os.PathLike,
    dataset_path: str = "",
    space: str = "concat",
    with_truth: bool = False,
    dump_graphs: bool = False,
    save_state: bool = False,
) -> tuple[RunManifest, ClusteringReport]:
    """Solve MVMC and write labels_<k>.csv, report, trace, run log and manifest.

    A DivergenceError is re-raised after the trace and manifest are written.
    """
    out = Path(out_dir)
    manifest = _manifest("mvmc", dataset_path, cfg)
    solver = MvmcSolver(ds, cfg)
    outputs: list[str] = []
    if dump_graphs:
        outputs += write_graphs(out, solver.graphs)
    try:
        result = solver.run()
    except DivergenceError as e:
        _diverged(out, manifest, outputs, solver.logs, e)
        raise

    for k, labels in enumerate(result.labelings):
        outputs.append(write_labels(out / f"labels_{k}.csv", labels))
    report = build_report(
        ds, result.labelings, space, truths=list(ds.ground_truths) if with_truth else None
    )
    outputs += write_report(out, report)
    outputs.append(write_trace(out, result.state.trace))
    if save_state:
        outputs += write_mvmc_state(out, result.state)

    manifest.converged = result.state.converged
    _finish(out, manifest, outputs, result.warnings + report.warnings)
    return manifest, report


def run_mvmcc(
    ds: MultiViewDataset,
    cfg: MvmccConfig,
    out_dir: str | os.PathLike,
    dataset_path: str = "",
    space: str = "concat",
    with_truth: bool = False,
    dump_graphs: bool = False,
    save_state: bool = False,
    cluster_axis: str = "columns",
) -> tuple[RunManifest, ClusteringReport]:
    """Solve MVMCC and write rows_<v>.csv / columns_<v>.csv plus the same outputs as run_mvmc."""
    if cluster_axis not in CLUSTER_AXES:
        raise ParameterError(f"cluster axis must be one of {CLUSTER_AXES}, got {cluster_axis!r}")
    out = Path(out_dir)
    manifest = _manifest("mvmcc", dataset_path, cfg)
    solver = MvmccSolver(ds, cfg)
    outputs: list[str] = []
    if dump_graphs:
        outputs += write_graphs(out, solver.graphs)
    try:
        result = solver.run()
    except DivergenceError as e:
        _diverged(out, manifest, outputs, solver.logs, e)
        raise

    for v, (rows, columns) in enumerate(zip(result.row_labelings, result.column_labelings)):
        outputs.append(write_labels(out / f"rows_{v}.csv", rows))
        outputs.append(write_labels(out / f"columns_{v}.csv", columns))
    if cluster_axis == "rows":
        report = build_row_report(ds, result.row_labelings)
    else:
        report = build_report(
            ds, result.column_labelings, space,
            truths=list(ds.ground_truths) if with_truth else None,
        )
    outputs += write_report(out, report)
    outputs.append(write_trace(out, result.state.trace))
    if save_state:
        outputs += write_mvmcc_state(out, result.state)

    manifest.converged = result.state.converged
    _finish(out, manifest, outputs, result.warnings + report.warnings)
    return manifest, report


def exit_code(manifest: RunManifest) -> int:
    return EXIT_OK if manifest.converged else EXIT_NOT_CONVERGED
