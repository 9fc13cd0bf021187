"""Command-line front end.

    mvmc generate SPEC.json OUT_DIR
    mvmc mvmc DATASET_DIR [--config cfg.json] [--out DIR] [--sweep lambda1=1e-3..1e3]
    mvmc mvmcc DATASET_DIR --config cfg.json [--cluster-axis rows]
    mvmc report LABELS.csv... --dataset DATASET_DIR [--truth TRUTH.csv]

Exit codes: 0 success, 2 invalid parameters, 3 not converged (outputs are
still written), 4 divergence, 5 I/O failure.
"""

from __future__ import annotations

import logging
import os
from pathlib import Path
from typing import List, Optional

import typer
from numpy.linalg import LinAlgError

from .data import generate, spec_from_dict
from .dataio.loader import load_dataset, load_labels, read_json, save_dataset
from .dataio.writer import save_logs, write_json, write_report
from .errors import DivergenceError, MvmcError, ParameterError
from .metrics import build_report
from .models import MvmccConfig, MvmcConfig
from .runner import exit_code, run_mvmc, run_mvmcc
from .sweep import parse_axes, run_sweep, sweep_exit_code

log = logging.getLogger(__name__)

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"

app = typer.Typer(
    help="Multi-view multiple clustering and co-clustering.",
    no_args_is_help=True,
    add_completion=False,
)


def configure_logging(verbose: bool = False) -> None:
    level = "DEBUG" if verbose else os.environ.get("MVMC_LOG_LEVEL", "INFO").upper()
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)


# numerical failures surface as divergence, stray ValueErrors as bad parameters
CLI_ERRORS = (MvmcError, LinAlgError, ValueError)


def _fail(e: Exception) -> typer.Exit:
    typer.echo(f"Error: {e}", err=True)
    if isinstance(e, MvmcError):
        return typer.Exit(e.exit_code)
    if isinstance(e, LinAlgError):
        return typer.Exit(DivergenceError.exit_code)
    return typer.Exit(ParameterError.exit_code)


def _load_config(cls, path: Optional[Path], **overrides):
    data = read_json(path) if path else {}
    data.update({k: v for k, v in overrides.items() if v is not None})
    return cls.from_dict(data)


@app.command("generate")
def cmd_generate(
    spec_file: Path = typer.Argument(..., help="Synthetic dataset spec (JSON)."),
    out_dir: Path = typer.Argument(..., help="Directory to write the dataset to."),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """Generate a synthetic multi-view dataset with planted labelings."""
    configure_logging(verbose)
    try:
        raw = read_json(spec_file)
        ds = generate(spec_from_dict(raw))
        written = save_dataset(ds, out_dir)
        written.append(write_json(out_dir / "spec.json", raw))
    except CLI_ERRORS as e:
        raise _fail(e)
    typer.echo(f"Wrote {len(written)} file(s) to {out_dir}")


@app.command("mvmc")
def cmd_mvmc(
    dataset: Path = typer.Argument(..., help="Dataset directory."),
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="MvmcConfig JSON."),
    out: Path = typer.Option(Path("out"), "--out", "-o"),
    seed: Optional[int] = typer.Option(None, "--seed"),
    threads: Optional[int] = typer.Option(None, "--threads"),
    no_shared: bool = typer.Option(False, "--no-shared", help="Drop the shared matrix U."),
    sweep: Optional[List[str]] = typer.Option(None, "--sweep", help="key=lo..hi[:steps[lin|log]] or key=v1,v2"),
    metric_space: str = typer.Option("concat", "--metric-space", help="concat or per-view"),
    with_truth: bool = typer.Option(False, "--with-truth", help="Add NMI to the dataset's ground truths."),
    dump_graphs: bool = typer.Option(False, "--dump-graphs"),
    save_state: bool = typer.Option(False, "--save-state"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """Learn h alternative clusterings of a multi-view dataset."""
    configure_logging(verbose)
    try:
        cfg = _load_config(
            MvmcConfig, config, seed=seed, threads=threads,
            use_shared=False if no_shared else None,
        )
        ds = load_dataset(dataset)
        options = dict(
            dataset_path=str(dataset), space=metric_space, with_truth=with_truth,
            dump_graphs=dump_graphs, save_state=save_state,
        )
        if sweep:
            axes = parse_axes(sweep, MvmcConfig)
            runs, summary = run_sweep("mvmc", ds, cfg, axes, out, n_jobs=cfg.threads, **options)
            typer.echo(f"Sweep summary: {summary}")
            code = sweep_exit_code(runs)
        else:
            manifest, report = run_mvmc(ds, cfg, out, **options)
            typer.echo(_summary_line(report.averages))
            code = exit_code(manifest)
    except CLI_ERRORS as e:
        raise _fail(e)
    if code == 3:
        typer.echo("Warning: not converged; outputs written", err=True)
    raise typer.Exit(code)


@app.command("mvmcc")
def cmd_mvmcc(
    dataset: Path = typer.Argument(..., help="Dataset directory."),
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="MvmccConfig JSON (needs r and c)."),
    out: Path = typer.Option(Path("out"), "--out", "-o"),
    seed: Optional[int] = typer.Option(None, "--seed"),
    threads: Optional[int] = typer.Option(None, "--threads"),
    no_shared: bool = typer.Option(False, "--no-shared"),
    sweep: Optional[List[str]] = typer.Option(None, "--sweep"),
    metric_space: str = typer.Option("concat", "--metric-space"),
    cluster_axis: str = typer.Option("columns", "--cluster-axis", help="columns or rows"),
    with_truth: bool = typer.Option(False, "--with-truth"),
    dump_graphs: bool = typer.Option(False, "--dump-graphs"),
    save_state: bool = typer.Option(False, "--save-state"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """Learn one co-clustering per view."""
    configure_logging(verbose)
    try:
        cfg = _load_config(
            MvmccConfig, config, seed=seed, threads=threads,
            use_shared=False if no_shared else None,
        )
        ds = load_dataset(dataset)
        options = dict(
            dataset_path=str(dataset), space=metric_space, with_truth=with_truth,
            dump_graphs=dump_graphs, save_state=save_state, cluster_axis=cluster_axis,
        )
        if sweep:
            axes = parse_axes(sweep, MvmccConfig)
            runs, summary = run_sweep("mvmcc", ds, cfg, axes, out, n_jobs=cfg.threads, **options)
            typer.echo(f"Sweep summary: {summary}")
            code = sweep_exit_code(runs)
        else:
            manifest, report = run_mvmcc(ds, cfg, out, **options)
            typer.echo(_summary_line(report.averages))
            code = exit_code(manifest)
    except CLI_ERRORS as e:
        raise _fail(e)
    if code == 3:
        typer.echo("Warning: not converged; outputs written", err=True)
    raise typer.Exit(code)


@app.command("report")
def cmd_report(
    labels: List[Path] = typer.Argument(..., help="One single-column label CSV per clustering."),
    dataset: Path = typer.Option(..., "--dataset", "-d"),
    truth: Optional[List[Path]] = typer.Option(None, "--truth", help="Ground-truth label CSV."),
    metric_space: str = typer.Option("concat", "--metric-space"),
    out: Path = typer.Option(Path("report"), "--out", "-o"),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
):
    """Score externally produced clusterings against a dataset."""
    configure_logging(verbose)
    try:
        ds = load_dataset(dataset)
        labelings = [load_labels(p) for p in labels]
        truths = [load_labels(p) for p in truth] if truth else None
        report = build_report(ds, labelings, metric_space, truths=truths)
        written = write_report(out, report)
        save_logs(out, report.warnings)
    except CLI_ERRORS as e:
        raise _fail(e)
    typer.echo(f"Wrote {written[0]}")
    typer.echo(_summary_line(report.averages))


def _summary_line(averages: dict) -> str:
    parts = [
        f"{k}={v:.4g}" if v is not None else f"{k}=n/a" for k, v in averages.items()
    ]
    return "averages: " + ", ".join(parts)


def main() -> None:
    app()


if __name__ == "__main__":
    main()
