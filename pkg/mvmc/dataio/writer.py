"""Run outputs: label CSVs, reports, traces, state snapshots, manifests and run logs."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import os
from dataclasses import asdict
from pathlib import Path

import numpy as np

from ..alm import trace_rows
from ..errors import IngestionError
from ..models import ClusteringReport, GraphSet, MvmccState, MvmcState, RunManifest, TraceRow

log = logging.getLogger(__name__)

REPORT_JSON = "report.json"
REPORT_CSV = "report.csv"
TRACE_CSV = "trace.csv"
MANIFEST_JSON = "run_manifest.json"
RUN_LOG = "run.log"

TRACE_FIELDS = ["iter", "fit", "hsic", "smooth", "penalty", "feasibility", "mu", "total"]


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_json_default)


def config_hash(config: dict) -> str:
    """SHA-256 of the canonical (sorted-key) JSON form of a config."""
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()


def _writing(path: Path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise IngestionError(f"Cannot create {path.parent}: {e}") from e


def write_json(path: str | os.PathLike, obj) -> str:
    p = Path(path)
    _writing(p)
    try:
        p.write_text(
            json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n",
            encoding="utf-8",
        )
    except OSError as e:
        raise IngestionError(f"Cannot write {p}: {e}") from e
    return str(p)


def write_rows(path: str | os.PathLike, rows: list[dict], fieldnames: list[str]) -> str:
    p = Path(path)
    _writing(p)
    try:
        with p.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=fieldnames, extrasaction="ignore")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: ("" if v is None else v) for k, v in row.items()})
    except OSError as e:
        raise IngestionError(f"Cannot write {p}: {e}") from e
    return str(p)


def write_matrix(path: str | os.PathLike, M: np.ndarray) -> str:
    p = Path(path)
    _writing(p)
    try:
        np.savetxt(p, np.atleast_2d(M), delimiter=",", fmt="%.17g")
    except OSError as e:
        raise IngestionError(f"Cannot write {p}: {e}") from e
    return str(p)


def write_labels(path: str | os.PathLike, labels: np.ndarray) -> str:
    p = Path(path)
    _writing(p)
    try:
        np.savetxt(p, np.asarray(labels, dtype=np.int64).reshape(-1, 1), fmt="%d")
    except OSError as e:
        raise IngestionError(f"Cannot write {p}: {e}") from e
    return str(p)


def report_rows(report: ClusteringReport) -> list[dict]:
    """Flatten a report into `kind,i,j,metric,value` rows."""
    rows = []
    for i, q in enumerate(report.quality):
        for metric in ("sc", "di"):
            rows.append({"kind": "quality", "i": i, "j": "", "metric": metric, "value": q[metric]})
    h = len(report.labelings)
    for i in range(h):
        for j in range(i + 1, h):
            rows.append({"kind": "diversity", "i": i, "j": j, "metric": "nmi", "value": report.nmi[i][j]})
            rows.append({"kind": "diversity", "i": i, "j": j, "metric": "jc", "value": report.jc[i][j]})
    for metric, value in report.averages.items():
        rows.append({"kind": "average", "i": "", "j": "", "metric": metric, "value": value})
    for i, row in enumerate(report.truth_nmi or []):
        for j, value in enumerate(row):
            rows.append({"kind": "truth", "i": i, "j": j, "metric": "nmi", "value": value})
    return rows


def write_report(out_dir: str | os.PathLike, report: ClusteringReport) -> list[str]:
    out = Path(out_dir)
    return [
        write_json(out / REPORT_JSON, report.to_dict()),
        write_rows(out / REPORT_CSV, report_rows(report), ["kind", "i", "j", "metric", "value"]),
    ]


def write_trace(out_dir: str | os.PathLike, trace: list[TraceRow]) -> str:
    return write_rows(Path(out_dir) / TRACE_CSV, trace_rows(trace), TRACE_FIELDS)


def write_mvmc_state(out_dir: str | os.PathLike, state: MvmcState) -> list[str]:
    out = Path(out_dir) / "state"
    written = [write_matrix(out / "U.csv", state.U)]
    for k, (D, pair) in enumerate(zip(state.Ds, state.heads)):
        written.append(write_matrix(out / f"D{k}.csv", D))
        written.append(write_matrix(out / f"B{k}.csv", pair.B))
        written.append(write_matrix(out / f"R{k}.csv", pair.R))
    return written


def write_mvmcc_state(out_dir: str | os.PathLike, state: MvmccState) -> list[str]:
    out = Path(out_dir) / "state"
    written = [write_matrix(out / "U.csv", state.U)]
    for v, (D, t) in enumerate(zip(state.Ds, state.triples)):
        written.append(write_matrix(out / f"D{v}.csv", D))
        written.append(write_matrix(out / f"C{v}.csv", t.C))
        written.append(write_matrix(out / f"S{v}.csv", t.S))
        written.append(write_matrix(out / f"R{v}.csv", t.R))
    return written


def write_graphs(out_dir: str | os.PathLike, graphs: GraphSet) -> list[str]:
    out = Path(out_dir) / "graphs"
    written = [write_matrix(out / f"W{v}.csv", W) for v, W in enumerate(graphs.similarities)]
    written.append(write_matrix(out / "laplacian.csv", graphs.laplacian_sum))
    return written


def save_logs(out_dir: str | os.PathLike, logs: list[dict]) -> str | None:
    """Write log entries to <out_dir>/run.log as `[LEVEL] message` lines."""
    if not logs:
        return None
    p = Path(out_dir) / RUN_LOG
    _writing(p)
    lines = []
    for entry in logs:
        level = entry.get("level", "info").upper()
        message = entry.get("message", str(entry))
        lines.append(f"[{level}] {message}")
    try:
        p.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as e:
        raise IngestionError(f"Cannot write {p}: {e}") from e
    return str(p)


def write_manifest(out_dir: str | os.PathLike, manifest: RunManifest) -> str:
    path = Path(out_dir) / MANIFEST_JSON
    manifest.outputs = sorted(set(manifest.outputs) | {str(path)})
    return write_json(path, asdict(manifest))
