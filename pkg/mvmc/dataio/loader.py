"""Dataset discovery, ingestion and the on-disk dataset format.

A dataset directory holds `manifest.json` and one headerless CSV per view
(d_v rows x n columns), plus optional single-column ground-truth CSVs:

    {"n": 4,
     "views": [{"name": "color", "file": "view0.csv", "dim": 3}, ...],
     "ground_truths": ["truth0.csv"]}
"""

from __future__ import annotations

import json
import logging
import os
from pathlib import Path

import numpy as np

from ..errors import IngestionError, ShapeError, ValidationError
from ..models import MultiViewDataset

log = logging.getLogger(__name__)

MANIFEST = "manifest.json"


def read_json(path: str | os.PathLike) -> dict:
    p = Path(path)
    if not p.is_file():
        raise IngestionError(f"File not found: {path}")
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise IngestionError(f"{path}: invalid JSON ({e})") from e


def discover_views(root: str | os.PathLike) -> tuple[dict, list[dict]]:
    """Read the manifest and check that every file it lists exists.

    Returns (manifest, logs). Each log entry is a dict with 'level' and 'message'.
    """
    p = Path(root)
    if not p.is_dir():
        raise IngestionError(f"Dataset directory not found: {root}")
    manifest = read_json(p / MANIFEST)
    views = manifest.get("views")
    if not isinstance(views, list) or not views:
        raise IngestionError(f"{p / MANIFEST}: 'views' must be a non-empty list")

    logs: list[dict] = []
    for v, entry in enumerate(views):
        name = entry.get("name", f"view{v}") if isinstance(entry, dict) else f"view{v}"
        file = entry.get("file") if isinstance(entry, dict) else entry
        if not file:
            raise IngestionError(f"view {v} ({name}): manifest entry has no file")
        if not (p / file).is_file():
            raise IngestionError(f"view {v} ({name}): file not found: {file}")
        logs.append({"level": "info", "message": f"Found view {v} ({name}): {file}"})
    for t in manifest.get("ground_truths", []) or []:
        if not (p / t).is_file():
            raise IngestionError(f"ground truth file not found: {t}")
    return manifest, logs


def _read_matrix(path: Path, what: str) -> np.ndarray:
    try:
        return np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except ValueError as e:
        raise IngestionError(f"{what}: ragged or unparsable CSV {path.name} ({e})") from e


def load_labels(path: str | os.PathLike) -> np.ndarray:
    """Read a single-column CSV of integer labels."""
    p = Path(path)
    if not p.is_file():
        raise IngestionError(f"Label file not found: {path}")
    try:
        raw = np.loadtxt(p, delimiter=",", dtype=np.float64, ndmin=2)
    except ValueError as e:
        raise IngestionError(f"{p.name}: unparsable label file ({e})") from e
    if raw.shape[1] != 1:
        raise IngestionError(f"{p.name}: expected a single column, got {raw.shape[1]}")
    labels = raw[:, 0]
    if not np.all(np.equal(np.mod(labels, 1), 0)):
        raise ValidationError(f"{p.name}: labels must be integers")
    return labels.astype(np.int64)


def load_dataset(root: str | os.PathLike) -> MultiViewDataset:
    """Load and validate a dataset directory."""
    p = Path(root)
    manifest, logs = discover_views(p)
    for entry in logs:
        log.debug(entry["message"])

    views, names = [], []
    expected_n = manifest.get("n")
    for v, entry in enumerate(manifest["views"]):
        if isinstance(entry, str):
            entry = {"file": entry}
        name = entry.get("name", f"view{v}")
        X = _read_matrix(p / entry["file"], f"view {v} ({name})")
        if expected_n is not None and X.shape[1] != expected_n:
            raise ShapeError(f"view {v} ({name}): has {X.shape[1]} columns, manifest says n={expected_n}")
        if "dim" in entry and X.shape[0] != entry["dim"]:
            raise ShapeError(f"view {v} ({name}): has {X.shape[0]} rows, manifest says d={entry['dim']}")
        views.append(X)
        names.append(name)

    truths = [load_labels(p / t) for t in manifest.get("ground_truths", []) or []]
    ds = MultiViewDataset(views=tuple(views), ground_truths=tuple(truths), names=tuple(names))
    log.info("Loaded %s: m=%d, n=%d, dims=%s", p, ds.m, ds.n, ds.dims)
    return ds


def save_dataset(ds: MultiViewDataset, root: str | os.PathLike) -> list[str]:
    """Write `ds` in the format read by load_dataset. Returns the written paths."""
    p = Path(root)
    try:
        p.mkdir(parents=True, exist_ok=True)
        written = []
        entries = []
        for v, X in enumerate(ds.views):
            file = f"view{v}.csv"
            np.savetxt(p / file, X, delimiter=",", fmt="%.17g")
            entries.append({"name": ds.view_name(v), "file": file, "dim": int(X.shape[0])})
            written.append(str(p / file))
        truths = []
        for j, t in enumerate(ds.ground_truths):
            file = f"truth{j}.csv"
            np.savetxt(p / file, t.reshape(-1, 1), fmt="%d")
            truths.append(file)
            written.append(str(p / file))
        manifest = {"n": ds.n, "views": entries, "ground_truths": truths}
        (p / MANIFEST).write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
        written.append(str(p / MANIFEST))
    except OSError as e:
        raise IngestionError(f"Cannot write dataset to {root}: {e}") from e
    return written
