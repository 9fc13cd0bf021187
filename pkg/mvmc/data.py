"""Synthetic multi-view generators and per-view preprocessing."""

from __future__ import annotations

import logging

import numpy as np

from .errors import ParameterError
from .models import NORMALIZE_MODES, CheckerboardSpec, MultiViewDataset, SyntheticSpec

log = logging.getLogger(__name__)


def _balanced_labels(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    """A random partition of n items into k nonempty, near-equal groups."""
    return rng.permutation(np.arange(n) % k)


def generate_synthetic(spec: SyntheticSpec) -> MultiViewDataset:
    """Views driven by alternative planted labelings.

    View v takes its cluster means from labeling v mod num_labelings, so every
    labeling is recoverable from at least one view.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    labelings = [
        _balanced_labels(rng, spec.n, c) for c in spec.clusters_per_labeling
    ]
    views = []
    for v, d in enumerate(spec.view_dims):
        j = v % spec.num_labelings
        means = rng.normal(0.0, 1.0, size=(d, spec.clusters_per_labeling[j]))
        noise = rng.normal(0.0, 1.0, size=(d, spec.n))
        views.append(means[:, labelings[j]] + spec.noise_sigma * noise)
    log.info(
        "Generated %d view(s) x %d samples with %d planted labeling(s)",
        spec.m, spec.n, spec.num_labelings,
    )
    return MultiViewDataset(
        views=tuple(views),
        ground_truths=tuple(labelings),
        names=tuple(f"view{v}" for v in range(spec.m)),
    )


def generate_checkerboard(spec: CheckerboardSpec) -> MultiViewDataset:
    """Block-mean views: feature groups x a sample partition shared by every view."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    columns = _balanced_labels(rng, spec.n, spec.col_clusters)
    views = []
    for d in spec.view_dims:
        rows = _balanced_labels(rng, d, spec.row_clusters)
        core = rng.normal(0.0, 1.0, size=(spec.row_clusters, spec.col_clusters))
        noise = rng.normal(0.0, 1.0, size=(d, spec.n))
        views.append(core[rows][:, columns] + spec.noise_sigma * noise)
    return MultiViewDataset(
        views=tuple(views),
        ground_truths=(columns,),
        names=tuple(f"view{v}" for v in range(spec.m)),
    )


def spec_from_dict(data: dict) -> SyntheticSpec | CheckerboardSpec:
    """Build a generator spec from its JSON form; `kind` picks the generator."""
    data = dict(data)
    kind = data.pop("kind", "planted")
    cls = {"planted": SyntheticSpec, "checkerboard": CheckerboardSpec}.get(kind)
    if cls is None:
        raise ParameterError(f"unknown synthetic kind: {kind!r}")
    try:
        spec = cls(**data)
    except TypeError as e:
        raise ParameterError(f"invalid {kind} spec: {e}") from e
    spec.validate()
    return spec


def generate(spec: SyntheticSpec | CheckerboardSpec) -> MultiViewDataset:
    if isinstance(spec, CheckerboardSpec):
        return generate_checkerboard(spec)
    return generate_synthetic(spec)


def normalize_views(ds: MultiViewDataset, mode: str = "none") -> MultiViewDataset:
    """Return a dataset with every view transformed by `mode`.

    unit_columns leaves all-zero columns as zeros and records a warning;
    zscore_rows leaves zero-variance feature rows untouched.
    """
    if mode not in NORMALIZE_MODES:
        raise ParameterError(f"normalize mode must be one of {NORMALIZE_MODES}, got {mode!r}")
    if mode == "none":
        return ds

    warnings = list(ds.warnings)
    views = []
    for v, X in enumerate(ds.views):
        if mode == "unit_columns":
            norms = np.linalg.norm(X, axis=0)
            zero = norms == 0
            if zero.any():
                msg = f"{ds.view_name(v)}: {int(zero.sum())} all-zero column(s) left unscaled"
                log.warning(msg)
                warnings.append({"level": "warn", "message": msg})
            views.append(X / np.where(zero, 1.0, norms))
        else:
            mean = X.mean(axis=1, keepdims=True)
            std = X.std(axis=1, keepdims=True)
            flat = (std == 0).ravel()
            out = (X - mean) / np.where(std == 0, 1.0, std)
            out[flat] = X[flat]
            views.append(out)
    return MultiViewDataset(
        views=tuple(views),
        ground_truths=ds.ground_truths,
        names=ds.names,
        warnings=tuple(warnings),
    )


def standardized_samples(ds: MultiViewDataset, space: str = "concat") -> list[np.ndarray]:
    """Sample-by-feature matrices used for distance-based quality indices.

    Every view is z-scored per feature first. "concat" returns one n x sum(d_v)
    matrix, "per-view" returns one n x d_v matrix per view.
    """
    if space not in ("concat", "per-view"):
        raise ParameterError(f"metric space must be 'concat' or 'per-view', got {space!r}")
    blocks = [X.T for X in normalize_views(ds, "zscore_rows").views]
    if space == "concat":
        return [np.hstack(blocks)]
    return blocks
