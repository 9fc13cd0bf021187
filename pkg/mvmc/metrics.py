"""Clustering quality (SC, DI) and redundancy (NMI, JC) measures.

Quality is measured on sample-by-feature matrices (rows are points). Higher
SC and DI mean better clusterings; lower NMI and JC between two clusterings
mean more diverse alternatives.
"""

from __future__ import annotations

import logging
from itertools import combinations

import numpy as np
from scipy.spatial.distance import pdist, squareform
from sklearn.metrics import normalized_mutual_info_score, silhouette_samples
from sklearn.metrics.cluster import pair_confusion_matrix

from .data import standardized_samples
from .errors import MetricError, ShapeError
from .models import ClusteringReport, MultiViewDataset

log = logging.getLogger(__name__)


def _labels(labels) -> np.ndarray:
    arr = np.asarray(labels)
    if arr.ndim != 1:
        raise ShapeError(f"labels must be 1-D, got shape {arr.shape}")
    return arr


def _check_points(X, labels) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=np.float64)
    labels = _labels(labels)
    if X.ndim != 2 or X.shape[0] != labels.shape[0]:
        raise ShapeError(f"{labels.shape[0]} labels for a point matrix of shape {X.shape}")
    if np.unique(labels).size < 2:
        raise MetricError("quality index undefined for a single cluster")
    return X, labels


def _pair(labels_a, labels_b, minimum: int) -> tuple[np.ndarray, np.ndarray]:
    a, b = _labels(labels_a), _labels(labels_b)
    if a.shape != b.shape:
        raise ShapeError(f"labelings differ in length: {a.shape[0]} vs {b.shape[0]}")
    if a.shape[0] < minimum:
        raise ShapeError(f"need at least {minimum} labels, got {a.shape[0]}")
    return a, b


def silhouette(X, labels) -> float:
    """Mean silhouette over points; singleton clusters contribute 0."""
    X, labels = _check_points(X, labels)
    n = X.shape[0]
    if np.unique(labels).size >= n:
        return 0.0
    dist = squareform(pdist(X))
    return float(np.mean(silhouette_samples(dist, labels, metric="precomputed")))


def dunn_index(X, labels) -> float:
    """Smallest between-cluster point distance over the largest cluster diameter."""
    X, labels = _check_points(X, labels)
    dist = squareform(pdist(X))
    same = labels[:, None] == labels[None, :]
    diameter = float(dist[same].max())
    if diameter <= 0:
        raise MetricError("Dunn index undefined: every cluster has zero diameter")
    return float(dist[~same].min()) / diameter


def nmi(labels_a, labels_b) -> float:
    """Mutual information normalized by the geometric mean of the entropies."""
    a, b = _pair(labels_a, labels_b, 1)
    value = normalized_mutual_info_score(a, b, average_method="geometric")
    return float(min(max(value, 0.0), 1.0))


def jaccard(labels_a, labels_b) -> float:
    """n11 / (n11 + n10 + n01) over unordered sample pairs; 0 when no pair is co-clustered."""
    a, b = _pair(labels_a, labels_b, 2)
    # ordered pair counts; the factor 2 cancels
    (_, n01), (n10, n11) = pair_confusion_matrix(a, b)
    denom = n11 + n10 + n01
    return float(n11) / float(denom) if denom else 0.0


def _quality(spaces: list[np.ndarray], labels: np.ndarray, name: str, warnings: list[dict]) -> dict:
    out = {}
    for key, fn in (("sc", silhouette), ("di", dunn_index)):
        try:
            out[key] = float(np.mean([fn(X, labels) for X in spaces]))
        except MetricError as e:
            msg = f"{name}: {key} undefined ({e})"
            log.warning(msg)
            warnings.append({"level": "warn", "message": msg})
            out[key] = None
    return out


def _mean(values) -> float | None:
    values = [v for v in values if v is not None]
    return float(np.mean(values)) if values else None


def build_report(
    ds: MultiViewDataset,
    labelings: list,
    space: str = "concat",
    truths: list | None = None,
) -> ClusteringReport:
    """Quality of every sample clustering and redundancy between every pair.

    Undefined metrics are recorded as None with a warning, never raised.
    """
    labelings = [_labels(lab).astype(np.int64) for lab in labelings]
    if not labelings:
        raise ShapeError("need at least one labeling")
    for k, lab in enumerate(labelings):
        if lab.shape[0] != ds.n:
            raise ShapeError(f"labeling {k} has {lab.shape[0]} labels, dataset has n={ds.n}")
    spaces = standardized_samples(ds, space)
    warnings: list[dict] = []
    quality = [
        _quality(spaces, lab, f"clustering {k}", warnings) for k, lab in enumerate(labelings)
    ]
    return _assemble(labelings, quality, space, truths, warnings)


def _feature_points(X: np.ndarray) -> np.ndarray:
    """Rows of X as points, each sample coordinate z-scored across features.

    Zero-variance coordinates are left as they are.
    """
    std = X.std(axis=0, keepdims=True)
    flat = (std == 0).ravel()
    out = (X - X.mean(axis=0, keepdims=True)) / np.where(std == 0, 1.0, std)
    out[:, flat] = X[:, flat]
    return out


def build_row_report(ds: MultiViewDataset, row_labelings: list) -> ClusteringReport:
    """Report over per-view feature clusterings (MVMCC rows).

    Features of view v are points in the space of the n samples; redundancy is
    only defined between views with the same number of features.
    A view with a single feature gets None quality and a warning.
    """
    labelings = [_labels(lab).astype(np.int64) for lab in row_labelings]
    if len(labelings) != ds.m:
        raise ShapeError(f"{len(labelings)} row labelings for {ds.m} views")
    warnings: list[dict] = []
    quality = []
    for v, (X, lab) in enumerate(zip(ds.views, labelings)):
        if lab.shape[0] != X.shape[0]:
            raise ShapeError(f"{ds.view_name(v)}: {lab.shape[0]} row labels for {X.shape[0]} features")
        quality.append(_quality([_feature_points(X)], lab, f"{ds.view_name(v)} rows", warnings))
    return _assemble(labelings, quality, "rows", None, warnings)


def _assemble(labelings, quality, space, truths, warnings) -> ClusteringReport:
    h = len(labelings)
    nmi_m = [[1.0 if i == j else None for j in range(h)] for i in range(h)]
    jc_m = [[1.0 if i == j else None for j in range(h)] for i in range(h)]
    for i, j in combinations(range(h), 2):
        if labelings[i].shape != labelings[j].shape:
            continue
        nmi_m[i][j] = nmi_m[j][i] = nmi(labelings[i], labelings[j])
        jc_m[i][j] = jc_m[j][i] = jaccard(labelings[i], labelings[j])

    averages = {
        "sc": _mean(q["sc"] for q in quality),
        "di": _mean(q["di"] for q in quality),
    }
    if h > 1:
        pairs = list(combinations(range(h), 2))
        averages["nmi"] = _mean(nmi_m[i][j] for i, j in pairs)
        averages["jc"] = _mean(jc_m[i][j] for i, j in pairs)

    truth_nmi = None
    if truths:
        truth_nmi = [[nmi(lab, t) for t in truths] for lab in labelings]

    return ClusteringReport(
        labelings=labelings,
        quality=quality,
        nmi=nmi_m,
        jc=jc_m,
        averages=averages,
        metric_space=space,
        truth_nmi=truth_nmi,
        warnings=warnings,
    )
