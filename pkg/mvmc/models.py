from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import ParameterError, ShapeError, ValidationError

NORMALIZE_MODES = ("none", "unit_columns", "zscore_rows")


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


def _check_labels(labels, n: int, what: str) -> np.ndarray:
    arr = np.asarray(labels)
    if arr.ndim != 1 or arr.shape[0] != n:
        raise ValidationError(f"{what}: expected {n} labels, got shape {arr.shape}")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise ValidationError(f"{what}: labels must be integers")
    arr = arr.astype(np.int64)
    present = np.unique(arr)
    if present.size and not np.array_equal(present, np.arange(present.size)):
        raise ValidationError(f"{what}: labels must form a contiguous range starting at 0")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class MultiViewDataset:
    """m views of the same n samples. Each view is d_v x n: columns are samples."""
    views: tuple
    ground_truths: tuple = ()
    names: tuple | None = None
    warnings: tuple = ()  # {"level", "message"} entries

    def __post_init__(self):
        if len(self.views) < 1:
            raise ShapeError("a dataset needs at least one view")
        views = []
        n = None
        for v, X in enumerate(self.views):
            X = np.asarray(X, dtype=np.float64)
            if X.ndim != 2:
                raise ShapeError(f"view {v}: expected a 2-D matrix, got {X.ndim}-D")
            if X.shape[0] < 1:
                raise ShapeError(f"view {v}: needs at least one feature row")
            if n is None:
                n = X.shape[1]
                if n < 2:
                    raise ShapeError(f"view {v}: needs at least 2 samples, got {n}")
            elif X.shape[1] != n:
                raise ShapeError(f"view {v}: has {X.shape[1]} columns, expected {n}")
            bad = np.argwhere(~np.isfinite(X))
            if bad.size:
                i, j = (int(x) for x in bad[0])
                raise ValidationError(f"view {v}: non-finite entry at ({i}, {j})")
            views.append(_frozen(X))
        truths = tuple(
            _check_labels(t, n, f"ground truth {j}") for j, t in enumerate(self.ground_truths)
        )
        names = self.names
        if names is not None:
            names = tuple(str(s) for s in names)
            if len(names) != len(views):
                raise ShapeError(f"{len(names)} view names for {len(views)} views")
        object.__setattr__(self, "views", tuple(views))
        object.__setattr__(self, "ground_truths", truths)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "warnings", tuple(dict(w) for w in self.warnings))

    @property
    def n(self) -> int:
        return self.views[0].shape[1]

    @property
    def m(self) -> int:
        return len(self.views)

    @property
    def dims(self) -> list[int]:
        return [X.shape[0] for X in self.views]

    def view_name(self, v: int) -> str:
        return self.names[v] if self.names else f"view{v}"


@dataclass
class SyntheticSpec:
    n: int
    m: int
    view_dims: list[int]
    num_labelings: int = 1
    clusters_per_labeling: list[int] = field(default_factory=lambda: [2])
    noise_sigma: float = 0.1
    seed: int = 0

    def validate(self) -> None:
        if self.m < 1 or len(self.view_dims) != self.m:
            raise ParameterError(f"view_dims must list {self.m} dimensions")
        if any(d < 1 for d in self.view_dims):
            raise ParameterError("every view dimension must be >= 1")
        if not 1 <= self.num_labelings <= self.m:
            raise ParameterError(
                f"num_labelings must be between 1 and m={self.m}, got {self.num_labelings}"
            )
        if len(self.clusters_per_labeling) != self.num_labelings:
            raise ParameterError("clusters_per_labeling needs one entry per labeling")
        if any(c < 2 for c in self.clusters_per_labeling):
            raise ParameterError("every labeling needs at least 2 clusters")
        if self.n < max(max(self.clusters_per_labeling), 2):
            raise ParameterError("n must be at least the largest cluster count")
        if self.noise_sigma < 0:
            raise ParameterError("noise_sigma must be >= 0")


@dataclass
class CheckerboardSpec:
    """Planted co-cluster blocks: one sample partition shared by all views."""
    n: int
    m: int
    view_dims: list[int]
    row_clusters: int = 4
    col_clusters: int = 3
    noise_sigma: float = 0.1
    seed: int = 0

    def validate(self) -> None:
        if self.m < 1 or len(self.view_dims) != self.m:
            raise ParameterError(f"view_dims must list {self.m} dimensions")
        if self.row_clusters < 1 or any(d < self.row_clusters for d in self.view_dims):
            raise ParameterError("every view needs at least row_clusters features")
        if self.col_clusters < 2 or self.n < self.col_clusters:
            raise ParameterError("col_clusters must be >= 2 and <= n")
        if self.noise_sigma < 0:
            raise ParameterError("noise_sigma must be >= 0")


@dataclass(frozen=True)
class GraphSet:
    similarities: tuple          # W^v, n x n
    degrees: tuple               # Lambda^v, diagonal n x n
    laplacian_sum: np.ndarray    # sum_v (Lambda^v - W^v)
    epsilon: int
    kernel_widths: tuple         # sigma_v per view


@dataclass(frozen=True)
class DiversityContext:
    h: int
    kernels: tuple       # K^k = D^k.T @ D^k
    centering: np.ndarray
    aggregated: tuple    # K~^k


@dataclass
class SemiNmfPair:
    B: np.ndarray   # n x r, any sign
    R: np.ndarray   # n x r, >= 0

    @property
    def r(self) -> int:
        return self.R.shape[1]


@dataclass
class TriFactorTriple:
    C: np.ndarray   # d x c, >= 0
    S: np.ndarray   # c x r
    R: np.ndarray   # n x r, >= 0

    @property
    def c(self) -> int:
        return self.C.shape[1]

    @property
    def r(self) -> int:
        return self.R.shape[1]


def _broadcast(value, count: int) -> list[int] | None:
    if value is None:
        return None
    if isinstance(value, (int, np.integer)):
        return [int(value)] * count
    value = [int(x) for x in value]
    if len(value) != count and len(set(value)) == 1:
        return value[:1] * count
    return value


@dataclass
class _ConfigBase:
    lambda1: float = 10.0
    lambda2: float = 100.0
    mu0: float = 1e-2
    rho: float = 1.1
    mu_max: float = 1e6
    max_outer_iters: int = 200
    tol_obj: float = 1e-5
    tol_feas: float = 1e-4
    seed: int = 0
    use_shared: bool = True
    epsilon_knn: int = 5
    kernel_width: float | None = None
    normalize: str = "none"
    threads: int = 1
    log_every: int = 10

    @classmethod
    def from_dict(cls, data: dict):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ParameterError(f"unknown config key(s): {', '.join(unknown)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return asdict(self)

    def _validate_common(self) -> None:
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ParameterError("lambda1 and lambda2 must be >= 0")
        if self.mu0 <= 0:
            raise ParameterError("mu0 must be > 0")
        if self.rho <= 1:
            raise ParameterError("rho must be > 1")
        if self.mu_max < self.mu0:
            raise ParameterError("mu_max must be >= mu0")
        if self.max_outer_iters < 1:
            raise ParameterError("max_outer_iters must be >= 1")
        if self.epsilon_knn < 1:
            raise ParameterError("epsilon_knn must be >= 1")
        if self.kernel_width is not None and self.kernel_width <= 0:
            raise ParameterError("kernel_width must be > 0")
        if self.normalize not in NORMALIZE_MODES:
            raise ParameterError(f"normalize must be one of {NORMALIZE_MODES}")
        if self.threads < 1:
            raise ParameterError("threads must be >= 1")


@dataclass
class MvmcConfig(_ConfigBase):
    h: int = 2
    r: list[int] | int | None = None   # per-clustering cluster counts; default 2 each

    def __post_init__(self):
        self.r = _broadcast(self.r, self.h) or [2] * self.h

    def validate(self) -> None:
        self._validate_common()
        if self.h < 1:
            raise ParameterError("h must be >= 1")
        if len(self.r) != self.h:
            raise ParameterError(f"r lists {len(self.r)} cluster counts for h={self.h}")
        if any(rk < 2 for rk in self.r):
            raise ParameterError("every r_k must be >= 2")


@dataclass
class MvmccConfig(_ConfigBase):
    r: list[int] | int | None = None   # per-view column (sample) cluster counts
    c: list[int] | int | None = None   # per-view row (feature) cluster counts; required

    def validate(self) -> None:
        self._validate_common()
        if self.c is None:
            raise ParameterError("c (per-view row-cluster counts) is required")
        if self.r is None:
            raise ParameterError("r (per-view column-cluster counts) is required")

    def resolve(self, dims: list[int], n: int) -> tuple[list[int], list[int]]:
        """Per-view (r_v, c_v) lists for a dataset with the given dims."""
        self.validate()
        m = len(dims)
        r = _broadcast(self.r, m)
        c = _broadcast(self.c, m)
        if len(r) != m or len(c) != m:
            raise ParameterError(f"r and c must give one count per view (m={m})")
        for v, (rv, cv, dv) in enumerate(zip(r, c, dims)):
            if not 1 <= cv <= dv:
                raise ParameterError(f"view {v}: c_v={cv} must be between 1 and d_v={dv}")
            if not 2 <= rv <= n:
                raise ParameterError(f"view {v}: r_v={rv} must be between 2 and n={n}")
        return r, c


@dataclass
class ObjectiveTerms:
    fit: float
    hsic: float
    smooth: float
    penalty: float

    @property
    def total(self) -> float:
        return self.fit + self.hsic + self.smooth + self.penalty


@dataclass
class TraceRow:
    iteration: int
    fit: float
    hsic: float
    smooth: float
    penalty: float
    total: float
    feasibility: float
    mu: float
    # augmented objective before the sweep and after each of its update steps,
    # all at the mu, multipliers and kernels of this iteration
    step_totals: tuple = ()


@dataclass
class MvmcState:
    U: np.ndarray
    Ds: list[np.ndarray]
    heads: list[SemiNmfPair]
    multipliers: list[list[np.ndarray]]   # multipliers[k][v], d_v x n
    mu: float
    trace: list[TraceRow] = field(default_factory=list)
    converged: bool = False


@dataclass
class MvmccState:
    U: np.ndarray
    Ds: list[np.ndarray]
    triples: list[TriFactorTriple]
    multipliers: list[np.ndarray]         # multipliers[v], d_v x n
    mu: float
    trace: list[TraceRow] = field(default_factory=list)
    converged: bool = False


@dataclass
class MvmcResult:
    state: MvmcState
    labelings: list[np.ndarray]
    warnings: list[dict] = field(default_factory=list)


@dataclass
class MvmccResult:
    state: MvmccState
    row_labelings: list[np.ndarray]
    column_labelings: list[np.ndarray]
    warnings: list[dict] = field(default_factory=list)


@dataclass
class ClusteringReport:
    labelings: list[np.ndarray]
    quality: list[dict]                 # per clustering {"sc": .., "di": ..}; None = undefined
    nmi: list[list[float | None]]       # h x h, unit diagonal
    jc: list[list[float | None]]
    averages: dict
    metric_space: str = "concat"
    truth_nmi: list[list[float]] | None = None   # [clustering][truth]
    warnings: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {
            "h": len(self.labelings),
            "n": int(self.labelings[0].shape[0]) if self.labelings else 0,
            "metric_space": self.metric_space,
            "quality": self.quality,
            "averages": self.averages,
            "warnings": self.warnings,
        }
        if len(self.labelings) > 1:
            out["diversity"] = {"nmi": self.nmi, "jc": self.jc}
        if self.truth_nmi is not None:
            out["truth_nmi"] = self.truth_nmi
        return out


@dataclass
class RunManifest:
    command: str
    dataset_path: str
    seed: int | None
    config_hash: str
    started_at: str
    finished_at: str = ""
    outputs: list[str] = field(default_factory=list)
    converged: bool | None = None
    config: dict = field(default_factory=dict)


@dataclass
class SweepAxis:
    key: str
    values: list[float]


@dataclass
class SweepRun:
    index: int
    params: dict
    out_dir: str
    status: str = "pending"      # ok | not_converged | diverged | failed
    averages: dict = field(default_factory=dict)
