"""Synthetic data generation, preprocessing, CSV ingestion, and splits.

Feature values are drawn from the symmetric generalized normal density
p(x) ~ exp(-|x|^beta) (beta=2 Gaussian, beta=1 Laplace; smaller beta,
heavier tails), optionally with a correlation-r recursion along the
feature index. Datasets are standardized per column and max-abs
normalized to [-1, 1] before being fed to feature maps, and carry their
seed and preprocessing history for reproducibility.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .rng import RNG_SCHEME, as_generator

STANDARDIZE_STEP = "standardize(zscore,ddof=1)"
NORMALIZE_STEP = "normalize(global-max-abs)"
PCA_STEP = "pca({k})"


@dataclass(frozen=True)
class GenNormSpec:
    """Generalized-normal sampler parameters (mu=0, sigma=1 fixed)."""

    beta: float
    r: float = 0.0

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if not 0.0 <= self.r < 1.0:
            raise ValueError(f"r must lie in [0, 1), got {self.r}")

    def to_dict(self) -> dict:
        return {"beta": self.beta, "r": self.r}

    @classmethod
    def from_dict(cls, d: dict) -> "GenNormSpec":
        return cls(beta=d["beta"], r=d.get("r", 0.0))


@dataclass
class Dataset:
    """P x d point matrix with optional +-1 labels and RNG provenance."""

    points: np.ndarray
    labels: np.ndarray | None = None
    seed: int | None = None
    preprocessing: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.points.ndim != 2:
            raise ValueError(f"points must be 2-D, got shape {self.points.shape}")
        if not np.all(np.isfinite(self.points)):
            raise ValueError("points contain non-finite entries")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (self.points.shape[0],):
                raise ValueError("labels length does not match number of points")
            if not np.all(np.abs(self.labels) == 1):
                raise ValueError("labels must be exactly +1 or -1")

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def _gennorm(rng: np.random.Generator, beta: float, size) -> np.ndarray:
    # |x|^beta ~ Gamma(1/beta, 1), so |x| = G**(1/beta); sign is a fair coin.
    magnitude = rng.gamma(1.0 / beta, 1.0, size=size) ** (1.0 / beta)
    sign = rng.integers(0, 2, size=size) * 2 - 1
    return sign * magnitude


def sample_gennorm(beta: float, count: int, seed) -> np.ndarray:
    """i.i.d. draws from the generalized normal density exp(-|x|^beta)."""
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    return _gennorm(as_generator(seed), beta, count)


def sample_dataset(
    spec: GenNormSpec, n_points: int, dim: int, seed, preprocess: bool = True
) -> Dataset:
    """Sample a (P, d) dataset; feature j >= 1 follows the correlation recursion.

    x_j = r * x_{j-1} + sqrt(1 - r^2) * fresh draw, columnwise, so adjacent
    features correlate at r (exactly variance-preserving for beta=2).
    ``preprocess=False`` returns the raw draws, e.g. to measure the
    empirical correlation before standardization.
    """
    if n_points < 2:
        raise ValueError(f"need at least 2 points, got {n_points}")
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    rng = as_generator(seed)
    pts = np.empty((n_points, dim))
    pts[:, 0] = _gennorm(rng, spec.beta, n_points)
    scale = np.sqrt(1.0 - spec.r**2)
    for j in range(1, dim):
        pts[:, j] = spec.r * pts[:, j - 1] + scale * _gennorm(rng, spec.beta, n_points)
    steps: list[str] = []
    if preprocess:
        pts = standardize_normalize(pts)
        steps = [STANDARDIZE_STEP, NORMALIZE_STEP]
    return Dataset(
        points=pts,
        seed=seed if isinstance(seed, int) else None,
        preprocessing=steps,
    )


def standardize_normalize(points) -> np.ndarray:
    """Column z-score (ddof=1), then divide by the global max-abs entry.

    Output columns have mean 0 and all values lie in [-1, 1] with the
    extreme entry at exactly +-1. Constant columns cannot be z-scored;
    they are zeroed with a warning.
    """
    pts = np.array(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise ValueError(f"need a (P>=2, d) matrix, got shape {pts.shape}")
    std = pts.std(axis=0, ddof=1)
    constant = std == 0.0
    if np.any(constant):
        warnings.warn(
            f"constant column(s) {np.flatnonzero(constant).tolist()} zeroed "
            "during standardization",
            RuntimeWarning,
            stacklevel=2,
        )
    z = (pts - pts.mean(axis=0)) / np.where(constant, 1.0, std)
    z[:, constant] = 0.0
    peak = np.abs(z).max()
    if peak == 0.0:
        warnings.warn("all columns constant; returning zeros", RuntimeWarning, stacklevel=2)
        return z
    return z / peak


def pca_reduce(points, n_components: int) -> np.ndarray:
    """Project onto the top principal components of the column covariance.

    Components are ordered by descending eigenvalue; each component's
    largest-magnitude loading is made positive so the projection sign is
    deterministic.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise ValueError(f"points must be 2-D, got shape {pts.shape}")
    n_points, dim = pts.shape
    if not 1 <= n_components <= min(n_points, dim):
        raise ValueError(
            f"n_components={n_components} outside [1, min(P={n_points}, d={dim})]"
        )
    centered = pts - pts.mean(axis=0)
    cov = centered.T @ centered / (n_points - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    eigvecs = eigvecs[:, ::-1]
    flip = np.sign(eigvecs[np.abs(eigvecs).argmax(axis=0), np.arange(dim)])
    eigvecs = eigvecs * np.where(flip == 0, 1.0, flip)
    return centered @ eigvecs[:, :n_components]


def train_test_split(data: Dataset, n_train: int, n_test: int, seed):
    """Disjoint uniform subsets of the rows; deterministic given seed."""
    if n_train < 1 or n_test < 1:
        raise ValueError("n_train and n_test must be >= 1")
    if n_train + n_test > data.n_points:
        raise ValueError(
            f"n_train + n_test = {n_train + n_test} exceeds P = {data.n_points}"
        )
    perm = as_generator(seed).permutation(data.n_points)
    train_idx = np.sort(perm[:n_train])
    test_idx = np.sort(perm[n_train : n_train + n_test])

    def take(idx):
        return Dataset(
            points=data.points[idx],
            labels=None if data.labels is None else data.labels[idx],
            seed=data.seed,
            preprocessing=list(data.preprocessing),
        )

    return take(train_idx), take(test_idx)


# ---------------------------------------------------------------------------
# CSV ingestion and persistence.


def load_csv(path, has_labels: bool = False) -> Dataset:
    """Read a rectangular numeric CSV; the last column is the label if any.

    A non-numeric first row is treated as a header. Labels must take
    exactly two distinct values and are mapped (smaller, larger) ->
    (-1, +1).
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise ValueError(f"{path}: empty file")

    def parse_row(row, row_idx):
        out = []
        for col_idx, cell in enumerate(row):
            try:
                out.append(float(cell))
            except ValueError:
                raise ValueError(
                    f"{path}: non-numeric cell at row {row_idx}, column {col_idx}: "
                    f"{cell!r}"
                ) from None
        return out

    start = 0
    try:
        first = parse_row(rows[0], 0)
    except ValueError:
        start = 1  # header row
        first = None
    width = len(rows[start]) if first is None else len(first)
    parsed = [] if first is None else [first]
    for i in range(start + (0 if first is None else 1), len(rows)):
        if len(rows[i]) != width:
            raise ValueError(
                f"{path}: ragged row {i}: {len(rows[i])} cells, expected {width}"
            )
        parsed.append(parse_row(rows[i], i))
    matrix = np.asarray(parsed, dtype=np.float64)
    if matrix.size == 0:
        raise ValueError(f"{path}: no data rows")

    if not has_labels:
        return Dataset(points=matrix, preprocessing=["loaded-csv"])
    if matrix.shape[1] < 2:
        raise ValueError(f"{path}: need at least one feature column plus labels")
    raw = matrix[:, -1]
    classes = np.unique(raw)
    if classes.size != 2:
        raise ValueError(
            f"{path}: need exactly 2 label classes, found {classes.size}"
        )
    labels = np.where(raw == classes[0], -1, 1)
    return Dataset(points=matrix[:, :-1], labels=labels, preprocessing=["loaded-csv"])


def save_csv(data: Dataset, path, spec: GenNormSpec | None = None) -> Path:
    """Write `f0,...,f{d-1}[,label]` CSV plus a JSON metadata sidecar."""
    path = Path(path)
    header = [f"f{j}" for j in range(data.dim)]
    if data.labels is not None:
        header.append("label")
    lines = [",".join(header)]
    for i in range(data.n_points):
        cells = [repr(float(v)) for v in data.points[i]]
        if data.labels is not None:
            cells.append(str(int(data.labels[i])))
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    meta = {
        "kind": "dataset",
        "seed": data.seed,
        "spec": spec.to_dict() if spec is not None else None,
        "preprocessing": data.preprocessing,
        "rng": RNG_SCHEME,
        "n_points": data.n_points,
        "dim": data.dim,
    }
    path.with_suffix(".meta.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return path
