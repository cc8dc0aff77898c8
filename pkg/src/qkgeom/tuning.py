"""Hyperparameter protocols for the kernel-scaling experiments.

The flow mirrors the analysis pipeline: sample gamma_max over a log grid
of the bandwidth lam (``gamma_max_curve``), invert the curve to hold
gamma_max at a target while qubits grow (``lambda_for_target_gamma``),
then grid-search the classical kernel's bandwidth to minimize the
geometric difference against the tuned quantum kernel
(``min_gd_over_classical``). For labeled data, ``best_testscore_search``
tunes (lam, C) against held-out accuracy instead.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import Dataset, GenNormSpec, sample_dataset, train_test_split
from .feature_maps import FeatureMapSpec
from .kernel import KernelMatrix, build_kernel, cross_kernel, normalized_spectrum
from .rng import substream
from .spectral import PsdFunctionConfig, geometric_difference
from . import svm

DEFAULT_LAMBDA_GRID = tuple(np.logspace(-1.5, 0.5, 17))
DEFAULT_C_GRID = tuple(np.logspace(-2.0, 3.0, 11))
GAMMA_TARGET_PRESETS = (0.01, 0.05, 0.2, 0.3, 0.4, 0.5)

# Relative tolerance on the realized gamma_max after tuning.
GAMMA_REL_TOL = 0.20


@dataclass(frozen=True)
class TuneCurvePoint:
    n_qubits: int
    lam: float
    gamma_max_mean: float
    gamma_max_std: float
    n_replicates: int


@dataclass
class TuneCurve:
    """Sampled (n_qubits, lam) -> gamma_max map, plus build provenance.

    Provenance (family, alpha, data spec, seed, ...) allows a freshly
    tuned lam to be re-validated on a new kernel; it is stored in the CSV
    sidecar, so curves loaded from bare CSVs skip validation.
    """

    points: list[TuneCurvePoint]
    family: str | None = None
    alpha: float | None = None
    n_layers: int = 4
    boundary: str = "open"
    data_spec: GenNormSpec | None = None
    n_points: int | None = None
    seed: int | None = None

    def qubit_counts(self) -> list[int]:
        return sorted({p.n_qubits for p in self.points})

    def at(self, n_qubits: int) -> list[TuneCurvePoint]:
        pts = sorted(
            (p for p in self.points if p.n_qubits == n_qubits), key=lambda p: p.lam
        )
        if not pts:
            raise ValueError(f"curve has no samples at n_qubits={n_qubits}")
        return pts

    @property
    def has_provenance(self) -> bool:
        return (
            self.family is not None
            and self.alpha is not None
            and self.data_spec is not None
            and self.n_points is not None
            and self.seed is not None
        )


@dataclass(frozen=True)
class GdResult:
    """Minimum geometric difference over the classical bandwidth grid."""

    n_qubits: int
    quantum_lambda: float
    classical_lambda_star: float
    gd_min: float
    gd_at_matched_lambda: float
    sqrt_n: float


@dataclass
class SearchResult:
    """Winner of the exhaustive (lam, C) test-score grid."""

    lam: float
    C: float
    test_score: float
    model: svm.SvmModel
    table: list[tuple[float, float, float]] = field(default_factory=list)


def _validate_lambda_grid(grid, min_points: int = 5) -> np.ndarray:
    lams = np.asarray(list(grid), dtype=np.float64)
    if lams.size < min_points:
        raise ValueError(f"lambda grid needs >= {min_points} points, got {lams.size}")
    if np.any(lams <= 0) or (lams.size > 1 and np.any(np.diff(lams) <= 0)):
        raise ValueError("lambda grid must be positive and strictly increasing")
    return lams


def _curve_spec(curve: TuneCurve, lam: float) -> FeatureMapSpec:
    return FeatureMapSpec(
        family=curve.family,
        lam=float(lam),
        alpha=curve.alpha,
        n_layers=curve.n_layers,
        boundary=curve.boundary,
    )


def gamma_max_curve(
    family: str,
    alpha: float,
    data_spec: GenNormSpec,
    n_points: int,
    qubits,
    lambda_grid=DEFAULT_LAMBDA_GRID,
    replicates: int = 3,
    seed: int = 0,
    n_layers: int = 4,
    boundary: str = "open",
) -> TuneCurve:
    """Sample mean/std of gamma_max over (n_qubits, lam) with fresh data per replicate."""
    lams = _validate_lambda_grid(lambda_grid)
    if replicates < 1:
        raise ValueError(f"replicates must be >= 1, got {replicates}")
    points = []
    for n in qubits:
        gammas = np.empty((replicates, lams.size))
        for rep in range(replicates):
            data = sample_dataset(
                data_spec, n_points, n, substream(seed, f"curve-data/n{n}/rep{rep}")
            )
            for li, lam in enumerate(lams):
                spec = FeatureMapSpec(family, float(lam), alpha, n_layers, boundary)
                gammas[rep, li] = normalized_spectrum(build_kernel(spec, data)).gamma_max
        for li, lam in enumerate(lams):
            points.append(
                TuneCurvePoint(
                    n_qubits=int(n),
                    lam=float(lam),
                    gamma_max_mean=float(gammas[:, li].mean()),
                    gamma_max_std=float(gammas[:, li].std()),
                    n_replicates=replicates,
                )
            )
    return TuneCurve(
        points=points,
        family=family,
        alpha=alpha,
        n_layers=n_layers,
        boundary=boundary,
        data_spec=data_spec,
        n_points=n_points,
        seed=seed,
    )


def realized_gamma(curve: TuneCurve, n_qubits: int, lam: float, tag: str = "realize") -> float:
    """gamma_max of a fresh kernel at (n_qubits, lam) from the curve's provenance."""
    if not curve.has_provenance:
        raise ValueError("curve carries no provenance; cannot rebuild kernels")
    data = sample_dataset(
        curve.data_spec,
        curve.n_points,
        n_qubits,
        substream(curve.seed, f"{tag}/n{n_qubits}/lam{lam!r}"),
    )
    return normalized_spectrum(build_kernel(_curve_spec(curve, lam), data)).gamma_max


def lambda_for_target_gamma(
    curve: TuneCurve, n_qubits: int, target_gamma: float, verify: bool = True
) -> float:
    """Invert the sampled gamma_max(lam) curve at one qubit count.

    Piecewise-linear interpolation in (log lam, gamma_max); if the curve
    is non-monotone at grid resolution, the smallest lam achieving the
    target wins. When the curve has provenance and ``verify`` is set, the
    realized gamma_max on a fresh kernel is checked against the 20%
    relative tolerance and a warning is attached on miss.
    """
    pts = curve.at(n_qubits)
    lams = np.array([p.lam for p in pts])
    gammas = np.array([p.gamma_max_mean for p in pts])
    lo, hi = float(gammas.min()), float(gammas.max())
    if not lo <= target_gamma <= hi:
        raise ValueError(
            f"target gamma_max {target_gamma} outside achievable range "
            f"[{lo:.4g}, {hi:.4g}] at n_qubits={n_qubits}"
        )
    # First bracketing segment in ascending lam wins (smallest-lam rule for
    # non-monotone curves); knot hits return the grid lam exactly.
    result = None
    if lams.size == 1:
        result = float(lams[0])
    for k in range(lams.size - 1):
        g0, g1 = gammas[k], gammas[k + 1]
        if (g0 - target_gamma) * (g1 - target_gamma) <= 0:
            if g0 == target_gamma or g1 == g0:
                result = float(lams[k])
            elif g1 == target_gamma:
                result = float(lams[k + 1])
            else:
                frac = (target_gamma - g0) / (g1 - g0)
                log_lam = math.log(lams[k]) + frac * (
                    math.log(lams[k + 1]) - math.log(lams[k])
                )
                result = float(math.exp(log_lam))
            break
    if result is None:  # pragma: no cover - excluded by the range check
        raise ValueError("no bracketing segment found")
    if verify and curve.has_provenance:
        realized = realized_gamma(curve, n_qubits, result, tag="tune-verify")
        if abs(realized - target_gamma) > GAMMA_REL_TOL * target_gamma:
            warnings.warn(
                f"tuned lam={result:.4g} realized gamma_max {realized:.4g}, "
                f"outside {GAMMA_REL_TOL:.0%} of target {target_gamma}",
                RuntimeWarning,
                stacklevel=2,
            )
    return result


def min_gd_over_classical(
    k_quantum: KernelMatrix,
    classical_family: str,
    lambda_grid,
    data: Dataset,
    cfg: PsdFunctionConfig | None = None,
    alpha: float = 2.0,
    n_layers: int = 4,
    boundary: str = "open",
) -> GdResult:
    """Grid-search the classical bandwidth minimizing g_d(K_classical || K_quantum).

    The classical kernel is built on the same data the quantum kernel
    used and always sits in the inverted (K1) slot. Also reports g_d at
    the classical lam equal to the quantum kernel's lam, when known.
    """
    lams = _validate_lambda_grid(lambda_grid, min_points=1)
    gds = np.empty(lams.size)
    for li, lam in enumerate(lams):
        spec = FeatureMapSpec(classical_family, float(lam), alpha, n_layers, boundary)
        gds[li] = geometric_difference(build_kernel(spec, data), k_quantum, cfg)
    best = int(np.argmin(gds))

    if isinstance(k_quantum.spec, FeatureMapSpec):
        q_lam = k_quantum.spec.lam
        spec = FeatureMapSpec(classical_family, q_lam, alpha, n_layers, boundary)
        gd_matched = geometric_difference(build_kernel(spec, data), k_quantum, cfg)
    else:
        q_lam = float("nan")
        gd_matched = float("nan")

    return GdResult(
        n_qubits=k_quantum.n_qubits,
        quantum_lambda=float(q_lam),
        classical_lambda_star=float(lams[best]),
        gd_min=float(gds[best]),
        gd_at_matched_lambda=float(gd_matched),
        sqrt_n=float(np.sqrt(k_quantum.n_points)),
    )


def best_testscore_search(
    family: str,
    data: Dataset,
    lambda_grid,
    c_grid,
    n_train: int,
    n_test: int,
    seed: int,
    alpha: float = 2.0,
    n_layers: int = 4,
    boundary: str = "open",
) -> SearchResult:
    """Exhaustive (lam, C) grid against held-out accuracy.

    Ties break toward smaller lam, then smaller C, by visiting the grid
    in ascending order and only accepting strict improvements.
    """
    if data.labels is None:
        raise ValueError("test-score search needs labeled data")
    lams = np.asarray(list(lambda_grid), dtype=np.float64)
    cs = np.asarray(list(c_grid), dtype=np.float64)
    if lams.size == 0 or cs.size == 0:
        raise ValueError("lambda and C grids must be non-empty")
    train_set, test_set = train_test_split(
        data, n_train, n_test, substream(seed, "testscore-split")
    )
    best: SearchResult | None = None
    table = []
    for lam in lams:
        spec = FeatureMapSpec(family, float(lam), alpha, n_layers, boundary)
        k_train = build_kernel(spec, train_set)
        k_cross = cross_kernel(spec, train_set, test_set)
        for c in cs:
            model = svm.train(k_train, train_set.labels, float(c), check_psd=False)
            score = svm.test_score(model, k_cross, test_set.labels)
            table.append((float(lam), float(c), score))
            if best is None or score > best.test_score:
                best = SearchResult(
                    lam=float(lam), C=float(c), test_score=score, model=model
                )
    best.table = table
    return best


# ---------------------------------------------------------------------------
# CSV persistence (schemas are part of the tool's external surface).

CURVE_CSV_HEADER = "n_qubits,lambda,gamma_max_mean,gamma_max_std,n_replicates"
GD_CSV_HEADER = "n_qubits,quantum_lambda,classical_lambda_star,gd_min,gd_matched,sqrt_N"


def save_curve(curve: TuneCurve, path) -> Path:
    path = Path(path)
    lines = [CURVE_CSV_HEADER]
    for p in curve.points:
        lines.append(
            f"{p.n_qubits},{p.lam!r},{p.gamma_max_mean!r},"
            f"{p.gamma_max_std!r},{p.n_replicates}"
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    meta = {
        "kind": "tune_curve",
        "family": curve.family,
        "alpha": curve.alpha,
        "n_layers": curve.n_layers,
        "boundary": curve.boundary,
        "data_spec": curve.data_spec.to_dict() if curve.data_spec else None,
        "n_points": curve.n_points,
        "seed": curve.seed,
    }
    path.with_suffix(".meta.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return path


def load_curve(path) -> TuneCurve:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").strip().splitlines()
    if not lines or lines[0] != CURVE_CSV_HEADER:
        raise ValueError(f"{path}: expected header {CURVE_CSV_HEADER!r}")
    points = []
    for line in lines[1:]:
        n, lam, mean, std, reps = line.split(",")
        points.append(
            TuneCurvePoint(int(n), float(lam), float(mean), float(std), int(reps))
        )
    curve = TuneCurve(points=points)
    meta_file = path.with_suffix(".meta.json")
    if meta_file.exists():
        meta = json.loads(meta_file.read_text(encoding="utf-8"))
        curve.family = meta.get("family")
        curve.alpha = meta.get("alpha")
        curve.n_layers = meta.get("n_layers", 4)
        curve.boundary = meta.get("boundary", "open")
        if meta.get("data_spec"):
            curve.data_spec = GenNormSpec.from_dict(meta["data_spec"])
        curve.n_points = meta.get("n_points")
        curve.seed = meta.get("seed")
    return curve


def save_gd_results(results, path) -> Path:
    path = Path(path)
    lines = [GD_CSV_HEADER]
    for r in results:
        lines.append(
            f"{r.n_qubits},{r.quantum_lambda!r},{r.classical_lambda_star!r},"
            f"{r.gd_min!r},{r.gd_at_matched_lambda!r},{r.sqrt_n!r}"
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
