"""Declarative experiment configs and end-to-end pipelines.

Each experiment kind reproduces one of the scaling analyses at a
configurable scale, writing plot-ready long-format CSVs plus a manifest
(config, seeds, content hashes) that suffices to reproduce the run.
Rerunning the same config is byte-identical: every random draw flows
from the config seed through named substreams, so neither thread count
nor scheduling order can change results.

Configs are JSON dicts with recorded defaults for every field; CLI flags
override config fields and the effective merged config lands in the
manifest.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from threading import Lock

import numpy as np

from . import __version__
from .data import (
    Dataset,
    GenNormSpec,
    load_csv,
    pca_reduce,
    sample_dataset,
    standardize_normalize,
    train_test_split,
)
from .feature_maps import FeatureMapSpec
from .kernel import build_kernel, normalized_spectrum
from .rng import RNG_SCHEME, substream
from .spectral import geometric_difference
from .tuning import (
    DEFAULT_C_GRID,
    DEFAULT_LAMBDA_GRID,
    TuneCurve,
    best_testscore_search,
    gamma_max_curve,
    lambda_for_target_gamma,
    min_gd_over_classical,
    save_curve,
    save_gd_results,
)

EXPERIMENT_KINDS = (
    "spectrum_curve",
    "fixed_gamma_gd",
    "gd_vs_n",
    "real_data_pipeline",
    "correlated_gd",
)

OUTPUT_ROOT_ENV = "QKGEOM_OUTPUT_ROOT"

# Bandwidth grid used to tune gamma_max to a target: extends past the
# classical-comparison grid so small targets stay reachable at few qubits.
DEFAULT_TUNE_LAMBDA_GRID = tuple(np.logspace(-1.5, 1.1, 27))


class ValidationError(ValueError):
    """Bad config or CLI input; reported before any compute starts."""


def _float_list(value) -> tuple[float, ...]:
    if isinstance(value, dict):
        return tuple(
            np.logspace(value["log10_start"], value["log10_stop"], int(value["num"]))
        )
    return tuple(float(v) for v in value)


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: kind, feature-map family, data source, and grids."""

    kind: str
    family: str = "iqp"
    classical_family: str = "classical_iqp"
    alpha: float = 2.0
    n_layers: int = 4
    boundary: str = "open"
    beta: float = 1.0
    r_values: tuple[float, ...] = (0.0, 0.33, 0.66, 0.9, 0.95)
    n_points: int = 200
    n_points_list: tuple[int, ...] = (100, 200, 300, 400)
    csv_path: str | None = None
    qubits: tuple[int, ...] = (4, 6, 8, 10, 12)
    lambda_grid: tuple[float, ...] = tuple(DEFAULT_LAMBDA_GRID)
    tune_lambda_grid: tuple[float, ...] = DEFAULT_TUNE_LAMBDA_GRID
    c_grid: tuple[float, ...] = tuple(DEFAULT_C_GRID)
    gamma_targets: tuple[float, ...] = (0.3,)
    seed: int = 0
    replicates: int = 3
    n_train: int = 700
    n_test: int = 200
    output_dir: str | None = None
    threads: int | None = None

    # Execution-only fields: they cannot affect numerical output, so they
    # stay out of the run identity hash.
    EXECUTION_FIELDS = ("output_dir", "threads")

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValidationError(f"unknown config field(s): {sorted(unknown)}")
        if "kind" not in raw:
            raise ValidationError("config is missing required field 'kind'")
        kwargs = dict(raw)
        for grid_key in ("lambda_grid", "tune_lambda_grid", "c_grid"):
            if grid_key in kwargs:
                kwargs[grid_key] = _float_list(kwargs[grid_key])
        for tuple_key in ("r_values", "gamma_targets"):
            if tuple_key in kwargs:
                kwargs[tuple_key] = tuple(float(v) for v in kwargs[tuple_key])
        for int_tuple_key in ("qubits", "n_points_list"):
            if int_tuple_key in kwargs:
                kwargs[int_tuple_key] = tuple(int(v) for v in kwargs[int_tuple_key])
        return cls(**kwargs)

    def validate(self) -> None:
        if self.kind not in EXPERIMENT_KINDS:
            raise ValidationError(
                f"unknown experiment kind {self.kind!r}; expected one of "
                f"{EXPERIMENT_KINDS}"
            )
        if not self.qubits:
            raise ValidationError("qubit list must not be empty")
        if min(self.qubits) < 1:
            raise ValidationError("qubit counts must be >= 1")
        if self.family == "heisenberg" and min(self.qubits) < 2:
            raise ValidationError("heisenberg feature map needs >= 2 qubits")
        for name in ("lambda_grid", "tune_lambda_grid", "c_grid"):
            grid = getattr(self, name)
            if not grid or any(v <= 0 for v in grid):
                raise ValidationError(f"{name} must be non-empty and positive")
        if any(not 0 < t <= 1 for t in self.gamma_targets):
            raise ValidationError("gamma targets must lie in (0, 1]")
        if self.replicates < 1:
            raise ValidationError("replicates must be >= 1")
        if self.n_points < 2:
            raise ValidationError("n_points must be >= 2")
        if self.kind == "gd_vs_n":
            if len(self.qubits) != 1:
                raise ValidationError("gd_vs_n uses exactly one qubit count")
            if not self.n_points_list:
                raise ValidationError("gd_vs_n needs a non-empty n_points_list")
        if self.kind == "correlated_gd" and not self.r_values:
            raise ValidationError("correlated_gd needs a non-empty r_values list")
        if self.kind == "real_data_pipeline":
            if not self.csv_path:
                raise ValidationError("real_data_pipeline needs csv_path")
            if not Path(self.csv_path).exists():
                raise ValidationError(f"csv_path does not exist: {self.csv_path}")
        try:
            # Family/boundary validity is delegated to the spec type.
            FeatureMapSpec(self.family, 1.0, self.alpha, self.n_layers, self.boundary)
            FeatureMapSpec(self.classical_family, 1.0, self.alpha, self.n_layers, self.boundary)
        except ValueError as exc:
            raise ValidationError(str(exc)) from None

    def canonical_json(self) -> str:
        science = {
            k: v for k, v in self.to_dict().items() if k not in self.EXECUTION_FIELDS
        }
        return json.dumps(science, sort_keys=True, separators=(",", ":"))

    def run_id(self) -> str:
        digest = hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()
        return f"{self.kind}-{digest[:8]}"


def load_config(path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise ValidationError(f"{path}: config must be a JSON object")
    return ExperimentConfig.from_dict(raw)


def apply_overrides(config: ExperimentConfig, overrides: dict) -> ExperimentConfig:
    if not overrides:
        return config
    merged = config.to_dict()
    for key, value in overrides.items():
        if key not in merged:
            raise ValidationError(f"unknown config field {key!r} in override")
        merged[key] = value
    return ExperimentConfig.from_dict(merged)


# ---------------------------------------------------------------------------
# CSV assembly with per-cell partial flushing.


class _CsvSink:
    """Collects cell rows; flushes each completed cell to a .partial file
    so an interrupted run keeps its finished work, then writes the final
    CSV in deterministic cell order."""

    def __init__(self, path: Path, header: str):
        self.path = path
        self.header = header
        self.partial = path.with_name(path.name + ".partial")
        self.rows: dict = {}
        self._lock = Lock()
        self.partial.write_text(header + "\n", encoding="utf-8")

    def add(self, cell_key, lines: list[str]) -> None:
        with self._lock:
            self.rows[cell_key] = lines
            with self.partial.open("a", encoding="utf-8") as fh:
                fh.write("\n".join(lines) + "\n")

    def finalize(self) -> Path:
        lines = [self.header]
        for key in sorted(self.rows):
            lines.extend(self.rows[key])
        self.path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        self.partial.unlink(missing_ok=True)
        return self.path


def _pool_map(fn, cells, threads: int | None):
    workers = threads or os.cpu_count() or 1
    if workers <= 1 or len(cells) <= 1:
        for cell in cells:
            fn(cell)
        return
    with ThreadPoolExecutor(max_workers=min(workers, len(cells))) as pool:
        list(pool.map(fn, cells))


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _row(*values) -> str:
    return ",".join(_fmt(v) for v in values)


# ---------------------------------------------------------------------------
# Experiment bodies. Each returns a list of output file paths.


def _merge_curves(parts: list[TuneCurve]) -> TuneCurve:
    merged = replace(parts[0], points=[p for part in parts for p in part.points])
    return merged


def _build_curve(config: ExperimentConfig, qubits, n_points: int, grid) -> TuneCurve:
    data_spec = GenNormSpec(beta=config.beta)
    parts: list[TuneCurve] = []

    def one(n):
        parts.append(
            gamma_max_curve(
                config.family,
                config.alpha,
                data_spec,
                n_points,
                [n],
                grid,
                replicates=config.replicates,
                seed=config.seed,
                n_layers=config.n_layers,
                boundary=config.boundary,
            )
        )

    # Curves per qubit count are independent; merge preserves determinism
    # because points are keyed by (n, lambda), not by completion order.
    _pool_map(one, list(qubits), config.threads)
    parts.sort(key=lambda c: c.points[0].n_qubits)
    return _merge_curves(parts)


def _run_spectrum_curve(config: ExperimentConfig, out: Path) -> list[Path]:
    curve = _build_curve(config, config.qubits, config.n_points, config.lambda_grid)
    return [save_curve(curve, out / "curve.csv")]


def _gd_for_cell(config, curve, data_spec, target, n, cfg_tag):
    lam = lambda_for_target_gamma(curve, n, target, verify=False)
    data = sample_dataset(
        data_spec, curve.n_points, n, substream(config.seed, f"{cfg_tag}/data/t{target!r}/n{n}")
    )
    spec = FeatureMapSpec(config.family, lam, config.alpha, config.n_layers, config.boundary)
    k_quantum = build_kernel(spec, data)
    realized = normalized_spectrum(k_quantum).gamma_max
    result = min_gd_over_classical(
        k_quantum,
        config.classical_family,
        config.lambda_grid,
        data,
        alpha=config.alpha,
        n_layers=config.n_layers,
        boundary=config.boundary,
    )
    return lam, realized, result


def _run_fixed_gamma_gd(config: ExperimentConfig, out: Path) -> list[Path]:
    curve = _build_curve(config, config.qubits, config.n_points, config.tune_lambda_grid)
    outputs = [save_curve(curve, out / "curve.csv")]
    header = "gamma_target,n_qubits,realized_gamma,quantum_lambda,classical_lambda_star,gd_min,gd_matched,sqrt_N"
    sink = _CsvSink(out / "gd.csv", header)
    per_target: dict[float, dict[int, object]] = {t: {} for t in config.gamma_targets}

    def one(cell):
        target, n = cell
        lam, realized, res = _gd_for_cell(config, curve, GenNormSpec(beta=config.beta), target, n, "fixed-gamma-gd")
        per_target[target][n] = res
        sink.add(
            cell,
            [_row(target, n, realized, res.quantum_lambda, res.classical_lambda_star,
                  res.gd_min, res.gd_at_matched_lambda, res.sqrt_n)],
        )

    cells = [(t, n) for t in config.gamma_targets for n in config.qubits]
    _pool_map(one, cells, config.threads)
    outputs.append(sink.finalize())
    for target in config.gamma_targets:
        results = [per_target[target][n] for n in config.qubits]
        outputs.append(save_gd_results(results, out / f"gd_target{target!r}.csv"))
    return outputs


def _run_gd_vs_n(config: ExperimentConfig, out: Path) -> list[Path]:
    n_qubits = config.qubits[0]
    target = config.gamma_targets[0]
    header = "n_points,n_qubits,gamma_target,realized_gamma,quantum_lambda,classical_lambda_star,gd_min,gd_matched,sqrt_N"
    sink = _CsvSink(out / "gd_vs_n.csv", header)

    def one(n_points):
        curve = _build_curve(config, [n_qubits], n_points, config.tune_lambda_grid)
        lam, realized, res = _gd_for_cell(
            config, curve, GenNormSpec(beta=config.beta), target, n_qubits, f"gd-vs-n/N{n_points}"
        )
        sink.add(
            n_points,
            [_row(n_points, n_qubits, target, realized, res.quantum_lambda,
                  res.classical_lambda_star, res.gd_min, res.gd_at_matched_lambda, res.sqrt_n)],
        )

    _pool_map(one, list(config.n_points_list), config.threads)
    return [sink.finalize()]


def _run_correlated_gd(config: ExperimentConfig, out: Path) -> list[Path]:
    header = "r,gamma_target,n_qubits,realized_gamma,quantum_lambda,classical_lambda_star,gd_min,gd_matched,sqrt_N"
    sink = _CsvSink(out / "gd_correlated.csv", header)

    def one(r):
        data_spec = GenNormSpec(beta=config.beta, r=r)
        curve = gamma_max_curve(
            config.family,
            config.alpha,
            data_spec,
            config.n_points,
            config.qubits,
            config.tune_lambda_grid,
            replicates=config.replicates,
            seed=config.seed,
            n_layers=config.n_layers,
            boundary=config.boundary,
        )
        lines = []
        for target in config.gamma_targets:
            for n in config.qubits:
                lam, realized, res = _gd_for_cell(
                    config, curve, data_spec, target, n, f"correlated-gd/r{r!r}"
                )
                lines.append(
                    _row(r, target, n, realized, res.quantum_lambda,
                         res.classical_lambda_star, res.gd_min,
                         res.gd_at_matched_lambda, res.sqrt_n)
                )
        sink.add(r, lines)

    _pool_map(one, list(config.r_values), config.threads)
    return [sink.finalize()]


def _run_real_data_pipeline(config: ExperimentConfig, out: Path) -> list[Path]:
    full = load_csv(config.csv_path, has_labels=True)
    if config.n_train + config.n_test > full.n_points:
        raise ValidationError(
            f"n_train + n_test = {config.n_train + config.n_test} exceeds the "
            f"{full.n_points} rows of {config.csv_path}"
        )
    header = (
        "n_qubits,quantum_lambda,quantum_C,quantum_test_score,quantum_gamma_max,"
        "classical_lambda,classical_C,classical_test_score,classical_gamma_max,"
        "gd_best_pair,gd_min,sqrt_N"
    )
    sink = _CsvSink(out / "real_data.csv", header)

    def one(n):
        reduced = pca_reduce(full.points, n) if full.dim > n else full.points
        data = Dataset(points=standardize_normalize(reduced), labels=full.labels)
        searches = {}
        for family in (config.family, config.classical_family):
            searches[family] = best_testscore_search(
                family,
                data,
                config.lambda_grid,
                config.c_grid,
                config.n_train,
                config.n_test,
                seed=config.seed,
                alpha=config.alpha,
                n_layers=config.n_layers,
                boundary=config.boundary,
            )
        q, c = searches[config.family], searches[config.classical_family]
        train_set, _ = train_test_split(
            data, config.n_train, config.n_test, substream(config.seed, "testscore-split")
        )
        k_q = build_kernel(
            FeatureMapSpec(config.family, q.lam, config.alpha, config.n_layers, config.boundary),
            train_set,
        )
        k_c = build_kernel(
            FeatureMapSpec(config.classical_family, c.lam, config.alpha, config.n_layers, config.boundary),
            train_set,
        )
        gd_best = geometric_difference(k_c, k_q)
        res = min_gd_over_classical(
            k_q,
            config.classical_family,
            config.lambda_grid,
            train_set,
            alpha=config.alpha,
            n_layers=config.n_layers,
            boundary=config.boundary,
        )
        sink.add(
            n,
            [_row(n, q.lam, q.C, q.test_score, normalized_spectrum(k_q).gamma_max,
                  c.lam, c.C, c.test_score, normalized_spectrum(k_c).gamma_max,
                  gd_best, res.gd_min, res.sqrt_n)],
        )

    _pool_map(one, list(config.qubits), config.threads)
    return [sink.finalize()]


_RUNNERS = {
    "spectrum_curve": _run_spectrum_curve,
    "fixed_gamma_gd": _run_fixed_gamma_gd,
    "gd_vs_n": _run_gd_vs_n,
    "correlated_gd": _run_correlated_gd,
    "real_data_pipeline": _run_real_data_pipeline,
}


def output_root(config: ExperimentConfig) -> Path:
    if config.output_dir:
        return Path(config.output_dir)
    root = os.environ.get(OUTPUT_ROOT_ENV, "runs")
    return Path(root) / config.run_id()


def run_experiment(config: ExperimentConfig) -> dict:
    """Validate, execute, and write the result bundle; returns the manifest."""
    config.validate()
    out = output_root(config)
    out.mkdir(parents=True, exist_ok=True)
    started = time.time()
    outputs = _RUNNERS[config.kind](config, out)
    manifest = {
        "manifest_schema": 1,
        "package_version": __version__,
        "rng": RNG_SCHEME,
        "kind": config.kind,
        "run_id": config.run_id(),
        "config": config.to_dict(),
        "config_sha256": hashlib.sha256(config.canonical_json().encode()).hexdigest(),
        "seed": config.seed,
        "wall_time_s": round(time.time() - started, 3),
        "outputs": [
            {
                "name": p.name,
                "sha256": hashlib.sha256(p.read_bytes()).hexdigest(),
                "bytes": p.stat().st_size,
            }
            for p in outputs
        ],
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return manifest
