"""Fidelity kernel matrices and their normalized spectra.

K_ij = |<psi(x_i)|psi(x_j)>|^2 for a feature map and dataset. All P
embedded states are cached once (P * 2**d complex numbers, checked
against a memory ceiling up front), the Gram matrix is one matrix
product, and the result is mirrored from its upper triangle so symmetry
and the unit diagonal hold exactly.

The spectrum is always reported for K/P, so eigenvalues sum to 1 and the
top eigenvalue gamma_max lives in [1/P, 1]: 1 for the rank-one all-ones
kernel, 1/P for a completely flat spectrum.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .feature_maps import FeatureMapSpec, embed_batch

# Cached embeddings for P=500 at d=20 are ~8.4 GB of complex128; that is
# the practical ceiling of the dense pipeline.
DEFAULT_STATE_CACHE_BYTES = 16 * 1024**3

EXTERNAL_SPEC = "external"


@dataclass
class KernelMatrix:
    """Symmetric fidelity matrix plus the spec that produced it."""

    entries: np.ndarray
    spec: FeatureMapSpec | str
    n_qubits: int

    @property
    def n_points(self) -> int:
        return self.entries.shape[0]


@dataclass
class Spectrum:
    """Descending eigenvalues of K/P; gamma_max is the first."""

    values: np.ndarray
    vectors: np.ndarray | None = field(default=None, repr=False)

    @property
    def gamma_max(self) -> float:
        return float(self.values[0])


def _points_of(data) -> np.ndarray:
    pts = np.asarray(getattr(data, "points", data), dtype=np.float64)
    if pts.ndim != 2:
        raise ValueError(f"expected a (P, d) matrix, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("data contains non-finite entries")
    return pts


def _check_cache_size(n_points: int, dim: int, max_bytes: int) -> None:
    need = n_points * (1 << dim) * 16
    if need > max_bytes:
        raise ValueError(
            f"state cache would need {need / 1024**3:.1f} GiB "
            f"(P={n_points}, d={dim}), above the ceiling "
            f"{max_bytes / 1024**3:.1f} GiB"
        )


def _fidelity_gram(states_a: np.ndarray, states_b: np.ndarray) -> np.ndarray:
    return np.abs(states_a @ states_b.conj().T) ** 2


def build_kernel(
    spec: FeatureMapSpec, data, max_bytes: int = DEFAULT_STATE_CACHE_BYTES
) -> KernelMatrix:
    """Fidelity kernel of a dataset under one feature map.

    Each unordered pair is evaluated once; the diagonal is set to 1
    exactly. Entries are left unclamped so numerical noise stays visible
    to the PSD invariant checks (clamping to [0, 1] happens only when a
    kernel is persisted).
    """
    pts = _points_of(data)
    n_points, dim = pts.shape
    if n_points < 2:
        raise ValueError(f"need at least 2 data points, got {n_points}")
    _check_cache_size(n_points, dim, max_bytes)
    states = embed_batch(spec, pts)
    upper = np.triu(_fidelity_gram(states, states), k=1)
    entries = upper + upper.T
    np.fill_diagonal(entries, 1.0)
    return KernelMatrix(entries=entries, spec=spec, n_qubits=dim)


def cross_kernel(
    spec: FeatureMapSpec, train, test, max_bytes: int = DEFAULT_STATE_CACHE_BYTES
) -> np.ndarray:
    """(P_test, P_train) fidelities between held-out and training points."""
    train_pts = _points_of(train)
    test_pts = _points_of(test)
    if train_pts.shape[1] != test_pts.shape[1]:
        raise ValueError(
            f"dimension mismatch: train d={train_pts.shape[1]}, "
            f"test d={test_pts.shape[1]}"
        )
    _check_cache_size(train_pts.shape[0] + test_pts.shape[0], train_pts.shape[1], max_bytes)
    return _fidelity_gram(embed_batch(spec, test_pts), embed_batch(spec, train_pts))


def normalized_spectrum(kernel, with_vectors: bool = False) -> Spectrum:
    """Descending eigenvalues of K/P.

    Eigensolver failures (np.linalg.LinAlgError) propagate; they are
    never clipped into a plausible-looking spectrum.
    """
    k = np.asarray(getattr(kernel, "entries", kernel), dtype=np.float64)
    if k.ndim != 2 or k.shape[0] != k.shape[1]:
        raise ValueError(f"kernel must be square, got shape {k.shape}")
    scaled = k / k.shape[0]
    if with_vectors:
        values, vectors = np.linalg.eigh(scaled)
        return Spectrum(values=values[::-1].copy(), vectors=vectors[:, ::-1].copy())
    return Spectrum(values=np.linalg.eigvalsh(scaled)[::-1].copy())


# ---------------------------------------------------------------------------
# Persistence: dense CSV (row-major, no header) + JSON metadata sidecar.


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".meta.json")


def _format_rows(matrix: np.ndarray) -> str:
    lines = [",".join(repr(float(v)) for v in row) for row in matrix]
    return "\n".join(lines) + "\n"


def save_kernel(kernel: KernelMatrix, path, metadata: dict | None = None) -> Path:
    """Write the kernel as dense CSV; entries clamped to [0, 1] on disk only."""
    path = Path(path)
    clamped = np.clip(kernel.entries, 0.0, 1.0)
    path.write_text(_format_rows(clamped), encoding="utf-8")
    spec = kernel.spec
    meta = {
        "kind": "kernel",
        "spec": spec.to_dict() if isinstance(spec, FeatureMapSpec) else EXTERNAL_SPEC,
        "n_qubits": kernel.n_qubits,
        "n_points": kernel.n_points,
    }
    if metadata:
        meta.update(metadata)
    sidecar_path(path).write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return path


def load_kernel(path) -> KernelMatrix:
    """Read a dense kernel CSV; spec recovered from the sidecar if present."""
    path = Path(path)
    entries = np.loadtxt(path, delimiter=",", ndmin=2)
    if entries.shape[0] != entries.shape[1]:
        raise ValueError(
            f"{path}: kernel file must be square, got shape {entries.shape}"
        )
    spec: FeatureMapSpec | str = EXTERNAL_SPEC
    n_qubits = 0
    meta_file = sidecar_path(path)
    if meta_file.exists():
        meta = json.loads(meta_file.read_text(encoding="utf-8"))
        if isinstance(meta.get("spec"), dict):
            spec = FeatureMapSpec.from_dict(meta["spec"])
        n_qubits = int(meta.get("n_qubits", 0))
    return KernelMatrix(entries=entries, spec=spec, n_qubits=n_qubits)
