"""Quantum feature maps: embed a real data vector into an n-qubit state.

Four families, one qubit per feature, bandwidth ``lam`` scaling the data
inside the circuit:

- ``iqp``: two rounds of (Hadamard layer, diagonal phase layer) with
  single-Z and pairwise-ZZ data terms.
- ``classical_iqp``: one round of the same; its fidelity kernel admits a
  polynomial-time closed form, making it the classical counterpart used
  in the geometric-difference comparisons.
- ``heisenberg``: ``n_layers`` repetitions of per-site evolutions under
  nearest-neighbour spin exchange plus a data-dependent local Z field.
- ``product_z``: single-qubit Z phases on |0>; diagonal on |0>, hence a
  constant (all-ones) fidelity kernel. Kept as the classical counterpart
  of the Heisenberg map.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .statevec import (
    apply_diagonal_phase,
    apply_hadamard_all,
    apply_two_qubit_unitary,
    hermitian_expm_4x4,
    init_zero_state,
)

FAMILIES = ("iqp", "classical_iqp", "heisenberg", "product_z")
BOUNDARIES = ("open", "periodic")

_SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
_SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)
_I2 = np.eye(2, dtype=np.complex128)

# Spin-1/2 convention S = sigma/2, so S.S = (XX + YY + ZZ)/4. Using the
# bare Pauli exchange instead is a one-line change here.
SPIN_EXCHANGE_4X4 = 0.25 * (
    np.kron(_SX, _SX) + np.kron(_SY, _SY) + np.kron(_SZ, _SZ)
)
# Local field sigma^z on the first qubit of the pair (the "j" site).
FIELD_Z_FIRST_4X4 = np.kron(_SZ, _I2)


@dataclass(frozen=True)
class FeatureMapSpec:
    """Family tag plus hyperparameters selecting one embedding circuit.

    ``alpha`` only affects the iqp/classical_iqp pair term; ``n_layers``
    and ``boundary`` only affect heisenberg. Irrelevant fields are
    ignored, not rejected.
    """

    family: str
    lam: float
    alpha: float = 2.0
    n_layers: int = 4
    boundary: str = "open"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(
                f"unknown family {self.family!r}; expected one of {FAMILIES}"
            )
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.n_layers < 1:
            raise ValueError(f"n_layers must be >= 1, got {self.n_layers}")
        if self.boundary not in BOUNDARIES:
            raise ValueError(
                f"unknown boundary {self.boundary!r}; expected one of {BOUNDARIES}"
            )

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "lambda": self.lam,
            "alpha": self.alpha,
            "n_layers": self.n_layers,
            "boundary": self.boundary,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureMapSpec":
        return cls(
            family=d["family"],
            lam=d["lambda"],
            alpha=d.get("alpha", 2.0),
            n_layers=d.get("n_layers", 4),
            boundary=d.get("boundary", "open"),
        )


def _as_data_vector(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size < 1:
        raise ValueError(f"data vector must be 1-D and non-empty, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("data vector contains non-finite entries")
    return x


def _signed_sums(x: np.ndarray) -> np.ndarray:
    """t[b] = sum_j x_j * s_j(b) with s_j(b) = +1 if bit j of b is 0 else -1.

    Built by doubling: appending qubit j extends the index by one new most
    significant bit, whose 0-branch adds x_j and 1-branch subtracts it.
    """
    t = np.zeros(1)
    for xj in x:
        t = np.concatenate([t + xj, t - xj])
    return t


def iqp_phases(x, lam: float, alpha: float) -> np.ndarray:
    """Diagonal phases of the IQP-style data unitary, one per basis state.

    phase(b) = sum_j lam*x_j*s_j(b) + sum_{j<k} lam**alpha*x_j*x_k*s_j(b)*s_k(b).

    The pair sum is evaluated through the identity
    sum_{j<k} x_j x_k s_j s_k = ((sum_j x_j s_j)^2 - sum_j x_j^2) / 2,
    which keeps the cost at O(d * 2**d) instead of O(d**2 * 2**d).
    """
    x = _as_data_vector(x)
    t = _signed_sums(x)
    return lam * t + (lam**alpha) * 0.5 * (t * t - float(np.dot(x, x)))


def _product_z_phases(x: np.ndarray, lam: float) -> np.ndarray:
    return lam * _signed_sums(x)


def _heisenberg_pair_unitaries(x: np.ndarray, spec: FeatureMapSpec):
    """One evolution factor per site, ascending j, as (kind, payload) ops."""
    d = x.size
    ops = []
    for j in range(d - 1):
        h4 = SPIN_EXCHANGE_4X4 + spec.lam * x[j] * FIELD_Z_FIRST_4X4
        ops.append(("pair", (hermitian_expm_4x4(h4), j, j + 1)))
    if spec.boundary == "periodic":
        h4 = SPIN_EXCHANGE_4X4 + spec.lam * x[d - 1] * FIELD_Z_FIRST_4X4
        ops.append(("pair", (hermitian_expm_4x4(h4), d - 1, 0)))
    else:
        # Open chain: the last site has no right neighbour, so its factor
        # reduces to the local field exp(-i lam x_{d-1} sigma^z_{d-1}).
        b = np.arange(1 << d)
        s_last = 1.0 - 2.0 * ((b >> (d - 1)) & 1)
        ops.append(("diag", spec.lam * x[d - 1] * s_last))
    return ops


def embed(spec: FeatureMapSpec, x) -> np.ndarray:
    """Embed a data vector as a statevector under the chosen feature map.

    The qubit count equals the data dimension. Heisenberg requires d >= 2
    (it is built from nearest-neighbour pairs).
    """
    x = _as_data_vector(x)
    d = x.size
    if spec.family == "iqp":
        phases = iqp_phases(x, spec.lam, spec.alpha)
        state = apply_hadamard_all(init_zero_state(d))
        state = apply_diagonal_phase(state, phases)
        state = apply_hadamard_all(state)
        return apply_diagonal_phase(state, phases)
    if spec.family == "classical_iqp":
        phases = iqp_phases(x, spec.lam, spec.alpha)
        state = apply_hadamard_all(init_zero_state(d))
        return apply_diagonal_phase(state, phases)
    if spec.family == "product_z":
        state = init_zero_state(d)
        return apply_diagonal_phase(state, _product_z_phases(x, spec.lam))
    if spec.family == "heisenberg":
        if d < 2:
            raise ValueError("heisenberg feature map needs at least 2 qubits")
        ops = _heisenberg_pair_unitaries(x, spec)
        state = init_zero_state(d)
        for _ in range(spec.n_layers):
            for kind, payload in ops:
                if kind == "pair":
                    gate, q1, q2 = payload
                    state = apply_two_qubit_unitary(state, gate, q1, q2)
                else:
                    state = apply_diagonal_phase(state, payload)
        return state
    raise ValueError(f"unknown family {spec.family!r}")  # pragma: no cover


def embed_batch(spec: FeatureMapSpec, points: Iterable) -> np.ndarray:
    """Embed each row of a (P, d) matrix; returns a (P, 2**d) complex matrix."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise ValueError(f"points must be a 2-D matrix, got shape {pts.shape}")
    out = np.empty((pts.shape[0], 1 << pts.shape[1]), dtype=np.complex128)
    for i in range(pts.shape[0]):
        out[i] = embed(spec, pts[i])
    return out
