"""Dense statevector simulation primitives.

A pure state on n qubits is a 1-D ``complex128`` array of length ``2**n``
with unit Euclidean norm. Qubit 0 is the least significant bit of the
basis index. All operations return fresh arrays and preserve the norm;
global phase is never normalized away (downstream quantities are squared
inner products, which are phase-invariant).

The supported register size tops out at ``MAX_QUBITS``: large enough for
every embedding studied here, small enough that a dense vector stays
trivial on one machine.
"""

from __future__ import annotations

import numpy as np

MAX_QUBITS = 24


def init_zero_state(n_qubits: int, max_qubits: int = MAX_QUBITS) -> np.ndarray:
    """Return |0...0> on ``n_qubits`` qubits."""
    if not 1 <= n_qubits <= max_qubits:
        raise ValueError(
            f"n_qubits={n_qubits} outside supported range [1, {max_qubits}]"
        )
    state = np.zeros(1 << n_qubits, dtype=np.complex128)
    state[0] = 1.0
    return state


def num_qubits(state: np.ndarray) -> int:
    """Qubit count of a state array; validates shape and length 2**n."""
    if state.ndim != 1:
        raise ValueError(f"state must be 1-D, got shape {state.shape}")
    n = int(state.shape[0]).bit_length() - 1
    if state.shape[0] != (1 << n) or n < 1:
        raise ValueError(f"state length {state.shape[0]} is not 2**n with n >= 1")
    return n


def apply_hadamard_all(state: np.ndarray) -> np.ndarray:
    """Apply a Hadamard to every qubit.

    One in-place butterfly pass per qubit on a copy, with a single
    2**(-n/2) rescale at the end.
    """
    n = num_qubits(state)
    out = np.array(state, dtype=np.complex128, copy=True)
    for q in range(n):
        blk = out.reshape(-1, 2, 1 << q)
        a = blk[:, 0, :].copy()
        b = blk[:, 1, :]
        blk[:, 0, :] = a + b
        blk[:, 1, :] = a - b
    out *= 2.0 ** (-0.5 * n)
    return out


def apply_diagonal_phase(state: np.ndarray, phases: np.ndarray) -> np.ndarray:
    """Multiply amplitude b by exp(-i * phases[b]).

    Exactly norm-preserving; ``phases`` is a real vector of length 2**n
    in radians.
    """
    num_qubits(state)
    phases = np.asarray(phases, dtype=np.float64)
    if phases.shape != state.shape:
        raise ValueError(
            f"phase vector length {phases.shape} does not match state {state.shape}"
        )
    return state * np.exp(-1j * phases)


def apply_two_qubit_unitary(
    state: np.ndarray, gate: np.ndarray, q1: int, q2: int
) -> np.ndarray:
    """Apply a 4x4 unitary to the (q1, q2) subsystem.

    The gate is given in the ordered two-qubit basis |q1 q2>, i.e. q1 is
    the more significant bit of the 4-dim local index (matching
    ``np.kron(A_on_q1, B_on_q2)``). Iterates over the 2**(n-2) untouched
    bit configurations and applies the 4x4 block to each.
    """
    n = num_qubits(state)
    gate = np.asarray(gate, dtype=np.complex128)
    if gate.shape != (4, 4):
        raise ValueError(f"expected a 4x4 gate, got shape {gate.shape}")
    if q1 == q2:
        raise ValueError(f"q1 and q2 must differ, both are {q1}")
    for q in (q1, q2):
        if not 0 <= q < n:
            raise ValueError(f"qubit index {q} out of range for {n} qubits")

    idx = np.arange(state.shape[0])
    base = idx[((idx >> q1) & 1 == 0) & ((idx >> q2) & 1 == 0)]
    rows = np.stack(
        [base, base | (1 << q2), base | (1 << q1), base | (1 << q1) | (1 << q2)]
    )
    out = np.array(state, dtype=np.complex128, copy=True)
    out[rows] = gate @ out[rows]
    return out


def hermitian_expm_4x4(h: np.ndarray, t: float = 1.0) -> np.ndarray:
    """exp(-i*t*H) for a 4x4 Hermitian H, via eigendecomposition.

    Unitary up to eigensolver accuracy, unlike Pade-style expm which can
    drift off the unitary group.
    """
    h = np.asarray(h, dtype=np.complex128)
    if h.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {h.shape}")
    if np.abs(h - h.conj().T).max() > 1e-12:
        raise ValueError("matrix is not Hermitian within 1e-12")
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * t * w)) @ v.conj().T


def inner_product(a: np.ndarray, b: np.ndarray) -> complex:
    """<a|b>, conjugate-linear in the first argument."""
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))
