"""Binary SVM on precomputed kernels.

Solves the usual dual

    max  sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j K_ij
    s.t. sum_i a_i y_i = 0,  0 <= a_i <= C

by SMO-style pairwise coordinate ascent with maximal-violating-pair
selection: with g_i = -y_i * grad_i of the (minimization-form) objective,
optimality is max_{i in I_up} g_i <= min_{j in I_low} g_j, and the most
violating (i, j) pair is updated analytically each step. At N <= 700 on a
precomputed kernel nothing heavier is warranted.

Stopping: max violation m - M < tol (default 1e-3), which bounds every
KKT violation of the returned model by tol. An iteration cap of 1e5 pair
updates guards non-PSD noise; hitting it raises a warning, not an error.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

DEFAULT_TOL = 1e-3
MAX_PAIR_UPDATES = 100_000
_TINY_CURVATURE = 1e-12


@dataclass
class SvmModel:
    """Dual solution: coefficients, bias, and the training labels they pair with."""

    alphas: np.ndarray
    bias: float
    support_indices: np.ndarray
    C: float
    train_labels: np.ndarray
    objective_path: list[float] | None = field(default=None, repr=False)

    def to_json(self) -> str:
        return json.dumps(
            {
                "alphas": [float(a) for a in self.alphas],
                "bias": self.bias,
                "support_indices": [int(i) for i in self.support_indices],
                "C": self.C,
                "train_labels": [int(v) for v in self.train_labels],
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "SvmModel":
        d = json.loads(text)
        return cls(
            alphas=np.asarray(d["alphas"], dtype=np.float64),
            bias=float(d["bias"]),
            support_indices=np.asarray(d["support_indices"], dtype=np.int64),
            C=float(d["C"]),
            train_labels=np.asarray(d["train_labels"], dtype=np.int64),
        )

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_json() + "\n", encoding="utf-8")
        return path


def dual_objective(kernel, y, alphas) -> float:
    """Value of the dual objective being maximized."""
    k = np.asarray(getattr(kernel, "entries", kernel), dtype=np.float64)
    coef = alphas * y
    return float(alphas.sum() - 0.5 * coef @ k @ coef)


def _validate_training_inputs(k, y, C):
    km = np.asarray(getattr(k, "entries", k), dtype=np.float64)
    labels = np.asarray(y, dtype=np.float64)
    n = km.shape[0]
    if km.ndim != 2 or km.shape[1] != n:
        raise ValueError(f"kernel must be square, got shape {km.shape}")
    if labels.shape != (n,):
        raise ValueError(f"labels length {labels.shape} does not match kernel {km.shape}")
    if not np.all(np.abs(labels) == 1.0):
        raise ValueError("labels must be exactly +1 or -1")
    if np.all(labels == labels[0]):
        raise ValueError("training labels contain a single class")
    if not C > 0:
        raise ValueError(f"C must be positive, got {C}")
    return km, labels


def train(
    kernel,
    y,
    C: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = MAX_PAIR_UPDATES,
    check_psd: bool = True,
    record_objective: bool = False,
) -> SvmModel:
    """Fit the dual SVM on a precomputed training kernel.

    ``check_psd`` verifies the kernel's smallest eigenvalue is above
    -1e-8 * N before optimizing (fidelity kernels are PSD up to rounding;
    anything worse indicates a broken input).
    """
    km, labels = _validate_training_inputs(kernel, y, C)
    n = km.shape[0]
    if check_psd:
        smallest = float(np.linalg.eigvalsh(km)[0])
        if smallest < -1e-8 * n:
            raise ValueError(
                f"kernel is not PSD within tolerance (min eigenvalue {smallest:.3e})"
            )

    alphas = np.zeros(n)
    grad = -np.ones(n)  # gradient of 1/2 a'Qa - e'a at a = 0
    path = [0.0] if record_objective else None

    m_val = np.inf
    big_m_val = -np.inf
    for _ in range(max_iter):
        g = -labels * grad
        in_up = ((labels > 0) & (alphas < C)) | ((labels < 0) & (alphas > 0))
        in_low = ((labels < 0) & (alphas < C)) | ((labels > 0) & (alphas > 0))
        up_idx = np.flatnonzero(in_up)
        low_idx = np.flatnonzero(in_low)
        if up_idx.size == 0 or low_idx.size == 0:
            break
        i = up_idx[np.argmax(g[up_idx])]
        j = low_idx[np.argmin(g[low_idx])]
        m_val = g[i]
        big_m_val = g[j]
        if m_val - big_m_val < tol:
            break

        # Move along a_i += y_i*s, a_j -= y_j*s, which keeps sum(a*y) fixed.
        quad = km[i, i] + km[j, j] - 2.0 * km[i, j]
        step = (m_val - big_m_val) / max(quad, _TINY_CURVATURE)
        hi_i = C - alphas[i] if labels[i] > 0 else alphas[i]
        hi_j = C - alphas[j] if labels[j] < 0 else alphas[j]
        step = min(step, hi_i, hi_j)
        delta_i = labels[i] * step
        delta_j = -labels[j] * step
        alphas[i] = min(max(alphas[i] + delta_i, 0.0), C)
        alphas[j] = min(max(alphas[j] + delta_j, 0.0), C)
        grad += labels * (labels[i] * km[:, i] * delta_i + labels[j] * km[:, j] * delta_j)
        if path is not None:
            path.append(dual_objective(km, labels, alphas))
    else:
        warnings.warn(
            f"SMO hit the iteration cap ({max_iter}) with violation "
            f"{m_val - big_m_val:.3e} > tol {tol:.1e}",
            RuntimeWarning,
            stacklevel=2,
        )

    # Bias from free support vectors; midpoint of the optimality interval
    # when none are free.
    coef = alphas * labels
    free = (alphas > 1e-8 * C) & (alphas < C * (1.0 - 1e-8))
    if np.any(free):
        bias = float(np.mean(labels[free] - km[free] @ coef))
    elif np.isfinite(m_val) and np.isfinite(big_m_val):
        bias = float(0.5 * (m_val + big_m_val))
    else:
        bias = 0.0

    return SvmModel(
        alphas=alphas,
        bias=bias,
        support_indices=np.flatnonzero(alphas > 1e-12 * C),
        C=float(C),
        train_labels=np.asarray(y, dtype=np.int64),
        objective_path=path,
    )


def predict(model: SvmModel, k_cross) -> tuple[np.ndarray, np.ndarray]:
    """Labels and decision values for rows of a (test, train) kernel block.

    decision_i = sum_j a_j y_j K_cross[i, j] + bias; ties go to +1.
    """
    kc = np.asarray(getattr(k_cross, "entries", k_cross), dtype=np.float64)
    if kc.ndim == 1:
        kc = kc[None, :]
    if kc.shape[1] != model.alphas.shape[0]:
        raise ValueError(
            f"cross kernel has {kc.shape[1]} columns, model expects "
            f"{model.alphas.shape[0]}"
        )
    decisions = kc @ (model.alphas * model.train_labels) + model.bias
    labels = np.where(decisions >= 0.0, 1, -1)
    return labels, decisions


def kkt_violation(model: SvmModel, kernel) -> float:
    """Largest violation of the margin conditions on the training set."""
    km = np.asarray(getattr(kernel, "entries", kernel), dtype=np.float64)
    _, decisions = predict(model, km)
    margins = model.train_labels * decisions
    worst = 0.0
    for a, margin in zip(model.alphas, margins):
        if a <= 1e-8 * model.C:
            worst = max(worst, 1.0 - margin)
        elif a >= model.C * (1.0 - 1e-8):
            worst = max(worst, margin - 1.0)
        else:
            worst = max(worst, abs(margin - 1.0))
    return float(max(worst, 0.0))


def test_score(model: SvmModel, k_cross, y_test) -> float:
    """Fraction of correct sign predictions."""
    labels, _ = predict(model, k_cross)
    truth = np.asarray(y_test, dtype=np.int64)
    if truth.shape != labels.shape:
        raise ValueError(
            f"test label length {truth.shape} does not match predictions {labels.shape}"
        )
    return float(np.mean(labels == truth))
