"""PSD matrix functions and the two scalar kernel diagnostics.

``geometric_difference(K1, K2)`` is the asymmetric distance
sqrt(||sqrt(K2) K1^{-1} sqrt(K2)||) between two kernel matrices
(Huang et al., Nat. Commun. 12, 2631 (2021)): label-independent, and the
screening quantity for whether predictions under K2 can be replicated
with K1. ``model_complexity(K, y)`` is y^T K^{-1} y, the quantity that
bounds kernel-model prediction error. The two satisfy

    s_K1 <= g(K1||K2)^2 * s_K2

for any PSD pair, which the test suite exercises directly.

Exact inversion is ill-posed for flat-spectrum kernels, so inversion is
regularized by a relative jitter eps_rel * lambda_max (default 1e-10);
eps_rel=0 requests the exact inverse and fails loudly on singular input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PsdFunctionConfig:
    """Numerical policy for PSD matrix functions."""

    eps_rel: float = 1e-10
    clip_negative: bool = True

    def __post_init__(self):
        if self.eps_rel < 0:
            raise ValueError(f"eps_rel must be >= 0, got {self.eps_rel}")


DEFAULT_CONFIG = PsdFunctionConfig()

_SYMMETRY_TOL = 1e-10


def _as_matrix(k) -> np.ndarray:
    m = np.asarray(getattr(k, "entries", k), dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def _symmetric_eigh(k) -> tuple[np.ndarray, np.ndarray]:
    m = _as_matrix(k)
    if np.abs(m - m.T).max() > _SYMMETRY_TOL:
        raise ValueError(f"matrix is not symmetric within {_SYMMETRY_TOL}")
    return np.linalg.eigh(0.5 * (m + m.T))


def mat_sqrt_psd(k, cfg: PsdFunctionConfig | None = None) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition.

    Negative eigenvalues (numerical noise on nominally PSD input) are
    clipped to zero under the default config; with clip_negative=False a
    genuinely indefinite matrix raises instead.
    """
    cfg = cfg or DEFAULT_CONFIG
    w, v = _symmetric_eigh(k)
    if not cfg.clip_negative and w[0] < 0:
        raise np.linalg.LinAlgError(
            f"matrix has negative eigenvalue {w[0]:.3e} and clipping is disabled"
        )
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T
    return 0.5 * (root + root.T)


def regularized_inverse(k, cfg: PsdFunctionConfig | None = None) -> np.ndarray:
    """V diag(1/(w_i + eps_rel*w_max)) V^T; the exact inverse at eps_rel=0."""
    cfg = cfg or DEFAULT_CONFIG
    w, v = _symmetric_eigh(k)
    if cfg.clip_negative:
        w = np.clip(w, 0.0, None)
    jitter = cfg.eps_rel * max(float(w[-1]), 0.0)
    denom = w + jitter
    if denom.min() <= 0:
        raise np.linalg.LinAlgError(
            f"matrix is singular at eps_rel={cfg.eps_rel} "
            f"(smallest regularized eigenvalue {denom.min():.3e})"
        )
    inv = (v / denom) @ v.T
    return 0.5 * (inv + inv.T)


def geometric_difference(k1, k2, cfg: PsdFunctionConfig | None = None) -> float:
    """g_d(K1||K2) = sqrt of the top eigenvalue of sqrt(K2) K1^{-1} sqrt(K2).

    Asymmetric: the kernel being inverted (typically the classical one)
    goes in the K1 slot. The inner product matrix is symmetric PSD, so
    its spectral norm is its top eigenvalue; it is re-symmetrized first
    to shed accumulated rounding asymmetry.
    """
    m1 = _as_matrix(k1)
    m2 = _as_matrix(k2)
    if m1.shape != m2.shape:
        raise ValueError(f"dimension mismatch: {m1.shape} vs {m2.shape}")
    root = mat_sqrt_psd(m2, cfg)
    middle = root @ regularized_inverse(m1, cfg) @ root
    middle = 0.5 * (middle + middle.T)
    top = float(np.linalg.eigvalsh(middle)[-1])
    return float(np.sqrt(max(top, 0.0)))


def model_complexity(k, y, cfg: PsdFunctionConfig | None = None) -> float:
    """y^T K^{-1} y for a +-1 label vector."""
    m = _as_matrix(k)
    labels = np.asarray(y, dtype=np.float64)
    if labels.shape != (m.shape[0],):
        raise ValueError(
            f"label vector length {labels.shape} does not match kernel {m.shape}"
        )
    if not np.all(np.abs(labels) == 1.0):
        raise ValueError("labels must be +1 or -1")
    return float(labels @ regularized_inverse(m, cfg) @ labels)
