"""Quantum fidelity kernels at desk scale: statevector embeddings,
kernel spectra, bandwidth tuning, and geometric-difference scaling."""

from .data import Dataset, GenNormSpec, load_csv, pca_reduce, sample_dataset, sample_gennorm, standardize_normalize, train_test_split
from .feature_maps import FeatureMapSpec, embed, embed_batch, iqp_phases
from .kernel import KernelMatrix, Spectrum, build_kernel, cross_kernel, load_kernel, normalized_spectrum, save_kernel
from .spectral import PsdFunctionConfig, geometric_difference, mat_sqrt_psd, model_complexity, regularized_inverse
from .statevec import MAX_QUBITS, apply_diagonal_phase, apply_hadamard_all, apply_two_qubit_unitary, hermitian_expm_4x4, init_zero_state, inner_product
from .svm import SvmModel, predict, test_score
from .svm import train as train_svm
from .tuning import (
    DEFAULT_C_GRID,
    DEFAULT_LAMBDA_GRID,
    GAMMA_TARGET_PRESETS,
    GdResult,
    SearchResult,
    TuneCurve,
    best_testscore_search,
    gamma_max_curve,
    lambda_for_target_gamma,
    min_gd_over_classical,
)

__version__ = "0.1.0"
