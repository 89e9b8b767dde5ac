"""Truncated Toeplitz operators on the polydisc.

Finite sections of (block) multilevel Toeplitz operators built from torus
symbols, shift-invariance and compactness diagnostics, Toeplitz + compact
decomposition, and truncated model spaces with their compressed shifts.
"""

from .analysis import (
    AsymptoticSequence,
    CompactnessProfile,
    CrossTermProfile,
    DecompositionResult,
    DefectReport,
    SymbolRecovery,
    asymptotic_decompose,
    asymptotic_sequence,
    compactness_profile,
    cross_term_profile,
    feintuch_decompose,
    recover_symbol,
    toeplitz_defect,
)
from .lattice import Box, MultiIndex, enumerate_basis, interior, position
from .modelspace import (
    CompressedShift,
    InvarianceKernelReport,
    ModelCompactnessReport,
    ModelSpace,
    compressed_shift,
    invariance_kernel,
    invariance_residual,
    model_basis,
    model_compactness_test,
)
from .operators import (
    TruncatedOperator,
    apply_dense,
    apply_fast,
    compress,
    identity,
    layer_projector,
    operator_norm,
    shift,
    toeplitz,
)
from .symbols import (
    InnerCertificate,
    InvertibilityReport,
    TorusSymbol,
    blaschke_factor,
    coefficients_from_samples,
    evaluate_grid,
    from_coefficients,
    is_inner,
    is_invertible_ae,
    multiply,
    product_inner,
    random_symbol,
)

__version__ = "0.1.0"

__all__ = [
    "Box",
    "MultiIndex",
    "enumerate_basis",
    "position",
    "interior",
    "TorusSymbol",
    "InnerCertificate",
    "InvertibilityReport",
    "from_coefficients",
    "coefficients_from_samples",
    "evaluate_grid",
    "multiply",
    "blaschke_factor",
    "product_inner",
    "is_inner",
    "is_invertible_ae",
    "random_symbol",
    "TruncatedOperator",
    "toeplitz",
    "shift",
    "layer_projector",
    "identity",
    "apply_fast",
    "apply_dense",
    "operator_norm",
    "compress",
    "DefectReport",
    "SymbolRecovery",
    "AsymptoticSequence",
    "CrossTermProfile",
    "CompactnessProfile",
    "DecompositionResult",
    "toeplitz_defect",
    "recover_symbol",
    "asymptotic_sequence",
    "cross_term_profile",
    "compactness_profile",
    "asymptotic_decompose",
    "feintuch_decompose",
    "ModelSpace",
    "CompressedShift",
    "InvarianceKernelReport",
    "ModelCompactnessReport",
    "model_basis",
    "compressed_shift",
    "invariance_residual",
    "invariance_kernel",
    "model_compactness_test",
]
