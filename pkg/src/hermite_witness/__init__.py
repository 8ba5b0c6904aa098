"""Localized Hermite-kernel witness functions with permutation significance tests."""

__version__ = "0.1.0"

from .errors import ArgumentError, DataError, DomainError, ResourceError, WitnessError  # noqa: E402
from .hermite import (  # noqa: E402
    FilterSpec,
    KernelConfig,
    MehlerParams,
    PointPairGeometry,
    d_coeff,
    eval_psi_sequence,
    eval_psi_zero,
    filter_H,
    kernel_gaussian,
    kernel_matrix,
    kernel_phi_n,
    mehler_closed_form,
    proj_m_reduced,
    projections,
)
from .significance import (  # noqa: E402
    PermutationPlan,
    SignificanceResult,
    permutation_count,
    test_multiclass,
    test_two_class,
)
from .witness import (  # noqa: E402
    LabeledDataset,
    QuerySet,
    WitnessField,
    scale_dataset,
    suggest_degree,
    witness_multiclass,
    witness_two_class,
)

__all__ = [
    "ArgumentError",
    "DataError",
    "DomainError",
    "FilterSpec",
    "KernelConfig",
    "LabeledDataset",
    "MehlerParams",
    "PermutationPlan",
    "PointPairGeometry",
    "QuerySet",
    "ResourceError",
    "SignificanceResult",
    "WitnessError",
    "WitnessField",
    "d_coeff",
    "eval_psi_sequence",
    "eval_psi_zero",
    "filter_H",
    "kernel_gaussian",
    "kernel_matrix",
    "kernel_phi_n",
    "mehler_closed_form",
    "permutation_count",
    "proj_m_reduced",
    "projections",
    "scale_dataset",
    "suggest_degree",
    "test_multiclass",
    "test_two_class",
    "witness_multiclass",
    "witness_two_class",
]
