"""Numerical certification experiments."""

from .convergence import (
    RateTable,
    euler_alpha_convergence_study,
    exact_radial_flow,
    flow_sup_distance,
)
from .estimates import (
    euler_quasi_lipschitz_ratio,
    fit_gronwall_constants,
    gronwall_envelope,
    quasi_lipschitz_ratio,
    scaling_identity_residual,
)
from .experiments import (
    BlobSpeedProfile,
    BumpTest,
    CollapseSearchError,
    GaussianProfile,
    GaussianTest,
    collapse_experiment,
    find_collapse_configuration,
    picard_contraction_report,
    reversal_check,
    uniform_weak_convergence_check,
    weak_coadjoint_residual,
)

__all__ = [
    "RateTable", "euler_alpha_convergence_study", "exact_radial_flow", "flow_sup_distance",
    "euler_quasi_lipschitz_ratio", "fit_gronwall_constants", "gronwall_envelope",
    "quasi_lipschitz_ratio", "scaling_identity_residual", "BlobSpeedProfile", "BumpTest",
    "CollapseSearchError", "GaussianProfile", "GaussianTest", "collapse_experiment",
    "find_collapse_configuration", "picard_contraction_report", "reversal_check",
    "uniform_weak_convergence_check", "weak_coadjoint_residual",
]
