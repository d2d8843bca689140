"""
Split-step quantum walks on Z^n with a single coin defect at the origin.

The package simulates the walk U = SC exactly on light-cone windows, builds
the discriminant operators behind the spectral mapping theorem, constructs
the +1/-1 birth eigenvectors, checks the predicted band spectrum on finite
tori and compares the analytic time-averaged limit measure with simulation.
"""

__version__ = "0.1.0"

from .birth import (
    BirthCase,
    BirthVector,
    birth_vector,
    classify_multiplicity,
    closed_form_profile,
    finite_support_family,
    normalization_constants,
)
from .errors import WalkError
from .measure import MeasureReport, analytic_measure, compare, empirical_measure
from .operators import build_dense_T, build_dense_U, mu_components, mu_total, potential_v0
from .spectral import (
    SpectralSummary,
    band_coverage,
    divergence_probe,
    resolvent_integral,
    summarize,
    torus_spectrum,
)
from .walk import (
    LatticeWindow,
    WalkParameters,
    WaveFunction,
    apply_evolution,
    evolve,
    params_from_dict,
    validate_params,
)

__all__ = [
    "__version__",
    "BirthCase",
    "BirthVector",
    "LatticeWindow",
    "MeasureReport",
    "SpectralSummary",
    "WalkError",
    "WalkParameters",
    "WaveFunction",
    "analytic_measure",
    "apply_evolution",
    "band_coverage",
    "birth_vector",
    "build_dense_T",
    "build_dense_U",
    "classify_multiplicity",
    "closed_form_profile",
    "compare",
    "divergence_probe",
    "empirical_measure",
    "evolve",
    "finite_support_family",
    "mu_components",
    "mu_total",
    "normalization_constants",
    "params_from_dict",
    "potential_v0",
    "resolvent_integral",
    "summarize",
    "torus_spectrum",
    "validate_params",
]
