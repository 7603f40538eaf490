"""Phase-space geometry, Hamiltonian systems and built-in model systems."""

from hypres.core.phase_space import PhasePoint, SymplecticForm, standard_j, wrap_difference
from hypres.core.hamiltonian import HamiltonianSystem, hamilton_vector_field, verify_gradient
from hypres.core.models import (
    ModelSystemSpec,
    SystemKind,
    build_model,
    hyperboloid_gaussian_curvature,
    register_custom,
)

__all__ = [
    "PhasePoint",
    "SymplecticForm",
    "standard_j",
    "wrap_difference",
    "HamiltonianSystem",
    "hamilton_vector_field",
    "verify_gradient",
    "ModelSystemSpec",
    "SystemKind",
    "build_model",
    "hyperboloid_gaussian_curvature",
    "register_custom",
]
