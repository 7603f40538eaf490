"""
Floquet analysis of a periodic orbit: from the monodromy to FloquetData,
and tabulation of the exponents along an orbit family.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np
import structlog
from scipy.interpolate import CubicSpline
from scipy.optimize import linear_sum_assignment

from hypres.core.hamiltonian import HamiltonianSystem
from hypres.dynamics.continuation import OrbitFamily
from hypres.dynamics.integrator import IntegratorOptions
from hypres.dynamics.orbits import PeriodicOrbit, monodromy
from hypres.floquet.reduction import ReducedMonodromy, reduce_monodromy
from hypres.floquet.spectrum import (
    ELLIPTIC,
    FloquetExponent,
    MultiplierGroup,
    classify_multipliers,
    expanded_exponents,
    floquet_exponents,
    log_residuals,
    pairing_residual,
    symplectic_log,
)
from hypres.floquet.splitting import (
    ActionCoordinate,
    dissipativity,
    invariant_splitting,
    lagrangian_residual,
    quadratic_form_b,
)
from hypres.utils.config import get_config
from hypres.utils.error_manager import ConfigurationError

logger = structlog.get_logger()

BASEPOINT_TOLERANCE = 1e-7


@dataclass(frozen=True)
class FloquetData:
    reduced: ReducedMonodromy
    multipliers: np.ndarray
    groups: List[MultiplierGroup]
    exponents: List[FloquetExponent]
    log_matrix: np.ndarray
    F_plus: np.ndarray
    F_minus: np.ndarray
    b_matrix: np.ndarray
    action_coordinates: List[ActionCoordinate]
    log_residual: float
    hamiltonian_residual: float
    pairing_residual: float
    lagrangian_residual: float
    dissipativity: np.ndarray
    decomposition_residual: float

    @property
    def tags(self) -> List[str]:
        return [e.tag for e in self.exponents]

    @property
    def r(self) -> int:
        return len(self.exponents)

    @property
    def hyperbolic_dimension(self) -> int:
        """Number of distinct exponents with strictly positive real part."""
        return sum(1 for e in self.exponents if e.tag != ELLIPTIC)

    @property
    def completely_elliptic(self) -> bool:
        return all(e.tag == ELLIPTIC for e in self.exponents)

    @property
    def coefficients(self) -> List[float]:
        return [a.coefficient for a in self.action_coordinates]

    @property
    def krein_signs(self) -> List[int]:
        return [a.krein_sign for a in self.action_coordinates if a.kind == "elliptic"]

    @property
    def mode_exponents(self) -> np.ndarray:
        """Exponents repeated by multiplicity: one entry per transversal mode."""
        return expanded_exponents(self.exponents)

    @property
    def is_dissipative(self) -> bool:
        values = self.dissipativity
        return bool(np.all(values >= -1e-9))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "multipliers": list(self.multipliers),
            "groups": [g.to_dict() for g in self.groups],
            "exponents": [e.to_dict() for e in self.exponents],
            "r": self.r,
            "hyperbolic_dimension": self.hyperbolic_dimension,
            "completely_elliptic": self.completely_elliptic,
            "trivial_multiplicity": self.reduced.trivial_multiplicity,
            "reduced_monodromy": self.reduced.reduced.tolist(),
            "log_matrix": self.log_matrix.tolist(),
            "b_matrix": self.b_matrix.tolist(),
            "action_coordinates": [a.to_dict() for a in self.action_coordinates],
            "krein_signs": self.krein_signs,
            "dissipativity": [float(v) for v in self.dissipativity],
            "residuals": {
                "full_symplectic": self.reduced.full_symplectic_residual,
                "reduced_symplectic": self.reduced.symplectic_residual,
                "log": self.log_residual,
                "hamiltonian": self.hamiltonian_residual,
                "pairing": self.pairing_residual,
                "lagrangian": self.lagrangian_residual,
                "decomposition": self.decomposition_residual,
            },
        }


def analyze_monodromy(full: np.ndarray, X: np.ndarray, g: np.ndarray,
                      tol: Optional[float] = None) -> FloquetData:
    """reduce -> classify -> log -> exponents -> splitting -> b, in that order."""
    tol = get_config().pairing_tolerance if tol is None else tol
    reduced = reduce_monodromy(full, X, g)
    A = reduced.reduced
    groups = classify_multipliers(A, tol)
    B = symplectic_log(A, tol)
    exponents = floquet_exponents(B, tol)
    F_plus, F_minus = invariant_splitting(B, tol)
    form = quadratic_form_b(B, tol)
    log_residual, hamiltonian_residual = log_residuals(A, B)
    multipliers = np.linalg.eigvals(A)
    data = FloquetData(
        reduced=reduced,
        multipliers=multipliers[np.lexsort((-multipliers.imag, -np.abs(multipliers)))],
        groups=groups,
        exponents=exponents,
        log_matrix=B,
        F_plus=F_plus,
        F_minus=F_minus,
        b_matrix=form.b_matrix,
        action_coordinates=form.action_coordinates,
        log_residual=log_residual,
        hamiltonian_residual=hamiltonian_residual,
        pairing_residual=pairing_residual(multipliers),
        lagrangian_residual=lagrangian_residual(F_plus),
        dissipativity=dissipativity(F_plus),
        decomposition_residual=form.residual,
    )
    if not data.is_dissipative:
        logger.warning("unstable space is not dissipative", dissipativity=data.dissipativity.tolist())
    return data


def floquet_at_phase(sys: HamiltonianSystem, orbit: PeriodicOrbit, phase: float = 0.0,
                     opts: Optional[IntegratorOptions] = None, tol: Optional[float] = None) -> FloquetData:
    """FloquetData from the monodromy based at Phi^{phase*T}(rho_E)."""
    base, var = monodromy(sys, orbit, phase, opts)
    rho = base.as_vector()
    return analyze_monodromy(var.fundamental_matrix, sys.vector_field(rho), sys.gradient(rho), tol)


def floquet_of_orbit(sys: HamiltonianSystem, orbit: PeriodicOrbit,
                     opts: Optional[IntegratorOptions] = None, tol: Optional[float] = None) -> FloquetData:
    data = floquet_at_phase(sys, orbit, 0.0, opts, tol)
    logger.info("floquet analysis", system=sys.name, energy=orbit.energy,
                exponents=[complex(e.value) for e in data.exponents],
                hyperbolic_dimension=data.hyperbolic_dimension)
    return data


def basepoint_discrepancy(first: FloquetData, second: FloquetData) -> float:
    """Relative distance between two multiplier multisets under minimal matching."""
    a, b = first.multipliers, second.multipliers
    if a.size != b.size:
        return float("inf")
    cost = np.abs(a[:, None] - b[None, :]) / np.maximum(1.0, np.abs(a))[:, None]
    rows, cols = linear_sum_assignment(cost)
    return float(np.max(cost[rows, cols])) if a.size else 0.0


class FloquetTable:
    """
    Exponents mu_j(E) along a family, one column per transversal mode.

    Modes are tracked between neighbouring energies by minimal-distance
    assignment, then interpolated per mode with cubic splines on real and
    imaginary parts.
    """

    def __init__(self, energies, data: List[FloquetData]):
        self.energies = np.asarray(energies, dtype=float)
        if self.energies.size != len(data) or self.energies.size == 0:
            raise ValueError("FloquetTable needs one FloquetData per energy")
        self.data = list(data)
        self.modes = self._track([d.mode_exponents for d in self.data])
        self._splines = None
        if self.energies.size >= 3:
            self._splines = (CubicSpline(self.energies, self.modes.real, axis=0),
                             CubicSpline(self.energies, self.modes.imag, axis=0))

    @staticmethod
    def _track(rows: List[np.ndarray]) -> np.ndarray:
        width = rows[0].size
        if any(row.size != width for row in rows):
            raise ConfigurationError("number of transversal modes changes along the family")
        tracked = [rows[0]]
        for row in rows[1:]:
            prev = tracked[-1]
            cost = np.abs(prev[:, None] - row[None, :])
            _, cols = linear_sum_assignment(cost)
            tracked.append(row[cols])
        return np.vstack(tracked)

    @classmethod
    def from_family(cls, sys: HamiltonianSystem, family: OrbitFamily,
                    opts: Optional[IntegratorOptions] = None, tol: Optional[float] = None,
                    max_workers: Optional[int] = None) -> "FloquetTable":
        max_workers = max_workers or get_config().max_workers
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            data = list(pool.map(lambda orbit: floquet_at_phase(sys, orbit, 0.0, opts, tol), family.orbits))
        return cls(family.energies, data)

    def exponents_at(self, E: float) -> np.ndarray:
        """Interpolated per-mode exponents at energy E."""
        lo, hi = self.energies[0], self.energies[-1]
        if not lo - 1e-12 <= E <= hi + 1e-12:
            raise ConfigurationError(f"energy {E} outside the tabulated range [{lo}, {hi}]")
        if self._splines is not None:
            re, im = self._splines
            return re(E) + 1j * im(E)
        if self.energies.size == 2:
            weight = (E - lo) / (hi - lo)
            return (1.0 - weight) * self.modes[0] + weight * self.modes[1]
        return self.modes[0].copy()

    def __call__(self, E: float) -> np.ndarray:
        return self.exponents_at(E)
