"""
Certificates for the dynamical hypotheses on a periodic orbit: principal
type, partial hyperbolicity, the Williamson conditions on the multipliers,
non-resonance and strong non-resonance of the Floquet exponents.
"""

from dataclasses import dataclass, field
from itertools import product
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import structlog

from hypres.dynamics.orbits import PeriodicOrbit
from hypres.floquet.analysis import FloquetData
from hypres.utils.error_manager import ConfigurationError, HypresError

logger = structlog.get_logger()

TWO_PI = 2.0 * np.pi
MAX_LATTICE_POINTS = 5_000_000


@dataclass(frozen=True)
class LatticeScan:
    witness: Optional[List[int]]
    margin: float
    scanned: int


@dataclass(frozen=True)
class HypothesisReport:
    principal_type_ok: bool
    orbit_hyperbolic_ok: bool
    williamson_ok: bool
    nonresonance_ok: bool
    strong_nonresonance_ok: bool
    residuals: Dict[str, float]
    witnesses: Dict[str, Optional[List[int]]]
    K_bound: int
    tolerance: float
    hyperbolic_dimension: int
    r: int
    transversal_modes: int
    notes: List[str] = field(default_factory=list)

    @property
    def all_ok(self) -> bool:
        return (self.principal_type_ok and self.orbit_hyperbolic_ok and self.williamson_ok
                and self.nonresonance_ok and self.strong_nonresonance_ok)

    @property
    def failures(self) -> List[str]:
        names = ("principal_type_ok", "orbit_hyperbolic_ok", "williamson_ok",
                 "nonresonance_ok", "strong_nonresonance_ok")
        return [name for name in names if not getattr(self, name)]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "principal_type_ok": self.principal_type_ok,
            "orbit_hyperbolic_ok": self.orbit_hyperbolic_ok,
            "williamson_ok": self.williamson_ok,
            "nonresonance_ok": self.nonresonance_ok,
            "strong_nonresonance_ok": self.strong_nonresonance_ok,
            "all_ok": self.all_ok,
            "hyperbolic_dimension": self.hyperbolic_dimension,
            "r": self.r,
            "transversal_modes": self.transversal_modes,
            "K_bound": self.K_bound,
            "tolerance": self.tolerance,
            "residuals": dict(self.residuals),
            "witnesses": dict(self.witnesses),
            "notes": list(self.notes),
        }


def _lattice(K: int, d: int) -> np.ndarray:
    """Nonzero k with |k|_inf <= K and first nonzero entry positive, by shell then lexicographically."""
    if (2 * K + 1) ** d > MAX_LATTICE_POINTS:
        raise ConfigurationError(f"lattice bound K={K} is too large for {d} exponents")
    grid = np.array(list(product(range(-K, K + 1), repeat=d)), dtype=np.int64).reshape(-1, d)
    nonzero = grid != 0
    first = np.argmax(nonzero, axis=1)
    leading = grid[np.arange(grid.shape[0]), first]
    grid = grid[leading > 0]
    shell = np.max(np.abs(grid), axis=1)
    return grid[np.argsort(shell, kind="stable")]


def distance_to_2pi_iz(s: np.ndarray) -> np.ndarray:
    """Distance from s to the lattice 2 pi i Z."""
    s = np.asarray(s, dtype=complex)
    im = s.imag - TWO_PI * np.round(s.imag / TWO_PI)
    return np.hypot(s.real, im)


def scan_lattice(exponents: Sequence[complex], K: int, tol: float, require_zero: bool) -> LatticeScan:
    """
    Search k with 0 < |k|_inf <= K for s = sum k_j mu_j near 2 pi i Z.

    With require_zero=False a hit is a violation only when |s| >= tol;
    with require_zero=True every hit is a violation. Returns the first
    violating k in enumeration order, and the smallest distance among the
    lattice points that count toward a violation.
    """
    mu = np.asarray(exponents, dtype=complex)
    if mu.size == 0 or K < 1:
        return LatticeScan(None, float("inf"), 0)
    ks = _lattice(K, mu.size)
    sums = ks @ mu
    distances = distance_to_2pi_iz(sums)
    relevant = np.ones(len(ks), dtype=bool) if require_zero else np.abs(sums) >= tol
    violating = np.flatnonzero(relevant & (distances < tol))
    margin = float(np.min(distances[relevant])) if np.any(relevant) else float("inf")
    witness = [int(v) for v in ks[violating[0]]] if violating.size else None
    return LatticeScan(witness, margin, int(len(ks)))


def _min_hamilton_speed(orbit: PeriodicOrbit, notes: List[str]) -> float:
    if orbit.system is None:
        notes.append("orbit has no attached system; principal type not checked")
        return float("nan")
    return min(float(np.linalg.norm(orbit.system.vector_field(row))) for row in orbit.samples.states)


def degenerate_report(orbit: PeriodicOrbit, error: HypresError, K: int, tol: float) -> HypothesisReport:
    """
    Report for an orbit whose multipliers admit no Floquet data (a multiplier
    on +1 or the negative axis, or a trivial eigenvalue of wrong multiplicity).
    Only the principal-type certificate is evaluated.
    """
    notes = [f"{error.code}: {error.message}", "exponent certificates not evaluated"]
    n = orbit.ref_point.n
    min_speed = _min_hamilton_speed(orbit, notes)
    report = HypothesisReport(
        principal_type_ok=bool(min_speed >= tol),
        orbit_hyperbolic_ok=False,
        williamson_ok=False,
        nonresonance_ok=False,
        strong_nonresonance_ok=False,
        residuals={"min_hamilton_speed": min_speed, "closure_residual": orbit.closure_residual},
        witnesses={"nonresonance": None, "strong_nonresonance": None},
        K_bound=int(K),
        tolerance=float(tol),
        hyperbolic_dimension=0,
        r=0,
        transversal_modes=n - 1,
        notes=notes,
    )
    logger.warning("hypothesis check failed", failures=report.failures, error=error.code, energy=orbit.energy)
    return report


def check_hypotheses(orbit: PeriodicOrbit, floquet: FloquetData, K: int, tol: float) -> HypothesisReport:
    """Evaluate every certificate; failures are report entries, never exceptions."""
    notes: List[str] = []
    n = orbit.ref_point.n

    min_speed = _min_hamilton_speed(orbit, notes)
    principal_ok = bool(min_speed >= tol)

    max_re = max((e.value.real for e in floquet.exponents), default=0.0)
    hyperbolic_ok = bool(max_re > tol and orbit.closure_residual <= 1e-8)

    lam = floquet.multipliers
    dist_plus_one = float(np.min(np.abs(lam - 1.0))) if lam.size else float("inf")
    dist_negative = float(np.min([abs(v.imag) if v.real < 0 else abs(v) for v in lam])) if lam.size else float("inf")
    williamson_ok = bool(floquet.reduced.trivial_multiplicity == 2
                         and dist_plus_one > tol and dist_negative > tol)

    modes = floquet.mode_exponents
    weak = scan_lattice(modes, K, tol, require_zero=False)
    strong = scan_lattice(modes, K, tol, require_zero=True)
    nonresonance_ok = weak.witness is None
    strong_ok = strong.witness is None and floquet.r == n - 1
    if floquet.r != n - 1:
        notes.append(f"{floquet.r} distinct exponents for {n - 1} transversal modes")

    report = HypothesisReport(
        principal_type_ok=principal_ok,
        orbit_hyperbolic_ok=hyperbolic_ok,
        williamson_ok=williamson_ok,
        nonresonance_ok=nonresonance_ok,
        strong_nonresonance_ok=strong_ok,
        residuals={
            "min_hamilton_speed": min_speed,
            "max_exponent_real_part": float(max_re),
            "closure_residual": orbit.closure_residual,
            "distance_to_plus_one": dist_plus_one,
            "distance_to_negative_axis": dist_negative,
            "trivial_multiplicity": float(floquet.reduced.trivial_multiplicity),
            "nonresonance_margin": weak.margin,
            "strong_nonresonance_margin": strong.margin,
        },
        witnesses={"nonresonance": weak.witness, "strong_nonresonance": strong.witness},
        K_bound=int(K),
        tolerance=float(tol),
        hyperbolic_dimension=floquet.hyperbolic_dimension,
        r=floquet.r,
        transversal_modes=n - 1,
        notes=notes,
    )
    if not report.all_ok:
        logger.warning("hypothesis check failed", failures=report.failures,
                       witnesses=report.witnesses, energy=orbit.energy)
    return report
