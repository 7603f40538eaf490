"""
Williamson classification of Floquet multipliers, the real symplectic
logarithm B = log A and the normalized Floquet exponents.
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
import structlog
from scipy.linalg import expm, logm
from scipy.optimize import linear_sum_assignment

from hypres.core.phase_space import SymplecticForm, standard_j
from hypres.utils.error_manager import (
    BranchError,
    LogarithmError,
    WilliamsonDegeneracyError,
    ZeroExponentError,
)

logger = structlog.get_logger()

ELLIPTIC = "elliptic"
REAL_HYPERBOLIC = "real-hyperbolic"
LOXODROMIC = "loxodromic"

LOG_RESIDUAL_TOLERANCE = 1e-8
HAMILTONIAN_TOLERANCE = 1e-10


@dataclass(frozen=True)
class MultiplierGroup:
    """One Williamson group: a pair {l, 1/l}, {l, conj l} or a loxodromic quadruple."""

    tag: str
    multiplier: complex
    members: Tuple[complex, ...]
    multiplicity: int

    def to_dict(self):
        return {"tag": self.tag, "multiplier": self.multiplier,
                "members": list(self.members), "multiplicity": self.multiplicity}


@dataclass(frozen=True)
class FloquetExponent:
    """A normalized exponent mu (Re mu > 0, or Re mu = 0 and Im mu > 0)."""

    value: complex
    multiplicity: int
    tag: str

    @property
    def multiplier(self) -> complex:
        return complex(np.exp(self.value))

    def to_dict(self):
        return {"value": self.value, "multiplier": self.multiplier,
                "multiplicity": self.multiplicity, "tag": self.tag}


def _tag(value: complex, tol: float, log_scale: bool) -> str:
    """Tag from a multiplier (log_scale=False) or an exponent (log_scale=True)."""
    if log_scale:
        re, im = abs(value.real), abs(value.imag)
    else:
        re, im = abs(abs(value) - 1.0), abs(value.imag) / max(1.0, abs(value))
    if re <= tol:
        return ELLIPTIC
    if im <= tol:
        return REAL_HYPERBOLIC
    return LOXODROMIC


def _cluster(values: List[complex], tol: float) -> List[Tuple[complex, int]]:
    """Merge values within tol (relative to max(1, |v|)); returns (mean, count) in first-seen order."""
    clusters: List[List[complex]] = []
    for v in values:
        for c in clusters:
            if abs(v - c[0]) <= tol * max(1.0, abs(c[0])):
                c.append(v)
                break
        else:
            clusters.append([v])
    return [(complex(np.mean(c)), len(c)) for c in clusters]


def pairing_residual(multipliers: np.ndarray) -> float:
    """
    Distance between the multiplier multiset and its images under l -> 1/l and
    l -> conj(l), using minimal-distance bipartite matching.
    """
    lam = np.asarray(multipliers, dtype=complex)
    if lam.size == 0:
        return 0.0
    worst = 0.0
    for image in (1.0 / lam, np.conj(lam)):
        cost = np.abs(lam[:, None] - image[None, :]) / np.maximum(1.0, np.abs(lam))[:, None]
        rows, cols = linear_sum_assignment(cost)
        worst = max(worst, float(np.max(cost[rows, cols])))
    return worst


def _check_admissible(lam: np.ndarray, tol: float) -> None:
    for value in lam:
        scale = max(1.0, abs(value))
        if abs(value - 1.0) <= tol:
            raise WilliamsonDegeneracyError(
                f"multiplier {value:.6g} is within {tol:g} of +1",
                context={"multiplier": [value.real, value.imag]},
            )
        if value.real < 0.0 and abs(value.imag) <= tol * scale:
            raise BranchError(
                f"multiplier {value:.6g} lies on the negative real axis; no real logarithm",
                context={"multiplier": [value.real, value.imag]},
            )


def classify_multipliers(A: np.ndarray, tol: float = 1e-7) -> List[MultiplierGroup]:
    """
    Group the eigenvalues of the symplectic matrix A into Williamson groups.

    Raises WilliamsonDegeneracyError for a multiplier at +1 and BranchError for
    multipliers on the negative real axis (including -1).
    """
    A = np.asarray(A, dtype=float)
    lam = np.linalg.eigvals(A)
    _check_admissible(lam, tol)

    representatives = []
    for value in lam:
        tag = _tag(value, tol, log_scale=False)
        if tag == ELLIPTIC and value.imag > 0:
            representatives.append(value)
        elif tag == REAL_HYPERBOLIC and abs(value) > 1.0:
            representatives.append(complex(value.real, 0.0))
        elif tag == LOXODROMIC and abs(value) > 1.0 and value.imag > 0:
            representatives.append(value)

    groups = []
    for value, count in _cluster(representatives, tol):
        tag = _tag(value, tol, log_scale=False)
        if tag == ELLIPTIC:
            members = (value, value.conjugate())
        elif tag == REAL_HYPERBOLIC:
            members = (value, 1.0 / value)
        else:
            members = (value, value.conjugate(), 1.0 / value, 1.0 / value.conjugate())
        groups.append(MultiplierGroup(tag, value, members, count))

    accounted = sum(len(g.members) * g.multiplicity for g in groups)
    if accounted != lam.size:
        raise WilliamsonDegeneracyError(
            "multipliers do not close under inversion and conjugation",
            context={"accounted": accounted, "dimension": int(lam.size),
                     "pairing_residual": pairing_residual(lam)},
        )
    return groups


def symplectic_log(A: np.ndarray, tol: float = 1e-7) -> np.ndarray:
    """
    Real logarithm B of the symplectic matrix A with B^T J + J B = 0.

    The principal logarithm is taken, so mu(conj l) = conj(mu(l)); Hamiltonian
    structure is restored by B <- (B + J B^T J)/2 and exp(B) = A re-verified.
    """
    A = np.asarray(A, dtype=float)
    classify_multipliers(A, tol)
    m = A.shape[0] // 2
    J = standard_j(m)

    L = logm(A)
    scale = max(1.0, float(np.linalg.norm(L)))
    if np.iscomplexobj(L):
        if np.max(np.abs(L.imag)) > 1e-8 * scale:
            raise LogarithmError("matrix logarithm is not real", context={"imaginary_part": float(np.max(np.abs(L.imag)))})
        L = L.real
    B = 0.5 * (L + J @ L.T @ J)

    residual = float(np.linalg.norm(expm(B) - A, 2))
    if residual > LOG_RESIDUAL_TOLERANCE * max(1.0, float(np.linalg.norm(A, 2))):
        raise LogarithmError(f"exp(log A) differs from A by {residual:.3e}", context={"residual": residual})
    return B


def log_residuals(A: np.ndarray, B: np.ndarray) -> Tuple[float, float]:
    """(||exp(B) - A||, ||B^T J + J B||) in the operator norm."""
    form = SymplecticForm(A.shape[0])
    return float(np.linalg.norm(expm(B) - A, 2)), form.hamiltonian_residual(B)


def floquet_exponents(B: np.ndarray, tol: float = 1e-7) -> List[FloquetExponent]:
    """
    Normalized exponents: eigenvalues mu of B with Re mu > 0, or Re mu = 0 and
    Im mu > 0; equal exponents merged with multiplicity; sorted by decreasing
    real part, then decreasing imaginary part.
    """
    eigenvalues = np.linalg.eigvals(np.asarray(B, dtype=float))
    kept = []
    for mu in eigenvalues:
        if abs(mu) < tol:
            raise ZeroExponentError(f"Floquet exponent {mu:.3g} is zero within tolerance",
                                    context={"exponent": [mu.real, mu.imag]})
        if mu.real > tol:
            kept.append(complex(mu.real, 0.0) if abs(mu.imag) <= tol else complex(mu))
        elif abs(mu.real) <= tol and mu.imag > 0:
            kept.append(complex(0.0, mu.imag))
    exponents = [FloquetExponent(value, count, _tag(value, tol, log_scale=True))
                 for value, count in _cluster(kept, tol)]
    exponents.sort(key=lambda e: (-e.value.real, -e.value.imag))
    return exponents


def expanded_exponents(exponents: List[FloquetExponent]) -> np.ndarray:
    """One entry per transversal mode: each exponent repeated by its multiplicity."""
    values = [e.value for e in exponents for _ in range(e.multiplicity)]
    return np.asarray(values, dtype=complex)
