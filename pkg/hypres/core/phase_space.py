"""
Phase-space geometry: points rho = (x, xi) of T*R^n and the standard symplectic form.

Convention: J = [[0, I], [-I, 0]], so that X_H = J grad H = (dH/dxi, -dH/dx)
and sigma(u, v) = <J u, v>.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np


@lru_cache(maxsize=32)
def _standard_j(m: int) -> np.ndarray:
    J = np.zeros((2 * m, 2 * m))
    J[:m, m:] = np.eye(m)
    J[m:, :m] = -np.eye(m)
    J.setflags(write=False)
    return J


def standard_j(m: int) -> np.ndarray:
    """The 2m x 2m standard symplectic matrix (read-only)."""
    return _standard_j(int(m))


@dataclass(frozen=True)
class PhasePoint:
    """A point (x, xi) of phase space with n degrees of freedom."""

    x: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(-1)
        xi = np.array(self.xi, dtype=float).reshape(-1)
        if x.shape != xi.shape:
            raise ValueError(f"x and xi must have the same length, got {x.size} and {xi.size}")
        if x.size < 1:
            raise ValueError("a phase point needs at least one degree of freedom")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(xi))):
            raise ValueError("phase point entries must be finite")
        x.setflags(write=False)
        xi.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "xi", xi)

    @property
    def n(self) -> int:
        return int(self.x.size)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.x, self.xi])

    @classmethod
    def from_vector(cls, rho: Sequence[float]) -> "PhasePoint":
        rho = np.asarray(rho, dtype=float).reshape(-1)
        if rho.size % 2:
            raise ValueError(f"phase vector must have even length, got {rho.size}")
        n = rho.size // 2
        return cls(rho[:n], rho[n:])

    def to_dict(self):
        return {"x": [float(v) for v in self.x], "xi": [float(v) for v in self.xi]}

    @classmethod
    def from_dict(cls, data) -> "PhasePoint":
        return cls(data["x"], data["xi"])


@dataclass(frozen=True)
class SymplecticForm:
    """sigma(u, v) = <J u, v> on R^{2m}."""

    dim: int
    matrix_J: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.dim < 2 or self.dim % 2:
            raise ValueError(f"symplectic dimension must be even and positive, got {self.dim}")
        object.__setattr__(self, "matrix_J", standard_j(self.dim // 2))

    def sigma(self, u, v):
        """Bilinear (not sesquilinear) pairing; complex vectors are allowed."""
        u = np.asarray(u)
        v = np.asarray(v)
        return (self.matrix_J @ u) @ v

    def gram(self, basis: np.ndarray) -> np.ndarray:
        """Matrix of sigma restricted to the columns of basis, in the J convention (P^T J P)."""
        return basis.T @ self.matrix_J @ basis

    def symplectic_residual(self, M: np.ndarray) -> float:
        """Operator norm of M^T J M - J."""
        J = self.matrix_J
        return float(np.linalg.norm(M.T @ J @ M - J, 2))

    def hamiltonian_residual(self, B: np.ndarray) -> float:
        """Operator norm of B^T J + J B (zero for Hamiltonian matrices)."""
        J = self.matrix_J
        return float(np.linalg.norm(B.T @ J + J @ B, 2))


def wrap_difference(delta: np.ndarray, periods: Iterable) -> np.ndarray:
    """Reduce the configuration part of a phase-space difference modulo coordinate periods."""
    delta = np.array(delta, dtype=float)
    for i, period in enumerate(periods):
        if period:
            delta[i] -= period * np.round(delta[i] / period)
    return delta
