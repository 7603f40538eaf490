"""
Reduction of the monodromy dPhi^T(rho_E) to the linearized Poincare map A.

A acts on the sigma-orthogonal complement of span{X, Y}, where X = X_H(rho_E)
and Y = grad H0 / |grad H0|^2 is the energy direction (sigma(Y, X) = 1). The
complement is given a symplectic basis P (P^T J P = J_m) by projecting the
coordinate vectors and running symplectic Gram-Schmidt, so that A = P^+ M P
with the symplectic left inverse P^+ = -J_m P^T J.
"""

from dataclasses import dataclass
from typing import List

import numpy as np
import structlog
from scipy.linalg import schur

from hypres.core.phase_space import SymplecticForm, standard_j
from hypres.utils.error_manager import BasisConstructionError, DegeneracyError

logger = structlog.get_logger()

FULL_SYMPLECTIC_TOLERANCE = 1e-8
REDUCED_SYMPLECTIC_TOLERANCE = 1e-7


@dataclass(frozen=True)
class ReducedMonodromy:
    full: np.ndarray
    reduced: np.ndarray
    basis: np.ndarray
    trivial_multiplicity: int
    full_symplectic_residual: float
    symplectic_residual: float

    @property
    def induced_form(self) -> np.ndarray:
        """P^T J P; equal to the standard J_m for the basis built here."""
        n = self.full.shape[0] // 2
        return self.basis.T @ standard_j(n) @ self.basis


def _pair_order(n: int) -> List[int]:
    order = []
    for i in range(n):
        order += [i, n + i]
    return order


def symplectic_gram_schmidt(candidates: np.ndarray, m: int, J: np.ndarray) -> np.ndarray:
    """
    Extract a symplectic basis of size 2m from the columns of candidates.

    Returns P = [e_1..e_m, f_1..f_m] with e_i^T J f_j = delta_ij and all other
    pairings zero.
    """
    vectors = [candidates[:, j].copy() for j in range(candidates.shape[1])]
    scale = max(1.0, max(np.linalg.norm(v) for v in vectors))
    es, fs = [], []
    for _ in range(m):
        norms = np.array([np.linalg.norm(v) for v in vectors])
        i = int(np.argmax(norms))
        if norms[i] <= 1e-10 * scale:
            raise BasisConstructionError("projected vectors do not span the reduced space")
        e = vectors[i] / norms[i]
        pairings = np.array([e @ J @ v for v in vectors])
        j = int(np.argmax(np.abs(pairings)))
        if abs(pairings[j]) <= 1e-10 * scale:
            raise BasisConstructionError("no symplectic partner for a basis vector")
        f = vectors[j] / pairings[j]
        vectors = [v + (f @ J @ v) * e - (e @ J @ v) * f for v in vectors]
        es.append(e)
        fs.append(f)
    return np.column_stack(es + fs)


def count_unit_eigenvalues(A: np.ndarray, tol: float) -> int:
    """Number of eigenvalues of A within tol of 1, read from the complex Schur form."""
    if A.size == 0:
        return 0
    T, _ = schur(A.astype(complex), output="complex")
    return int(np.sum(np.abs(np.diag(T) - 1.0) <= tol))


def reduce_monodromy(full: np.ndarray, X: np.ndarray, g: np.ndarray, tol: float = 1e-6) -> ReducedMonodromy:
    """Restrict the monodromy to the symplectic complement of the orbit and energy directions."""
    full = np.asarray(full, dtype=float)
    X = np.asarray(X, dtype=float)
    g = np.asarray(g, dtype=float)
    dim = full.shape[0]
    if full.shape != (dim, dim) or dim % 2:
        raise ValueError(f"monodromy must be a square matrix of even size, got {full.shape}")
    n = dim // 2
    if n < 2:
        raise ValueError("reduction needs at least two degrees of freedom")
    if np.linalg.norm(X) == 0.0 or np.linalg.norm(g) == 0.0:
        raise BasisConstructionError("X_H vanishes at the reference point")

    form = SymplecticForm(dim)
    J = form.matrix_J
    full_residual = form.symplectic_residual(full)
    scale = max(1.0, float(np.linalg.norm(full, 2)) ** 2)
    if full_residual > FULL_SYMPLECTIC_TOLERANCE * scale:
        logger.warning("monodromy is not symplectic within tolerance", residual=full_residual)

    Y = g / (g @ g)
    # v - alpha X - beta Y is sigma-orthogonal to X and Y
    basis_vectors = np.eye(dim)[:, _pair_order(n)]
    beta = basis_vectors.T @ g
    alpha = -(basis_vectors.T @ (J.T @ Y))
    projected = basis_vectors - np.outer(X, alpha) - np.outer(Y, beta)

    P = symplectic_gram_schmidt(projected, n - 1, J)
    J_m = standard_j(n - 1)
    A = -J_m @ P.T @ J @ full @ P

    multiplicity = 2 + count_unit_eigenvalues(A, tol)
    if multiplicity != 2:
        raise DegeneracyError(
            f"eigenvalue 1 of the monodromy has multiplicity {multiplicity}, expected 2",
            multiplicity=multiplicity,
        )
    reduced_residual = SymplecticForm(2 * (n - 1)).symplectic_residual(A)
    if reduced_residual > REDUCED_SYMPLECTIC_TOLERANCE * max(1.0, float(np.linalg.norm(A, 2)) ** 2):
        logger.warning("reduced monodromy is not symplectic within tolerance", residual=reduced_residual)
    return ReducedMonodromy(full, A, P, multiplicity, full_residual, reduced_residual)
