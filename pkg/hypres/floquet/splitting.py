"""
Stable/unstable splitting of B and the decomposition of b(rho) = 1/2 sigma(rho, B rho)
into elementary action coordinates.

Adapted real symplectic basis, one block per exponent:

- real-hyperbolic mu = a: x-vectors span E_a, xi-vectors span E_{-a}; iota = x xi, coefficient a.
- elliptic mu = i w: w = p + i q eigenvector of i w normalized so sigma-Krein
  value s = p^T J q is +-1; e_x = p, e_xi = s q; iota = (x^2 + xi^2)/2, coefficient s w.
- loxodromic mu = a +- i beta: x-vectors (p, -q) from the eigenvector of a + i beta;
  iota_a = x1 xi1 + x2 xi2 (coefficient a) and iota_b = x1 xi2 - x2 xi1 (coefficient beta).
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
import structlog

from hypres.core.phase_space import standard_j
from hypres.floquet.spectrum import (
    ELLIPTIC,
    REAL_HYPERBOLIC,
    FloquetExponent,
    floquet_exponents,
)
from hypres.utils.error_manager import BasisConstructionError, NonSemisimpleError

logger = structlog.get_logger()

CONDITION_LIMIT = 1e8
LAGRANGIAN_TOLERANCE = 1e-9
DECOMPOSITION_TOLERANCE = 1e-10


@dataclass(frozen=True)
class ActionCoordinate:
    """An elementary quadratic iota(rho) = rho^T matrix rho with its coefficient in b."""

    kind: str
    matrix: np.ndarray
    coefficient: float
    exponent_index: int
    krein_sign: int = 0

    def __call__(self, rho: np.ndarray) -> float:
        return float(rho @ self.matrix @ rho)

    def to_dict(self):
        return {"kind": self.kind, "coefficient": self.coefficient,
                "exponent_index": self.exponent_index, "krein_sign": self.krein_sign,
                "matrix": self.matrix.tolist()}


@dataclass(frozen=True)
class QuadraticForm:
    b_matrix: np.ndarray
    action_coordinates: List[ActionCoordinate]
    adapted_basis: np.ndarray
    residual: float

    @property
    def coefficients(self) -> List[float]:
        return [a.coefficient for a in self.action_coordinates]

    def __call__(self, rho: np.ndarray) -> float:
        return float(rho @ self.b_matrix @ rho)


def _eigensystem(B: np.ndarray):
    w, V = np.linalg.eig(B)
    V = V / np.linalg.norm(V, axis=0)
    condition = float(np.linalg.cond(V))
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        raise NonSemisimpleError(
            f"eigenvector matrix of B has condition number {condition:.3e}; B is not diagonalizable",
            context={"condition": condition},
        )
    return w, V


def _columns_for(w: np.ndarray, V: np.ndarray, mu: complex, tol: float) -> np.ndarray:
    mask = np.abs(w - mu) <= tol * max(1.0, abs(mu))
    return V[:, mask]


def invariant_splitting(B: np.ndarray, tol: float = 1e-7) -> Tuple[np.ndarray, np.ndarray]:
    """
    F_plus = sum of the eigenspaces of the normalized exponents, F_minus = those of their negatives.

    Columns are unit eigenvectors ordered like floquet_exponents(B).
    """
    B = np.asarray(B, dtype=float)
    exponents = floquet_exponents(B, tol)
    w, V = _eigensystem(B)
    plus = [_columns_for(w, V, e.value, tol) for e in exponents]
    minus = [_columns_for(w, V, -e.value, tol) for e in exponents]
    F_plus = np.column_stack(plus) if plus else np.zeros((B.shape[0], 0), dtype=complex)
    F_minus = np.column_stack(minus) if minus else np.zeros((B.shape[0], 0), dtype=complex)
    half = B.shape[0] // 2
    if F_plus.shape[1] != half or F_minus.shape[1] != half:
        raise BasisConstructionError(
            "eigenvectors do not split into two halves",
            context={"plus": int(F_plus.shape[1]), "minus": int(F_minus.shape[1])},
        )
    residual = lagrangian_residual(F_plus)
    if residual > LAGRANGIAN_TOLERANCE:
        logger.warning("unstable space is not Lagrangian within tolerance", residual=residual)
    return F_plus, F_minus


def lagrangian_residual(F: np.ndarray) -> float:
    """max |sigma(u, v)| over unit columns u, v of F."""
    if F.shape[1] == 0:
        return 0.0
    J = standard_j(F.shape[0] // 2)
    return float(np.max(np.abs(F.T @ J @ F)))


def dissipativity(F: np.ndarray) -> np.ndarray:
    """(1/2i) sigma(u, conj u) for each column u of F (zero for real columns)."""
    J = standard_j(F.shape[0] // 2)
    values = [((J @ u) @ np.conj(u)) / 2j for u in F.T]
    return np.real(np.asarray(values, dtype=complex))


def _real_span(W: np.ndarray, rank: int) -> np.ndarray:
    """Orthonormal real basis of span{Re W, Im W} with the given rank."""
    stacked = np.hstack([W.real, W.imag])
    U, s, _ = np.linalg.svd(stacked, full_matrices=False)
    if s.size < rank or s[rank - 1] <= 1e-10 * max(1.0, s[0]):
        raise BasisConstructionError("eigenspace has lower real rank than expected")
    return U[:, :rank]


def _pair_with(X: np.ndarray, Ys: np.ndarray, J: np.ndarray) -> np.ndarray:
    """Y = Ys (X^T J Ys)^-1 so that X^T J Y = I."""
    G = X.T @ J @ Ys
    if np.linalg.cond(G) > CONDITION_LIMIT:
        raise BasisConstructionError("stable and unstable spaces are not sigma-dual")
    return Ys @ np.linalg.inv(G)


def _mode_blocks(B: np.ndarray, exponents: List[FloquetExponent], tol: float):
    """Yield (x_vectors, xi_vectors, [(kind, coefficient, krein_sign, exponent_index, local pattern)])."""
    J = standard_j(B.shape[0] // 2)
    w, V = _eigensystem(B)
    done = set()
    for index, exp in enumerate(exponents):
        mu, d = exp.value, exp.multiplicity
        if index in done:
            continue
        if exp.tag == REAL_HYPERBOLIC:
            X = _real_span(_columns_for(w, V, mu, tol), d)
            Ys = _real_span(_columns_for(w, V, -mu, tol), d)
            Y = _pair_with(X, Ys, J)
            terms = [("hyperbolic", mu.real, 0, index, ("xxi", k)) for k in range(d)]
            yield X, Y, terms
        elif exp.tag == ELLIPTIC:
            W = _columns_for(w, V, mu, tol)
            G = (W.T @ J.T @ np.conj(W)) / 2j
            G = 0.5 * (G + G.conj().T)
            g, U = np.linalg.eigh(G)
            if np.min(np.abs(g)) <= 1e-12:
                raise BasisConstructionError("elliptic eigenvector has vanishing Krein form")
            W = (W @ U.conj()) / np.sqrt(np.abs(g))
            signs = np.sign(g).astype(int)
            X = W.real
            Y = W.imag * signs
            terms = [("elliptic", float(s) * mu.imag, int(s), index, ("harmonic", k))
                     for k, s in enumerate(signs)]
            yield X, Y, terms
        else:
            partner = next(
                (j for j, other in enumerate(exponents)
                 if j != index and abs(other.value - np.conj(mu)) <= tol * max(1.0, abs(mu))),
                None,
            )
            if partner is None:
                raise BasisConstructionError("loxodromic exponent without its conjugate partner")
            done.add(partner)
            upper = mu if mu.imag > 0 else np.conj(mu)
            W = _columns_for(w, V, upper, tol)
            X = np.column_stack([c for u in W.T for c in (u.real, -u.imag)])
            stable = np.hstack([_columns_for(w, V, -upper, tol), _columns_for(w, V, -np.conj(upper), tol)])
            Ys = _real_span(stable, 2 * d)
            Y = _pair_with(X, Ys, J)
            terms = []
            for k in range(d):
                terms.append(("loxodromic-real", upper.real, 0, index, ("xxi", 2 * k, 2 * k + 1)))
                terms.append(("loxodromic-rotation", upper.imag, 0, index, ("rot", 2 * k, 2 * k + 1)))
            yield X, Y, terms


def _pattern_matrix(pattern, offset: int, m: int) -> np.ndarray:
    """Symmetric Q in adapted coordinates z = (x_1..x_m, xi_1..xi_m) with iota(z) = z^T Q z."""
    Q = np.zeros((2 * m, 2 * m))
    kind = pattern[0]
    if kind == "harmonic":
        i = offset + pattern[1]
        Q[i, i] = Q[m + i, m + i] = 0.5
    elif kind == "xxi":
        for i in [offset + p for p in pattern[1:]]:
            Q[i, m + i] = Q[m + i, i] = 0.5
    else:
        i, j = offset + pattern[1], offset + pattern[2]
        # x_i xi_j - x_j xi_i
        Q[i, m + j] = Q[m + j, i] = 0.5
        Q[j, m + i] = Q[m + i, j] = -0.5
    return Q


def quadratic_form_b(B: np.ndarray, tol: float = 1e-7) -> QuadraticForm:
    """b_matrix with b(rho) = rho^T b_matrix rho and its decomposition into action coordinates."""
    B = np.asarray(B, dtype=float)
    dim = B.shape[0]
    m = dim // 2
    J = standard_j(m)
    JtB = J.T @ B
    b_matrix = 0.25 * (JtB + JtB.T)

    exponents = floquet_exponents(B, tol)
    xs, ys, entries = [], [], []
    offset = 0
    for X, Y, terms in _mode_blocks(B, exponents, tol):
        xs.append(X)
        ys.append(Y)
        entries += [(term, offset) for term in terms]
        offset += X.shape[1]
    if offset != m:
        raise BasisConstructionError(f"adapted basis has {offset} x-vectors, expected {m}")
    S = np.hstack(xs + ys)
    basis_residual = float(np.max(np.abs(S.T @ J @ S - J)))

    S_inv = -J @ S.T @ J
    coordinates = []
    for (kind, coefficient, sign, index, pattern), block_offset in entries:
        Q = _pattern_matrix(pattern, block_offset, m)
        coordinates.append(ActionCoordinate(kind, S_inv.T @ Q @ S_inv, float(coefficient), index, sign))

    reconstruction = sum(c.coefficient * c.matrix for c in coordinates)
    scale = max(1.0, float(np.max(np.abs(b_matrix))))
    residual = float(np.max(np.abs(b_matrix - reconstruction))) / scale
    if residual > DECOMPOSITION_TOLERANCE or basis_residual > 1e-8:
        raise BasisConstructionError(
            f"decomposition of b into action coordinates has residual {residual:.3e}",
            context={"residual": residual, "basis_residual": basis_residual},
        )
    return QuadraticForm(b_matrix, coordinates, S, residual)
