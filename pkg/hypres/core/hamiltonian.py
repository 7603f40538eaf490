"""
Hamiltonian systems on T*R^n: evaluation of H0, its gradient and Hessian,
and the Hamilton vector field X_H = J grad H0.

Derivatives fall back to central finite differences when no closed form is
supplied.
"""

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Tuple

import numpy as np

from hypres.core.phase_space import PhasePoint, standard_j
from hypres.utils.error_manager import ConfigurationError, EvaluationError

ScalarField = Callable[[np.ndarray], float]
VectorField = Callable[[np.ndarray], np.ndarray]
MatrixField = Callable[[np.ndarray], np.ndarray]

_EPS = np.finfo(float).eps
_FIRST_STEP = _EPS ** (1.0 / 3.0)
_SECOND_STEP = _EPS ** (1.0 / 4.0)


@dataclass(frozen=True)
class HamiltonianSystem:
    """
    Evaluator bundle for H0 (and optionally H1) on phase space.

    All callables take the flat phase vector rho = (x, xi) of length 2n and
    must be pure. `periods` gives, per configuration coordinate, the period
    of an angle variable or None.
    """

    n: int
    h0: ScalarField
    grad_h0: Optional[VectorField] = None
    hess_h0: Optional[MatrixField] = None
    h1: Optional[ScalarField] = None
    periods: Tuple[Optional[float], ...] = ()
    name: str = "custom"
    seed: Optional[Callable[[float], PhasePoint]] = field(default=None, compare=False)
    default_segments: int = 1
    spec: Optional[object] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"a Hamiltonian system needs n >= 1, got {self.n}")
        periods = tuple(self.periods) if self.periods else (None,) * self.n
        if len(periods) != self.n:
            raise ValueError(f"periods must have length n={self.n}, got {len(periods)}")
        object.__setattr__(self, "periods", periods)

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def has_analytic_gradient(self) -> bool:
        return self.grad_h0 is not None

    @property
    def has_analytic_hessian(self) -> bool:
        return self.hess_h0 is not None

    def seed_point(self, E: float) -> PhasePoint:
        """Model-provided starting guess for the orbit at energy E."""
        if self.seed is None:
            raise ConfigurationError(f"system {self.name!r} has no built-in seed; supply seed_point")
        return self.seed(E)

    def energy(self, rho: np.ndarray) -> float:
        value = float(self.h0(rho))
        if not np.isfinite(value):
            raise EvaluationError("H0 is not finite", point=rho)
        return value

    def subprincipal(self, rho: np.ndarray) -> float:
        if self.h1 is None:
            return 0.0
        return float(self.h1(rho))

    def gradient(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        if self.grad_h0 is not None:
            grad = np.asarray(self.grad_h0(rho), dtype=float)
        else:
            grad = finite_difference_gradient(self.h0, rho)
        if grad.shape != (self.dim,) or not np.all(np.isfinite(grad)):
            raise EvaluationError("gradient of H0 is not finite", point=rho)
        return grad

    def hessian(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        if self.hess_h0 is not None:
            hess = np.asarray(self.hess_h0(rho), dtype=float)
        elif self.grad_h0 is not None:
            hess = finite_difference_jacobian(self.gradient, rho)
        else:
            hess = finite_difference_hessian(self.h0, rho)
        if hess.shape != (self.dim, self.dim) or not np.all(np.isfinite(hess)):
            raise EvaluationError("Hessian of H0 is not finite", point=rho)
        return 0.5 * (hess + hess.T)

    def vector_field(self, rho: np.ndarray) -> np.ndarray:
        """X_H(rho) = J grad H0(rho) = (dH0/dxi, -dH0/dx)."""
        grad = self.gradient(rho)
        n = self.n
        return np.concatenate([grad[n:], -grad[:n]])

    def linearized_generator(self, rho: np.ndarray) -> np.ndarray:
        """J H0''(rho), the matrix of the variational equation."""
        return standard_j(self.n) @ self.hessian(rho)


def _steps(rho: np.ndarray, base: float) -> np.ndarray:
    return base * np.maximum(1.0, np.abs(rho))


def finite_difference_gradient(f: ScalarField, rho: np.ndarray, step: Optional[float] = None) -> np.ndarray:
    """Central differences with step eps^(1/3) * max(1, |rho_i|)."""
    rho = np.asarray(rho, dtype=float)
    steps = _steps(rho, _FIRST_STEP) if step is None else np.full(rho.size, step)
    grad = np.empty(rho.size)
    for i, h in enumerate(steps):
        e = np.zeros(rho.size)
        e[i] = h
        grad[i] = (f(rho + e) - f(rho - e)) / (2.0 * h)
    return grad


def finite_difference_jacobian(F: VectorField, rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    steps = _steps(rho, _FIRST_STEP)
    columns = []
    for i, h in enumerate(steps):
        e = np.zeros(rho.size)
        e[i] = h
        columns.append((np.asarray(F(rho + e)) - np.asarray(F(rho - e))) / (2.0 * h))
    return np.column_stack(columns)


def finite_difference_hessian(f: ScalarField, rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    size = rho.size
    steps = _steps(rho, _SECOND_STEP)
    hess = np.empty((size, size))
    for i in range(size):
        ei = np.zeros(size)
        ei[i] = steps[i]
        for j in range(i, size):
            ej = np.zeros(size)
            ej[j] = steps[j]
            value = (
                f(rho + ei + ej) - f(rho + ei - ej) - f(rho - ei + ej) + f(rho - ei - ej)
            ) / (4.0 * steps[i] * steps[j])
            hess[i, j] = hess[j, i] = value
    return hess


def hamilton_vector_field(sys: HamiltonianSystem, p: PhasePoint) -> np.ndarray:
    """Return X_H(p) = (dH0/dxi, -dH0/dx) as a vector of length 2n."""
    return sys.vector_field(p.as_vector())


def verify_gradient(sys: HamiltonianSystem, points: Iterable[np.ndarray],
                    step: float = 1e-6, rtol: float = 1e-5) -> float:
    """
    Compare the supplied gradient with central differences of h0.

    Returns the largest relative discrepancy max|g - g_fd| / max(1, |g|_inf);
    raises ValueError when it exceeds rtol.
    """
    worst = 0.0
    for rho in points:
        rho = np.asarray(rho, dtype=float)
        analytic = sys.gradient(rho)
        numeric = finite_difference_gradient(sys.h0, rho, step=step)
        scale = max(1.0, float(np.max(np.abs(analytic))))
        worst = max(worst, float(np.max(np.abs(analytic - numeric))) / scale)
    if worst > rtol:
        raise ValueError(f"gradient check failed: relative discrepancy {worst:.3e} > {rtol:.1e}")
    return worst
