"""
Integration of the Hamiltonian flow and of the variational equations.

The adaptive path uses scipy's embedded Runge-Kutta solvers (DOP853 by
default); the "gauss-legendre" method switches to the fixed-step collocation
integrator in hypres.dynamics.gauss_legendre.
"""

from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
import structlog
from scipy.integrate import solve_ivp

from hypres.core.hamiltonian import HamiltonianSystem
from hypres.core.phase_space import PhasePoint, SymplecticForm
from hypres.dynamics.gauss_legendre import integrate_gauss_legendre
from hypres.utils.config import HypresSettings, get_config
from hypres.utils.error_manager import EvaluationError, IntegrationError

logger = structlog.get_logger()

ADAPTIVE_METHODS = ("DOP853", "RK45", "Radau")


@dataclass(frozen=True)
class IntegratorOptions:
    """Tolerances and method selection shared by every integration call."""

    rtol: float = 1e-10
    atol: float = 1e-12
    method: str = "DOP853"
    max_step: float = np.inf
    horizon: float = 100.0
    max_energy_drift_rate: Optional[float] = 1e-6
    gauss_legendre_step: float = 1e-2
    gauss_legendre_stages: int = 3

    def __post_init__(self):
        if self.method not in ADAPTIVE_METHODS + ("gauss-legendre",):
            raise ValueError(f"unsupported integration method {self.method!r}")
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("integration tolerances must be positive")

    @classmethod
    def from_settings(cls, settings: Optional[HypresSettings] = None, **overrides) -> "IntegratorOptions":
        settings = settings or get_config()
        values = dict(
            rtol=settings.rtol,
            atol=settings.atol,
            method=settings.method,
            horizon=settings.horizon,
            max_energy_drift_rate=settings.max_energy_drift_rate,
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def tightened(self, factor: float = 10.0) -> "IntegratorOptions":
        """Same options with both tolerances divided by factor (re-integration checks)."""
        return replace(self, rtol=self.rtol / factor, atol=self.atol / factor,
                       gauss_legendre_step=self.gauss_legendre_step / factor ** 0.25)


@dataclass(frozen=True)
class Trajectory:
    """
    Sampled solution of the flow.

    `times` are strictly monotone in the direction of integration (increasing
    for t_final > 0). `states` has one row rho = (x, xi) per time.
    """

    times: np.ndarray
    states: np.ndarray
    energy_drift: float
    solution: Optional[object] = field(default=None, compare=False, repr=False)

    @property
    def n(self) -> int:
        return self.states.shape[1] // 2

    @property
    def points(self) -> List[PhasePoint]:
        return [PhasePoint.from_vector(row) for row in self.states]

    @property
    def endpoint(self) -> PhasePoint:
        return PhasePoint.from_vector(self.states[-1])

    def at(self, t: float) -> np.ndarray:
        """Dense-output state at time t (adaptive methods only)."""
        if self.solution is None:
            raise ValueError("trajectory was integrated without dense output")
        return np.asarray(self.solution(t))

    def to_frame(self, sys: HamiltonianSystem) -> pd.DataFrame:
        """Columns t, x_1..x_n, xi_1..xi_n, H0."""
        n = self.n
        columns = {"t": self.times}
        for i in range(n):
            columns[f"x_{i + 1}"] = self.states[:, i]
        for i in range(n):
            columns[f"xi_{i + 1}"] = self.states[:, n + i]
        columns["H0"] = [sys.energy(row) for row in self.states]
        return pd.DataFrame(columns)


@dataclass(frozen=True)
class VariationalResult:
    """Endpoint of the flow together with the fundamental matrix dPhi^t(p0)."""

    endpoint: PhasePoint
    fundamental_matrix: np.ndarray
    symplectic_residual: float
    energy_drift: float = 0.0

    @property
    def relative_symplectic_residual(self) -> float:
        scale = max(1.0, float(np.linalg.norm(self.fundamental_matrix, 2)) ** 2)
        return self.symplectic_residual / scale


def _flow_rhs(sys: HamiltonianSystem):
    def rhs(t, rho):
        return sys.vector_field(rho)
    return rhs


def _variational_rhs(sys: HamiltonianSystem):
    dim = sys.dim

    def rhs(t, y):
        rho = y[:dim]
        M = y[dim:].reshape(dim, dim)
        dM = sys.linearized_generator(rho) @ M
        return np.concatenate([sys.vector_field(rho), dM.ravel()])
    return rhs


def _solve(sys: HamiltonianSystem, rhs, y0: np.ndarray, t_final: float, opts: IntegratorOptions,
           t_eval=None, dense: bool = False):
    """Run the configured method and return (times, states, dense solution or None)."""
    if opts.method == "gauss-legendre":
        times, states = integrate_gauss_legendre(
            rhs, y0, t_final, opts.gauss_legendre_step, opts.gauss_legendre_stages, t_eval=t_eval
        )
        return times, states, None

    try:
        sol = solve_ivp(
            rhs, (0.0, t_final), y0,
            method=opts.method, rtol=opts.rtol, atol=opts.atol, max_step=opts.max_step,
            t_eval=t_eval, dense_output=dense,
        )
    except EvaluationError as e:
        raise IntegrationError(f"flow left the domain of {sys.name}: {e.message}",
                               state_last=e.point, context=e.context)
    if sol.status < 0:
        t_last = float(sol.t[-1]) if sol.t.size else 0.0
        state_last = sol.y[: sys.dim, -1] if sol.y.size else y0[: sys.dim]
        raise IntegrationError(f"integration failed: {sol.message}", t_last=t_last, state_last=state_last)
    return sol.t, sol.y.T, sol.sol


def _check_drift(sys: HamiltonianSystem, states: np.ndarray, t_final: float,
                 opts: IntegratorOptions) -> float:
    e0 = sys.energy(states[0, : sys.dim])
    drift = max(abs(sys.energy(row[: sys.dim]) - e0) for row in states)
    if opts.max_energy_drift_rate is not None:
        bound = opts.max_energy_drift_rate * max(1.0, abs(t_final)) * max(1.0, abs(e0))
        if drift > bound:
            raise IntegrationError(
                f"energy drift {drift:.3e} exceeds {bound:.3e}",
                t_last=t_final, state_last=states[-1, : sys.dim],
                context={"energy_drift": drift},
            )
    return float(drift)


def integrate(sys: HamiltonianSystem, p0: PhasePoint, t_final: float,
              opts: Optional[IntegratorOptions] = None, t_eval: Optional[Sequence[float]] = None,
              dense: bool = False) -> Trajectory:
    """Integrate the Hamiltonian flow from p0 for time t_final (either sign)."""
    opts = opts or IntegratorOptions.from_settings()
    if not np.isfinite(t_final):
        raise ValueError("t_final must be finite")
    y0 = p0.as_vector()
    if t_final == 0.0:
        return Trajectory(np.array([0.0]), y0[None, :], 0.0)

    times, states, solution = _solve(sys, _flow_rhs(sys), y0, t_final, opts, t_eval=t_eval, dense=dense)
    drift = _check_drift(sys, states, t_final, opts)
    return Trajectory(np.asarray(times), np.asarray(states), drift, solution)


def integrate_variational(sys: HamiltonianSystem, p0: PhasePoint, t_final: float,
                          opts: Optional[IntegratorOptions] = None) -> VariationalResult:
    """Integrate the flow jointly with dM/dt = J H0''(Phi^t) M, M(0) = Id."""
    opts = opts or IntegratorOptions.from_settings()
    dim = sys.dim
    y0 = np.concatenate([p0.as_vector(), np.eye(dim).ravel()])
    if t_final == 0.0:
        return VariationalResult(p0, np.eye(dim), 0.0)

    times, states, _ = _solve(sys, _variational_rhs(sys), y0, t_final, opts, t_eval=[t_final]
                              if opts.method != "gauss-legendre" else None)
    drift = _check_drift(sys, np.vstack([y0[None, :], states]), t_final, opts)
    final = states[-1]
    M = final[dim:].reshape(dim, dim)
    residual = SymplecticForm(dim).symplectic_residual(M)
    logger.debug("variational run", system=sys.name, t_final=float(t_final),
                 symplectic_residual=residual, energy_drift=drift)
    return VariationalResult(PhasePoint.from_vector(final[:dim]), M, residual, drift)


def flow_map(sys: HamiltonianSystem, rho: np.ndarray, t: float,
             opts: Optional[IntegratorOptions] = None) -> np.ndarray:
    """Phi^t(rho) as a flat vector."""
    return integrate(sys, PhasePoint.from_vector(rho), t, opts).states[-1].copy()
