"""
Periodic orbits at fixed energy.

Orbits are located by damped Gauss-Newton on a multiple-shooting system:
unknowns are the segment start points rho_0..rho_{K-1} and the period T,
constrained by segment continuity, H0(rho_0) = E and a transversal section
through the guess.
"""

from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, Optional

import numpy as np
import structlog

from hypres.core.hamiltonian import HamiltonianSystem
from hypres.core.phase_space import PhasePoint, wrap_difference
from hypres.dynamics.integrator import (
    IntegratorOptions,
    Trajectory,
    integrate,
    integrate_variational,
)
from hypres.dynamics.sections import Section, section_crossing
from hypres.utils.config import HypresSettings, get_config
from hypres.utils.error_manager import (
    DegenerateSectionError,
    EvaluationError,
    IntegrationError,
    NonConvergenceError,
)

logger = structlog.get_logger()

# Armijo constant and damping limit
ARMIJO_C = 1e-4
MAX_HALVINGS = 10

# closure and energy acceptance for a converged orbit
CLOSURE_TOLERANCE = 1e-8
ENERGY_TOLERANCE = 1e-10
TRANSVERSALITY_TOLERANCE = 1e-6


@dataclass(frozen=True)
class OrbitOptions:
    integrator: IntegratorOptions = field(default_factory=IntegratorOptions)
    max_newton_steps: int = 40
    tolerance: float = 1e-11
    samples: int = 256
    segments: Optional[int] = None

    @classmethod
    def from_settings(cls, settings: Optional[HypresSettings] = None, **overrides) -> "OrbitOptions":
        settings = settings or get_config()
        values: Dict[str, Any] = dict(
            integrator=IntegratorOptions.from_settings(settings),
            max_newton_steps=settings.max_newton_steps,
            tolerance=settings.newton_tolerance,
            samples=settings.orbit_samples,
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True)
class PeriodicOrbit:
    """A closed trajectory gamma_E with its period, action and reference point."""

    energy: float
    period: float
    ref_point: PhasePoint
    section_normal: np.ndarray
    samples: Trajectory
    action: float
    closure_residual: float
    newton_steps: int = 0
    segments: int = 1
    system: Optional[HamiltonianSystem] = field(default=None, compare=False, repr=False)

    @property
    def energy_residual(self) -> float:
        if self.system is None:
            return float("nan")
        return abs(self.system.energy(self.ref_point.as_vector()) - self.energy)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "energy": self.energy,
            "period": self.period,
            "action": self.action,
            "closure_residual": self.closure_residual,
            "ref_point": self.ref_point.to_dict(),
            "section_normal": [float(v) for v in self.section_normal],
            "newton_steps": self.newton_steps,
            "segments": self.segments,
            "samples": {
                "times": [float(t) for t in self.samples.times],
                "states": [[float(v) for v in row] for row in self.samples.states],
                "energy_drift": self.samples.energy_drift,
            },
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], system: Optional[HamiltonianSystem] = None) -> "PeriodicOrbit":
        samples = data["samples"]
        states = np.asarray(samples["states"], dtype=float)
        times = np.asarray(samples["times"], dtype=float)
        ref_point = PhasePoint.from_dict(data["ref_point"])
        if states.ndim != 2 or states.shape[0] != times.size or states.shape[1] != 2 * ref_point.n:
            raise ValueError("orbit samples have inconsistent shapes")
        return cls(
            energy=float(data["energy"]),
            period=float(data["period"]),
            ref_point=ref_point,
            section_normal=np.asarray(data["section_normal"], dtype=float),
            samples=Trajectory(times, states, float(samples["energy_drift"])),
            action=float(data["action"]),
            closure_residual=float(data["closure_residual"]),
            newton_steps=int(data.get("newton_steps", 0)),
            segments=int(data.get("segments", 1)),
            system=system,
        )


def action(orbit: PeriodicOrbit) -> float:
    """
    S = loop integral of xi . dx = int_0^T xi . dH0/dxi dt.

    The integrand is periodic, so the trapezoid rule on the uniform samples is
    spectrally accurate.
    """
    if orbit.system is None:
        raise ValueError("orbit is not attached to a system")
    n = orbit.system.n
    states = orbit.samples.states[:-1]
    integrand = [row[n:] @ orbit.system.gradient(row)[n:] for row in states]
    return float(orbit.period * np.mean(integrand))


def orbit_average(f: Optional[Callable[[np.ndarray], float]], orbit: PeriodicOrbit) -> float:
    """(1/T) int_0^T f(Phi^t(rho_E)) dt by the periodic trapezoid rule; zero when f is None."""
    if f is None:
        return 0.0
    return float(np.mean([f(row) for row in orbit.samples.states[:-1]]))


class _ShootingProblem:
    """Residual and Jacobian of the multiple-shooting system."""

    def __init__(self, sys: HamiltonianSystem, E: float, section: Section, segments: int,
                 opts: IntegratorOptions):
        self.sys = sys
        self.E = E
        self.section = section
        self.K = segments
        self.opts = opts
        self.dim = sys.dim

    def pack(self, points, T):
        return np.concatenate([np.concatenate(points), [T]])

    def unpack(self, z):
        dim, K = self.dim, self.K
        return [z[k * dim:(k + 1) * dim] for k in range(K)], float(z[-1])

    def evaluate(self, z, with_jacobian: bool = True):
        sys, dim, K = self.sys, self.dim, self.K
        points, T = self.unpack(z)
        if T <= 0.0:
            raise NonConvergenceError("period became non-positive during Newton", residual=np.inf)
        tau = T / K
        F = np.zeros(dim * K + 2)
        DF = np.zeros((dim * K + 2, dim * K + 1)) if with_jacobian else None
        for k, rho in enumerate(points):
            nxt = (k + 1) % K
            p0 = PhasePoint.from_vector(rho)
            end = integrate(sys, p0, tau, self.opts).states[-1]
            if with_jacobian:
                var = integrate_variational(sys, p0, tau, self.opts)
                rows = slice(k * dim, (k + 1) * dim)
                DF[rows, k * dim:(k + 1) * dim] += var.fundamental_matrix
                DF[rows, nxt * dim:(nxt + 1) * dim] -= np.eye(dim)
                DF[rows, -1] = sys.vector_field(end) / K
            F[k * dim:(k + 1) * dim] = wrap_difference(end - points[nxt], sys.periods)
        F[-2] = sys.energy(points[0]) - self.E
        F[-1] = self.section.value(points[0])
        if with_jacobian:
            DF[-2, :dim] = sys.gradient(points[0])
            DF[-1, :dim] = self.section.normal
        return F, DF


def _initial_points(sys, rho, T, K, opts):
    if K == 1:
        return [rho.copy()]
    t_eval = np.linspace(0.0, T, K + 1)[:-1]
    traj = integrate(sys, PhasePoint.from_vector(rho), T, opts, t_eval=t_eval)
    return [row.copy() for row in traj.states]


def find_periodic_orbit(sys: HamiltonianSystem, guess: PhasePoint, E: float,
                        opts: Optional[OrbitOptions] = None,
                        period_guess: Optional[float] = None,
                        section_normal: Optional[np.ndarray] = None) -> PeriodicOrbit:
    """
    Locate the periodic orbit at energy E near guess.

    The phase condition is the section through guess with normal
    section_normal, X_H(guess) by default. Any normal transversal to the flow
    at guess locates the same orbit.
    """
    opts = opts or OrbitOptions.from_settings()
    K = opts.segments or sys.default_segments
    rho_g = guess.as_vector()
    X_g = sys.vector_field(rho_g)
    speed = float(np.linalg.norm(X_g))
    if speed < 1e-12:
        raise DegenerateSectionError(
            "X_H vanishes at the guess; H0 is not of principal type there",
            context={"guess": guess.to_dict()},
        )
    section = Section.through(sys, rho_g, section_normal)
    if abs(section.normal @ X_g) < TRANSVERSALITY_TOLERANCE * np.linalg.norm(section.normal) * speed:
        raise DegenerateSectionError("section normal is tangent to the flow at the guess",
                                     context={"guess": guess.to_dict()})

    if period_guess is None:
        period_guess, _ = section_crossing(sys, guess, section, direction=1, opts=opts.integrator)
    logger.info("orbit search", system=sys.name, energy=E, period_guess=period_guess, segments=K)

    problem = _ShootingProblem(sys, E, section, K, opts.integrator)
    z = problem.pack(_initial_points(sys, rho_g, period_guess, K, opts.integrator), period_guess)
    F, DF = problem.evaluate(z)
    norm = float(np.linalg.norm(F))
    steps = 0
    while norm > opts.tolerance:
        if steps >= opts.max_newton_steps:
            if norm <= CLOSURE_TOLERANCE * 0.1:
                break
            raise NonConvergenceError(
                f"Newton did not converge in {opts.max_newton_steps} steps", residual=norm,
                context={"energy": E},
            )
        delta = np.linalg.lstsq(DF, -F, rcond=None)[0]
        lam = 1.0
        accepted = False
        for _ in range(MAX_HALVINGS):
            trial = z + lam * delta
            try:
                F_trial, _ = problem.evaluate(trial, with_jacobian=False)
                trial_norm = float(np.linalg.norm(F_trial))
            except (NonConvergenceError, IntegrationError, EvaluationError):
                trial_norm = np.inf
            if trial_norm ** 2 <= (1.0 - 2.0 * ARMIJO_C * lam) * norm ** 2:
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            if norm <= CLOSURE_TOLERANCE * 0.1:
                logger.info("Newton stalled at the integration noise floor", residual=norm)
                break
            raise NonConvergenceError(
                "Newton stagnated: no residual decrease over damped steps", residual=norm,
                context={"energy": E, "newton_steps": steps},
            )
        z = trial
        steps += 1
        F, DF = problem.evaluate(z)
        norm = float(np.linalg.norm(F))
        logger.debug("newton step", step=steps, residual=norm, step_length=lam)

    points, T = problem.unpack(z)
    return _assemble_orbit(sys, points[0], T, E, section, opts, steps, K)


def _assemble_orbit(sys, rho_E, T, E, section, opts, steps, K) -> PeriodicOrbit:
    energy_residual = abs(sys.energy(rho_E) - E)
    if energy_residual > ENERGY_TOLERANCE:
        raise NonConvergenceError(
            f"orbit energy residual {energy_residual:.3e} exceeds {ENERGY_TOLERANCE:.0e}",
            residual=energy_residual, context={"energy": E, "period": T},
        )
    X = sys.vector_field(rho_E)
    speed = float(np.linalg.norm(X))
    if abs(section.normal @ X) < TRANSVERSALITY_TOLERANCE * np.linalg.norm(section.normal) * speed:
        raise DegenerateSectionError("orbit is tangent to the search section",
                                     context={"energy": E, "period": T})

    t_eval = np.linspace(0.0, T, opts.samples + 1)
    samples = integrate(sys, PhasePoint.from_vector(rho_E), T, opts.integrator, t_eval=t_eval)
    closure = float(np.linalg.norm(wrap_difference(samples.states[-1] - rho_E, sys.periods)))
    if closure > CLOSURE_TOLERANCE:
        raise NonConvergenceError(
            f"orbit closure residual {closure:.3e} exceeds {CLOSURE_TOLERANCE:.0e}", residual=closure,
            context={"energy": E, "period": T},
        )
    orbit = PeriodicOrbit(
        energy=float(E),
        period=float(T),
        ref_point=PhasePoint.from_vector(rho_E),
        section_normal=X / speed,
        samples=samples,
        action=0.0,
        closure_residual=closure,
        newton_steps=steps,
        segments=K,
        system=sys,
    )
    orbit = replace(orbit, action=action(orbit))
    logger.info("orbit found", system=sys.name, energy=E, period=orbit.period,
                action=orbit.action, closure_residual=closure, newton_steps=steps)
    return orbit


def monodromy(sys: HamiltonianSystem, orbit: PeriodicOrbit, phase: float = 0.0,
              opts: Optional[IntegratorOptions] = None):
    """
    Variational result over one period starting at Phi^{phase*T}(rho_E).

    Returns (base point, VariationalResult).
    """
    opts = opts or IntegratorOptions.from_settings()
    base = orbit.ref_point
    if phase:
        base = integrate(sys, orbit.ref_point, phase * orbit.period, opts).endpoint
    return base, integrate_variational(sys, base, orbit.period, opts)


def reintegration_drift(sys: HamiltonianSystem, orbit: PeriodicOrbit,
                        opts: Optional[IntegratorOptions] = None, factor: float = 10.0) -> float:
    """Change of the closure residual when one period is re-integrated at tighter tolerances."""
    opts = (opts or IntegratorOptions.from_settings()).tightened(factor)
    end = integrate(sys, orbit.ref_point, orbit.period, opts).states[-1]
    rho = orbit.ref_point.as_vector()
    closure = float(np.linalg.norm(wrap_difference(end - rho, sys.periods)))
    return abs(closure - orbit.closure_residual)
