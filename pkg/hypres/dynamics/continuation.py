"""
Natural-parameter continuation of periodic orbits in energy.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
import structlog
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from hypres.core.hamiltonian import HamiltonianSystem
from hypres.core.phase_space import PhasePoint, wrap_difference
from hypres.dynamics.orbits import OrbitOptions, PeriodicOrbit, find_periodic_orbit
from hypres.utils.error_manager import ConfigurationError, HypresError

logger = structlog.get_logger()

MAX_BISECTIONS = 5
ACTION_IDENTITY_TOLERANCE = 1e-4


@dataclass(frozen=True)
class OrbitFamily:
    """
    Orbits gamma_E on an increasing energy grid with interpolants for T(E) and S(E).

    `boundary` records, per side, the first energy continuation could not reach.
    """

    orbits: List[PeriodicOrbit]
    boundary: Dict[str, Optional[float]] = field(default_factory=lambda: {"lower": None, "upper": None})

    def __post_init__(self):
        if not self.orbits:
            raise ValueError("an orbit family needs at least one orbit")
        energies = np.array([o.energy for o in self.orbits])
        if np.any(np.diff(energies) <= 0):
            raise ValueError("family energies must be strictly increasing")

    @property
    def energies(self) -> np.ndarray:
        return np.array([o.energy for o in self.orbits])

    @property
    def periods(self) -> np.ndarray:
        return np.array([o.period for o in self.orbits])

    @property
    def actions(self) -> np.ndarray:
        return np.array([o.action for o in self.orbits])

    @property
    def energy_range(self):
        return float(self.energies[0]), float(self.energies[-1])

    @property
    def is_partial(self) -> bool:
        return any(v is not None for v in self.boundary.values())

    def period_at(self, E):
        """T(E): cubic spline on the grid (linear or constant on short grids)."""
        Es, Ts = self.energies, self.periods
        if Es.size >= 3:
            return CubicSpline(Es, Ts)(E)
        E = np.asarray(E, dtype=float)
        slope = (Ts[1] - Ts[0]) / (Es[1] - Es[0]) if Es.size == 2 else 0.0
        value = Ts[0] + slope * (E - Es[0])
        return float(value) if value.ndim == 0 else value

    def action_at(self, E, derivative: int = 0):
        """S(E) by Hermite interpolation with S' = T; derivative=1 gives T."""
        Es, Ss, Ts = self.energies, self.actions, self.periods
        if Es.size >= 2:
            return CubicHermiteSpline(Es, Ss, Ts)(E, derivative)
        E = np.asarray(E, dtype=float)
        value = Ss[0] + Ts[0] * (E - Es[0]) if derivative == 0 else Ts[0] + 0.0 * E
        return float(value) if value.ndim == 0 else value

    def contains(self, E: float) -> bool:
        lo, hi = self.energy_range
        return lo <= E <= hi

    def action_identity_residual(self) -> float:
        """max |dS/dE - T| over interior grid points by centered differences."""
        Es, Ss, Ts = self.energies, self.actions, self.periods
        if Es.size < 3:
            return 0.0
        dS = np.gradient(Ss, Es)
        return float(np.max(np.abs(dS[1:-1] - Ts[1:-1])))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"E": self.energies, "T": self.periods, "S": self.actions})


def _predict(history: List[PeriodicOrbit], E: float, periods) -> PhasePoint:
    last = history[-1].ref_point.as_vector()
    if len(history) < 2:
        return PhasePoint.from_vector(last)
    prev = history[-2]
    slope = wrap_difference(last - prev.ref_point.as_vector(), periods) / (history[-1].energy - prev.energy)
    return PhasePoint.from_vector(last + slope * (E - history[-1].energy))


def _predict_period(history: List[PeriodicOrbit], E: float) -> float:
    last = history[-1]
    if len(history) < 2:
        return last.period
    prev = history[-2]
    return last.period + (last.period - prev.period) * (E - last.energy) / (last.energy - prev.energy)


def _march(sys: HamiltonianSystem, seed: PeriodicOrbit, targets: Sequence[float],
           opts: OrbitOptions):
    """Continue from seed through targets in order; returns (orbits, first unreachable energy)."""
    history = [seed]
    reached = []
    for target in targets:
        E_goal = target
        bisections = 0
        while True:
            E_try = E_goal
            try:
                orbit = find_periodic_orbit(sys, _predict(history, E_try, sys.periods), E_try, opts,
                                            period_guess=_predict_period(history, E_try))
            except HypresError as e:
                if bisections >= MAX_BISECTIONS:
                    logger.warning("continuation stopped", system=sys.name, energy=target,
                                   reason=e.message, bisections=bisections)
                    return reached, float(target)
                bisections += 1
                E_goal = 0.5 * (history[-1].energy + E_goal)
                logger.info("continuation step bisected", energy=E_goal, bisections=bisections)
                continue
            history.append(orbit)
            if E_try == target:
                reached.append(orbit)
                break
            # intermediate orbit reached; aim for the target again
            E_goal = target
    return reached, None


def continue_family(sys: HamiltonianSystem, seed: PeriodicOrbit, E_grid: Sequence[float],
                    opts: Optional[OrbitOptions] = None) -> OrbitFamily:
    """
    Continue the seed orbit over E_grid, upward and downward from the seed energy.

    A failed step is retried on halved energy increments, up to five times;
    beyond that the family is returned partial with a boundary marker.
    """
    opts = opts or OrbitOptions.from_settings()
    grid = np.unique(np.asarray(E_grid, dtype=float))
    if grid.size == 0:
        raise ConfigurationError("energy grid is empty")
    matches = np.flatnonzero(np.abs(grid - seed.energy) <= 1e-12 * max(1.0, abs(seed.energy)))
    if matches.size == 0:
        raise ConfigurationError("energy grid must contain the seed energy",
                                 context={"seed_energy": seed.energy})
    i0 = int(matches[0])

    upper, upper_stop = _march(sys, seed, grid[i0 + 1:], opts)
    lower, lower_stop = _march(sys, seed, grid[:i0][::-1], opts)
    family = OrbitFamily(lower[::-1] + [seed] + upper, {"lower": lower_stop, "upper": upper_stop})

    residual = family.action_identity_residual()
    if residual > ACTION_IDENTITY_TOLERANCE:
        logger.warning("action identity dS/dE = T violated on the grid", residual=residual)
    logger.info("family continued", system=sys.name, orbits=len(family.orbits),
                energy_range=family.energy_range, partial=family.is_partial,
                action_identity_residual=residual)
    return family
