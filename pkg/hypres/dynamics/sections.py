"""
Poincare sections {<c, rho - rho_ref> = 0} and first-crossing search.
"""

from dataclasses import dataclass, field
from itertools import product
from typing import Optional, Tuple

import numpy as np
import structlog
from scipy.integrate import DOP853
from scipy.optimize import brentq

from hypres.core.hamiltonian import HamiltonianSystem
from hypres.core.phase_space import PhasePoint, wrap_difference
from hypres.dynamics.integrator import IntegratorOptions, flow_map
from hypres.utils.error_manager import EvaluationError, IntegrationError, SearchError

logger = structlog.get_logger()

# |g| accepted on the section after refinement
SECTION_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Section:
    """Affine hyperplane through rho_ref with normal c; periodic coordinates are wrapped."""

    normal: np.ndarray
    ref: np.ndarray
    periods: Tuple[Optional[float], ...] = field(default=())

    def __post_init__(self):
        normal = np.array(self.normal, dtype=float).reshape(-1)
        ref = np.array(self.ref, dtype=float).reshape(-1)
        if normal.shape != ref.shape:
            raise ValueError("section normal and reference point must have the same length")
        if not np.any(normal):
            raise ValueError("section normal must be nonzero")
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "ref", ref)
        object.__setattr__(self, "periods", tuple(self.periods))

    @classmethod
    def through(cls, sys: HamiltonianSystem, rho_ref: np.ndarray, normal: Optional[np.ndarray] = None) -> "Section":
        """Section through rho_ref with unit normal; the default normal is X_H(rho_ref)."""
        normal = sys.vector_field(rho_ref) if normal is None else np.asarray(normal, dtype=float)
        length = np.linalg.norm(normal)
        if length == 0.0:
            raise ValueError("section normal must be nonzero")
        return cls(normal / length, rho_ref, sys.periods)

    def value(self, rho: np.ndarray) -> float:
        return float(self.normal @ wrap_difference(np.asarray(rho) - self.ref, self.periods))


def _refine(sys: HamiltonianSystem, section: Section, t: float, rho: np.ndarray,
            opts: IntegratorOptions, max_iter: int = 4) -> Tuple[float, np.ndarray]:
    """Newton on t -> <c, Phi^t - rho_ref> using the derivative <c, X_H>."""
    for _ in range(max_iter):
        g = section.value(rho)
        if abs(g) <= SECTION_TOLERANCE:
            break
        slope = float(section.normal @ sys.vector_field(rho))
        if slope == 0.0:
            break
        dt = -g / slope
        rho = flow_map(sys, rho, dt, opts)
        t += dt
    return t, rho


def _wrapped_axes(section: Section):
    """(index, period) of the periodic coordinates the section normal sees."""
    return [(i, p) for i, p in enumerate(section.periods) if p and section.normal[i] != 0.0]


def _crossing_in_step(section: Section, axes, dense, t_a: float, t_b: float,
                      direction: int) -> Optional[float]:
    """
    Earliest section crossing in [t_a, t_b] with the wanted orientation.

    The displacement from the reference is lifted continuously from t_a, so
    a wrap of an angle is never read as a sign change. Each shifted copy of
    the hyperplane is searched and a root counts only when its lifted
    displacement lies in the fundamental domain of every periodic axis.
    """
    y_a = dense(t_a)
    d_a = wrap_difference(y_a - section.ref, section.periods)
    shift_sets = []
    for i, p in axes:
        d_b = d_a[i] + dense(t_b)[i] - y_a[i]
        lo, hi = sorted((d_a[i], d_b))
        shift_sets.append(list(range(int(np.round(lo / p)), int(np.round(hi / p)) + 1)))

    best = None
    for shifts in product(*shift_sets):
        offset = np.zeros_like(d_a)
        for (i, p), m in zip(axes, shifts):
            offset[i] = m * p

        def g(s, offset=offset):
            return float(section.normal @ (d_a + dense(s) - y_a - offset))

        g_a, g_b = g(t_a), g(t_b)
        if g_a == 0.0 or np.sign(g_a) == np.sign(g_b):
            continue
        if direction and (direction > 0) != (g_b > g_a):
            continue
        t_star = t_b if g_b == 0.0 else brentq(g, t_a, t_b, xtol=1e-15, rtol=1e-15)
        lifted = d_a + dense(t_star) - y_a - offset
        if any(abs(lifted[i]) > 0.5 * p * (1.0 + 1e-9) for i, p in axes):
            continue
        if best is None or t_star < best:
            best = t_star
    return best


def section_crossing(sys: HamiltonianSystem, p0: PhasePoint, section: Section, direction: int = 1,
                     opts: Optional[IntegratorOptions] = None,
                     horizon: Optional[float] = None) -> Tuple[float, PhasePoint]:
    """
    First time t > 0 at which the flow from p0 crosses the section with the
    sign of d/dt <c, Phi^t> given by direction (+1, -1, or 0 for either).

    A zero of the section function at t = 0 is not a crossing.
    """
    opts = opts or IntegratorOptions.from_settings()
    horizon = opts.horizon if horizon is None else horizon
    if direction not in (-1, 0, 1):
        raise ValueError("direction must be -1, 0 or 1")

    def rhs(t, rho):
        return sys.vector_field(rho)

    axes = _wrapped_axes(section)
    solver = DOP853(rhs, 0.0, p0.as_vector(), horizon, rtol=opts.rtol, atol=opts.atol,
                    max_step=opts.max_step)

    while solver.status == "running":
        t_old, y_old = solver.t, solver.y.copy()
        try:
            message = solver.step()
        except EvaluationError as e:
            raise IntegrationError(f"flow left the domain during section search: {e.message}",
                                   t_last=t_old, state_last=y_old)
        if solver.status == "failed":
            raise IntegrationError(f"section search failed: {message}", t_last=t_old, state_last=y_old)

        dense = solver.dense_output()
        # angles move at most an eighth of a period between checks
        travel = max([abs(solver.y[i] - y_old[i]) / p for i, p in axes] or [0.0])
        nodes = np.linspace(t_old, solver.t, max(1, int(np.ceil(8.0 * travel))) + 1)
        for t_a, t_b in zip(nodes[:-1], nodes[1:]):
            t_star = _crossing_in_step(section, axes, dense, t_a, t_b, direction)
            if t_star is None:
                continue
            rho_star = flow_map(sys, y_old, t_star - t_old, opts)
            t_star, rho_star = _refine(sys, section, t_star, rho_star, opts)
            logger.debug("section crossing", system=sys.name, t=t_star,
                         residual=section.value(rho_star))
            return float(t_star), PhasePoint.from_vector(rho_star)

    raise SearchError(
        f"no crossing of the section within horizon {horizon}",
        context={"horizon": float(horizon), "direction": int(direction)},
    )
