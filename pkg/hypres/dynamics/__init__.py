"""Flow integration, Poincare sections, periodic orbits and their continuation in energy."""

from hypres.dynamics.integrator import (
    IntegratorOptions,
    Trajectory,
    VariationalResult,
    integrate,
    integrate_variational,
)
from hypres.dynamics.sections import Section, section_crossing
from hypres.dynamics.orbits import (
    OrbitOptions,
    PeriodicOrbit,
    action,
    find_periodic_orbit,
    monodromy,
    orbit_average,
)
from hypres.dynamics.continuation import OrbitFamily, continue_family

__all__ = [
    "IntegratorOptions",
    "Trajectory",
    "VariationalResult",
    "integrate",
    "integrate_variational",
    "Section",
    "section_crossing",
    "OrbitOptions",
    "PeriodicOrbit",
    "action",
    "find_periodic_orbit",
    "monodromy",
    "orbit_average",
    "OrbitFamily",
    "continue_family",
]
