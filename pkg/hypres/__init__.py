"""
hypres - hyperbolic periodic orbits and leading-order resonance strings

Finds periodic orbits of Hamiltonian systems, continues them in energy,
computes Floquet data of the linearized Poincare map, certifies the
hypotheses the resonance asymptotics rest on, and evaluates the
leading-order resonance strings near the orbit.
"""

__version__ = "0.1.0"
__author__ = "hypres developers"
