"""Monodromy reduction, Williamson classification, symplectic logarithm and hypothesis checks."""

from hypres.floquet.reduction import ReducedMonodromy, reduce_monodromy
from hypres.floquet.spectrum import (
    FloquetExponent,
    MultiplierGroup,
    classify_multipliers,
    floquet_exponents,
    symplectic_log,
)
from hypres.floquet.splitting import ActionCoordinate, QuadraticForm, invariant_splitting, quadratic_form_b
from hypres.floquet.analysis import (
    FloquetData,
    FloquetTable,
    analyze_monodromy,
    floquet_at_phase,
    floquet_of_orbit,
)
from hypres.floquet.hypotheses import HypothesisReport, check_hypotheses, degenerate_report, scan_lattice

__all__ = [
    "ReducedMonodromy",
    "reduce_monodromy",
    "FloquetExponent",
    "MultiplierGroup",
    "classify_multipliers",
    "floquet_exponents",
    "symplectic_log",
    "ActionCoordinate",
    "QuadraticForm",
    "invariant_splitting",
    "quadratic_form_b",
    "FloquetData",
    "FloquetTable",
    "analyze_monodromy",
    "floquet_at_phase",
    "floquet_of_orbit",
    "HypothesisReport",
    "check_hypotheses",
    "degenerate_report",
    "scan_lattice",
]
