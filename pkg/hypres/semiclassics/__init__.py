"""Leading-order resonance strings built from an orbit family and its Floquet exponents."""

from hypres.semiclassics.resonances import (
    ResonanceEntry,
    ResonanceQuery,
    ResonanceString,
    admissible_k_range,
    longitudinal_anchor,
    resonance_strings,
    string_report,
)

__all__ = [
    "ResonanceEntry",
    "ResonanceQuery",
    "ResonanceString",
    "admissible_k_range",
    "longitudinal_anchor",
    "resonance_strings",
    "string_report",
]
