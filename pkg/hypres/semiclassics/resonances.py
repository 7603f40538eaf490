"""
Leading-order resonance strings.

Longitudinal Bohr-Sommerfeld condition on the orbit family,

    S(E_k) = 2 pi k h + (pi/2) nu h + h int_0^T H1 dt   (last term optional),

and the transversal ladder

    z_{k,alpha} = E_k - (i h / T(E_k)) sum_j (alpha_j + 1/2) mu_j(E_k),

filtered to the window Re z in the family energy range, 0 < -Im z <= depth(h).
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
import structlog
from scipy.interpolate import CubicSpline

from hypres.dynamics.continuation import OrbitFamily
from hypres.dynamics.orbits import orbit_average
from hypres.floquet.analysis import FloquetData, FloquetTable
from hypres.utils.config import get_config
from hypres.utils.error_manager import ConfigurationError, NoAnchorError

logger = structlog.get_logger()

ANCHOR_TOLERANCE = 1e-12
MAX_ANCHOR_ITERATIONS = 50
WINDOWS = ("power", "log")


@dataclass(frozen=True)
class ResonanceQuery:
    h: float
    k_range: Tuple[int, int]
    delta: float = 1.0
    C: float = 1.0
    alpha_max: int = 0
    maslov_index: int = 0
    include_subprincipal: bool = False
    window: str = "power"
    energy_window: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        if not self.h > 0:
            raise ConfigurationError("Planck parameter h must be positive", context={"h": self.h})
        if not 0.0 < self.delta <= 1.0:
            raise ConfigurationError("window exponent delta must lie in (0, 1]", context={"delta": self.delta})
        if self.C <= 0:
            raise ConfigurationError("window depth constant C must be positive")
        if self.alpha_max < 0:
            raise ConfigurationError("alpha_max must be non-negative")
        lo, hi = (int(v) for v in self.k_range)
        if lo > hi:
            raise ConfigurationError("k_range must be nonempty", context={"k_range": [lo, hi]})
        object.__setattr__(self, "k_range", (lo, hi))
        if self.window not in WINDOWS:
            raise ConfigurationError(f"window must be one of {WINDOWS}")

    @property
    def depth(self) -> float:
        """Depth of the window below the real axis."""
        if self.window == "log":
            return self.C * self.h * math.log(1.0 / self.h)
        return self.C * self.h ** self.delta

    @property
    def ks(self) -> List[int]:
        return list(range(self.k_range[0], self.k_range[1] + 1))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "h": self.h, "delta": self.delta, "C": self.C, "k_range": list(self.k_range),
            "alpha_max": self.alpha_max, "maslov_index": self.maslov_index,
            "include_subprincipal": self.include_subprincipal, "window": self.window,
            "depth": self.depth,
        }


@dataclass(frozen=True)
class ResonanceEntry:
    k: int
    alpha: Tuple[int, ...]
    z: complex
    E_k: float
    width: float
    in_window: bool

    def to_dict(self) -> Dict[str, Any]:
        return {"k": self.k, "alpha": list(self.alpha), "z": self.z, "E_k": self.E_k,
                "width": self.width, "in_window": self.in_window}


@dataclass(frozen=True)
class ResonanceString:
    """All computed (k, alpha) values; `entries` are those inside the window."""

    all_entries: List[ResonanceEntry] = field(default_factory=list)
    transversal_modes: int = 0

    @property
    def entries(self) -> List[ResonanceEntry]:
        return [e for e in self.all_entries if e.in_window]

    @property
    def excluded(self) -> List[ResonanceEntry]:
        return [e for e in self.all_entries if not e.in_window]

    @property
    def excluded_count(self) -> int:
        return len(self.excluded)

    def to_frame(self, in_window_only: bool = False) -> pd.DataFrame:
        rows = []
        for e in (self.entries if in_window_only else self.all_entries):
            row: Dict[str, Any] = {"k": e.k}
            for j, a in enumerate(e.alpha):
                row[f"alpha_{j + 1}"] = a
            row.update({"re_z": e.z.real, "im_z": e.z.imag, "width": e.width,
                        "E_k": e.E_k, "in_window": e.in_window})
            rows.append(row)
        columns = (["k"] + [f"alpha_{j + 1}" for j in range(self.transversal_modes)]
                   + ["re_z", "im_z", "width", "E_k", "in_window"])
        return pd.DataFrame(rows, columns=columns)


def subprincipal_integral(family: OrbitFamily) -> Callable[[float], float]:
    """E -> int_0^T H1(Phi^t(rho_E)) dt, interpolated over the family grid."""
    values = []
    for orbit in family.orbits:
        h1 = orbit.system.h1 if orbit.system is not None else None
        values.append(orbit.period * orbit_average(h1, orbit))
    values = np.asarray(values)
    if not np.any(values):
        return lambda E: 0.0
    if values.size >= 3:
        spline = CubicSpline(family.energies, values)
        return lambda E: float(spline(E))
    if values.size == 2:
        return lambda E: float(np.interp(E, family.energies, values))
    return lambda E: float(values[0])


def _anchor_target(k: int, q: ResonanceQuery, shift: float) -> float:
    return 2.0 * math.pi * k * q.h + 0.5 * math.pi * q.maslov_index * q.h + q.h * shift


def admissible_k_range(family: OrbitFamily, q: ResonanceQuery) -> Tuple[int, int]:
    """Integers k whose Bohr-Sommerfeld target lies within the tabulated range of S."""
    E_lo, E_hi = family.energy_range
    sub = subprincipal_integral(family) if q.include_subprincipal else (lambda E: 0.0)
    S_lo = float(family.action_at(E_lo)) - q.h * sub(E_lo)
    S_hi = float(family.action_at(E_hi)) - q.h * sub(E_hi)
    offset = 0.5 * math.pi * q.maslov_index * q.h
    step = 2.0 * math.pi * q.h
    return math.ceil((S_lo - offset) / step - 1e-12), math.floor((S_hi - offset) / step + 1e-12)


def longitudinal_anchor(family: OrbitFamily, k: int, q: ResonanceQuery,
                        subprincipal: Optional[Callable[[float], float]] = None) -> float:
    """Solve the Bohr-Sommerfeld condition for E_k by Newton on S with S' = T."""
    E_lo, E_hi = family.energy_range
    if q.include_subprincipal:
        sub = subprincipal or subprincipal_integral(family)
    else:
        sub = lambda E: 0.0  # noqa: E731

    def residual(E):
        return float(family.action_at(E)) - _anchor_target(k, q, sub(E))

    r_lo, r_hi = residual(E_lo), residual(E_hi)
    if r_lo > 0 or r_hi < 0:
        if r_lo == 0 or r_hi == 0:
            return E_lo if r_lo == 0 else E_hi
        raise NoAnchorError(
            f"Bohr-Sommerfeld target for k={k} lies outside S([{E_lo}, {E_hi}])",
            k_interval=admissible_k_range(family, q),
            context={"k": k, "h": q.h},
        )

    # start from the linear interpolant of S
    E = E_lo - r_lo * (E_hi - E_lo) / (r_hi - r_lo) if r_hi != r_lo else E_lo
    for _ in range(MAX_ANCHOR_ITERATIONS):
        r = residual(E)
        scale = max(1.0, abs(float(family.action_at(E))))
        if abs(r) <= ANCHOR_TOLERANCE * scale:
            break
        E = min(max(E - r / float(family.period_at(E)), E_lo), E_hi)
    return float(E)


def _exponents_function(floquet_of_E) -> Callable[[float], np.ndarray]:
    if isinstance(floquet_of_E, FloquetTable):
        return floquet_of_E.exponents_at
    if isinstance(floquet_of_E, FloquetData):
        return lambda E: floquet_of_E.mode_exponents

    def call(E):
        value = floquet_of_E(E)
        if isinstance(value, FloquetData):
            return value.mode_exponents
        return np.asarray(value, dtype=complex)
    return call


def _string_for_k(family, k, q, exponents_at, sub, window) -> List[ResonanceEntry]:
    E_k = longitudinal_anchor(family, k, q, sub)
    T = float(family.period_at(E_k))
    mu = np.asarray(exponents_at(E_k), dtype=complex)
    lo, hi = window
    entries = []
    for alpha in product(range(q.alpha_max + 1), repeat=mu.size):
        ladder = np.sum((np.asarray(alpha) + 0.5) * mu)
        z = complex(E_k - 1j * q.h / T * ladder)
        width = -z.imag
        inside = lo <= z.real <= hi and 0.0 < width <= q.depth
        entries.append(ResonanceEntry(k, tuple(int(a) for a in alpha), z, E_k, width, inside))
    return entries


def resonance_strings(family: OrbitFamily, floquet_of_E: Union[FloquetTable, FloquetData, Callable],
                      q: ResonanceQuery, max_workers: Optional[int] = None) -> ResonanceString:
    """Evaluate z_{k,alpha} for every k in q.k_range and alpha in {0..alpha_max}^(n-1)."""
    exponents_at = _exponents_function(floquet_of_E)
    window = q.energy_window or family.energy_range
    sub = subprincipal_integral(family) if q.include_subprincipal else None
    max_workers = max_workers or get_config().max_workers
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        per_k = list(pool.map(lambda k: _string_for_k(family, k, q, exponents_at, sub, window), q.ks))
    entries = [e for chunk in per_k for e in chunk]
    modes = len(entries[0].alpha) if entries else 0
    strings = ResonanceString(entries, modes)
    logger.info("resonance strings", h=q.h, k_range=q.k_range, computed=len(entries),
                in_window=len(strings.entries), excluded=strings.excluded_count)
    return strings


def string_report(strings: ResonanceString, q: ResonanceQuery) -> Dict[str, Any]:
    """Per-string counts and widths, window exclusions and the h^{-n(1-delta)} rank scale."""
    by_alpha: Dict[Tuple[int, ...], List[ResonanceEntry]] = {}
    for e in strings.all_entries:
        by_alpha.setdefault(e.alpha, []).append(e)

    summary_strings = []
    for alpha in sorted(by_alpha):
        members = by_alpha[alpha]
        inside = [e for e in members if e.in_window]
        widths = [e.width for e in members]
        summary_strings.append({
            "alpha": list(alpha),
            "count": len(members),
            "in_window": len(inside),
            "min_width": min(widths),
            "max_width": max(widths),
        })

    widths = [e.width for e in strings.entries]
    n = strings.transversal_modes + 1
    return {
        "total": len(strings.all_entries),
        "in_window": len(strings.entries),
        "excluded": strings.excluded_count,
        "min_width": min(widths) if widths else None,
        "max_width": max(widths) if widths else None,
        "window_depth": q.depth,
        "rank_scale": q.h ** (-n * (1.0 - q.delta)) if strings.all_entries else None,
        "strings": summary_strings,
    }
