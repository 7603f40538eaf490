"""
Run pipeline: orbit -> family -> Floquet data -> hypotheses -> resonance strings.

Each stage is computed once per pipeline and reused by the later stages;
the report assembles the module outputs without recomputing anything.
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import structlog

import hypres
from hypres.core.hamiltonian import HamiltonianSystem
from hypres.data.orbit_cache import OrbitCache
from hypres.data.run_config import RunConfig
from hypres.data.serialization import with_schema, write_csv, write_json
from hypres.dynamics.continuation import OrbitFamily, continue_family
from hypres.dynamics.orbits import PeriodicOrbit, find_periodic_orbit
from hypres.floquet.analysis import (
    BASEPOINT_TOLERANCE,
    FloquetData,
    FloquetTable,
    basepoint_discrepancy,
    floquet_at_phase,
    floquet_of_orbit,
)
from hypres.floquet.hypotheses import HypothesisReport, check_hypotheses, degenerate_report
from hypres.semiclassics.resonances import (
    ResonanceString,
    admissible_k_range,
    resonance_strings,
    string_report,
)
from hypres.utils.config import HypresSettings, get_config
from hypres.utils.error_manager import (
    BranchError,
    DegeneracyError,
    NoAnchorError,
    WilliamsonDegeneracyError,
)

logger = structlog.get_logger()

_SPECTRAL_DEGENERACIES = (BranchError, DegeneracyError, WilliamsonDegeneracyError)


class HypresPipeline:
    """
    Drives the numerical modules in order for one run configuration.
    """

    def __init__(self, config: RunConfig, settings: Optional[HypresSettings] = None,
                 cache: Optional[OrbitCache] = None):
        self.config = config
        self.settings = settings or get_config()
        self.cache = cache if cache is not None else OrbitCache()
        self.system: HamiltonianSystem = config.build_system()
        self.orbit_options = config.orbit_options(self.settings)
        self.pairing_tolerance = self.settings.pairing_tolerance

        self._orbit: Optional[PeriodicOrbit] = None
        self._family: Optional[OrbitFamily] = None
        self._floquet: Optional[FloquetData] = None
        self._basepoint_discrepancy: Optional[float] = None
        self._hypotheses: Optional[HypothesisReport] = None
        self._table: Optional[FloquetTable] = None
        self._strings: Optional[Tuple[ResonanceString, Dict[str, Any]]] = None

    # stages

    def find_orbit(self) -> PeriodicOrbit:
        if self._orbit is not None:
            return self._orbit
        E = self.config.energy
        cached = self.cache.get(self.system, E)
        if cached is not None:
            logger.info("Cache HIT for orbit", system=self.system.name, energy=E)
            self._orbit = cached
            return cached

        logger.info("Cache MISS for orbit, computing", system=self.system.name, energy=E)
        guess = self.config.seed(self.system)
        orbit = find_periodic_orbit(self.system, guess, E, self.orbit_options)
        self.cache.set(self.system, orbit)
        self._orbit = orbit
        return orbit

    def continue_family(self) -> OrbitFamily:
        if self._family is None:
            grid = self.config.energy_grid(self.settings)
            self._family = continue_family(self.system, self.find_orbit(), grid, self.orbit_options)
        return self._family

    def floquet(self) -> FloquetData:
        """Floquet data at rho_E, cross-checked against the base point at half period."""
        if self._floquet is not None:
            return self._floquet
        orbit = self.find_orbit()
        opts = self.orbit_options.integrator
        data = floquet_of_orbit(self.system, orbit, opts, self.pairing_tolerance)
        second = floquet_at_phase(self.system, orbit, 0.5, opts, self.pairing_tolerance)
        self._basepoint_discrepancy = basepoint_discrepancy(data, second)
        if self._basepoint_discrepancy > BASEPOINT_TOLERANCE:
            logger.warning("multipliers depend on the base point", discrepancy=self._basepoint_discrepancy)
        self._floquet = data
        return data

    def check(self) -> HypothesisReport:
        if self._hypotheses is not None:
            return self._hypotheses
        K, tol = self.config.hypothesis_bounds(self.settings)
        try:
            floquet = self.floquet()
        except _SPECTRAL_DEGENERACIES as e:
            self._hypotheses = degenerate_report(self.find_orbit(), e, K, tol)
        else:
            self._hypotheses = check_hypotheses(self.find_orbit(), floquet, K, tol)
        return self._hypotheses

    def floquet_table(self) -> FloquetTable:
        if self._table is None:
            self._table = FloquetTable.from_family(self.system, self.continue_family(),
                                                   self.orbit_options.integrator, self.pairing_tolerance,
                                                   self.settings.max_workers)
        return self._table

    def resonances(self) -> Tuple[ResonanceString, Dict[str, Any]]:
        if self._strings is not None:
            return self._strings
        family = self.continue_family()
        section = self.config.resonances
        if section is not None and section.k_range is not None:
            k_range = tuple(section.k_range)
        else:
            k_range = admissible_k_range(family, self.config.resonance_query((0, 0)))
            if k_range[0] > k_range[1]:
                raise NoAnchorError("no integer k satisfies the Bohr-Sommerfeld condition on the family",
                                    k_interval=k_range)
        query = self.config.resonance_query(k_range)
        strings = resonance_strings(family, self.floquet_table(), query, self.settings.max_workers)
        summary = {"query": query.to_dict(), **string_report(strings, query)}
        self._strings = (strings, summary)
        return self._strings

    # report fragments

    def orbit_fragment(self) -> Dict[str, Any]:
        orbit = self.find_orbit()
        return {
            "energy": orbit.energy,
            "period": orbit.period,
            "action": orbit.action,
            "closure_residual": orbit.closure_residual,
            "energy_residual": orbit.energy_residual,
            "newton_steps": orbit.newton_steps,
            "segments": orbit.segments,
            "energy_drift": orbit.samples.energy_drift,
            "ref_point": orbit.ref_point.to_dict(),
            "section_normal": orbit.section_normal,
        }

    def family_fragment(self) -> Dict[str, Any]:
        family = self.continue_family()
        return {
            "energies": family.energies,
            "periods": family.periods,
            "actions": family.actions,
            "boundary": dict(family.boundary),
            "partial": family.is_partial,
            "action_identity_residual": family.action_identity_residual(),
        }

    def floquet_fragment(self) -> Dict[str, Any]:
        fragment = self.floquet().to_dict()
        fragment["basepoint_discrepancy"] = self._basepoint_discrepancy
        return fragment

    def resonance_fragment(self) -> Dict[str, Any]:
        strings, summary = self.resonances()
        return {"summary": summary, "entries": [e.to_dict() for e in strings.entries]}

    def provenance(self) -> Dict[str, Any]:
        opts = self.orbit_options
        K, tol = self.config.hypothesis_bounds(self.settings)
        return {
            "config_hash": self.config.config_hash,
            "version": hypres.__version__,
            "system": self.system.spec.to_dict() if self.system.spec is not None else self.system.name,
            "tolerances": {
                "rtol": opts.integrator.rtol,
                "atol": opts.integrator.atol,
                "method": opts.integrator.method,
                "newton": opts.tolerance,
                "pairing": self.pairing_tolerance,
                "hypothesis": tol,
                "lattice_bound": K,
            },
            "cache": {"enabled": self.cache.enabled, "path": str(self.cache.path)},
        }

    def build_report(self, sections: List[str]) -> Dict[str, Any]:
        """Assemble the named fragments, in a fixed order, plus provenance."""
        builders = {
            "orbit": self.orbit_fragment,
            "family": self.family_fragment,
            "floquet": self.floquet_fragment,
            "hypotheses": lambda: self.check().to_dict(),
            "resonances": self.resonance_fragment,
        }
        report: Dict[str, Any] = {}
        for name in ("orbit", "family", "floquet", "hypotheses", "resonances"):
            if name in sections:
                report[name] = builders[name]()
        report["provenance"] = self.provenance()
        return with_schema(report)

    def full_report(self) -> Dict[str, Any]:
        sections = ["orbit", "family", "hypotheses"]
        try:
            self.floquet()
            sections.append("floquet")
        except _SPECTRAL_DEGENERACIES as e:
            logger.warning("Floquet data unavailable", code=e.code)
        if self.config.resonances is not None and "floquet" in sections:
            sections.append("resonances")
        logger.info("Assembling run report", sections=sections)
        return self.build_report(sections)

    def write_outputs(self, report: Dict[str, Any], directory: Path) -> List[Path]:
        """report.json plus CSV side files for whatever stages have run."""
        paths = [write_json(report, directory)]
        if self._orbit is not None:
            paths.append(write_csv(self._orbit.samples.to_frame(self.system), directory, "orbit.csv"))
        if self._family is not None:
            paths.append(write_csv(self._family.to_frame(), directory, "family.csv"))
        if self._strings is not None:
            paths.append(write_csv(self._strings[0].to_frame(), directory, "resonances.csv"))
        return paths
