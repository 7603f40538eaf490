"""
Run configuration documents.

A run is described by one JSON document validated with pydantic. Values
resolve with the precedence CLI flag > HYPRES_* environment > document >
built-in defaults.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from hypres.core.hamiltonian import HamiltonianSystem
from hypres.core.models import ModelSystemSpec, build_model
from hypres.core.phase_space import PhasePoint
from hypres.data.serialization import canonical_hash
from hypres.dynamics.integrator import IntegratorOptions
from hypres.dynamics.orbits import OrbitOptions
from hypres.semiclassics.resonances import ResonanceQuery
from hypres.utils.config import HypresSettings, get_config
from hypres.utils.error_manager import ConfigurationError


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SystemSection(_Section):
    kind: str
    parameters: Dict[str, float] = Field(default_factory=dict)
    name: str = ""

    def to_spec(self) -> ModelSystemSpec:
        return ModelSystemSpec(self.kind, self.parameters, self.name)


class GridSection(_Section):
    half_width: Optional[float] = Field(None, gt=0)
    points: Optional[int] = Field(None, ge=1)
    energies: Optional[List[float]] = None

    @model_validator(mode="after")
    def _nonempty(self):
        if self.energies is not None and len(self.energies) == 0:
            raise ValueError("grid.energies must not be empty")
        if self.energies is not None and (self.half_width is not None or self.points is not None):
            raise ValueError("give either grid.energies or grid.half_width/points, not both")
        return self


class SeedPointSection(_Section):
    x: List[float]
    xi: List[float]

    @model_validator(mode="after")
    def _matching_lengths(self):
        if len(self.x) != len(self.xi):
            raise ValueError(f"seed_point.x has {len(self.x)} entries but seed_point.xi has {len(self.xi)}")
        return self

    def to_point(self) -> PhasePoint:
        try:
            return PhasePoint(np.asarray(self.x, dtype=float), np.asarray(self.xi, dtype=float))
        except ValueError as e:
            raise ConfigurationError(f"invalid seed_point: {e}")


class IntegratorSection(_Section):
    rtol: Optional[float] = Field(None, gt=0)
    atol: Optional[float] = Field(None, gt=0)
    method: Optional[str] = None
    max_step: Optional[float] = Field(None, gt=0)
    horizon: Optional[float] = Field(None, gt=0)
    gauss_legendre_step: Optional[float] = Field(None, gt=0)
    gauss_legendre_stages: Optional[int] = Field(None, ge=1)


class OrbitSection(_Section):
    segments: Optional[int] = Field(None, ge=1)
    max_newton_steps: Optional[int] = Field(None, ge=1)
    samples: Optional[int] = Field(None, ge=16)
    tolerance: Optional[float] = Field(None, gt=0)


class HypothesesSection(_Section):
    K: Optional[int] = Field(None, ge=1)
    tol: Optional[float] = Field(None, gt=0)


class ResonanceSection(_Section):
    h: float = Field(..., gt=0)
    delta: float = 1.0
    C: float = 1.0
    k_range: Optional[Tuple[int, int]] = None
    alpha_max: int = 0
    maslov_index: int = 0
    include_subprincipal: bool = False
    window: str = "power"
    energy_window: Optional[Tuple[float, float]] = None


class OutputSection(_Section):
    directory: Optional[str] = None


class RunConfig(_Section):
    system: SystemSection
    energy: float
    grid: Optional[GridSection] = None
    seed_point: Optional[SeedPointSection] = None
    integrator: IntegratorSection = Field(default_factory=IntegratorSection)
    orbit: OrbitSection = Field(default_factory=OrbitSection)
    hypotheses: HypothesesSection = Field(default_factory=HypothesesSection)
    resonances: Optional[ResonanceSection] = None
    output: OutputSection = Field(default_factory=OutputSection)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        try:
            config = cls.model_validate(data)
        except ValidationError as e:
            raise ConfigurationError(f"invalid run configuration: {e}",
                                     context={"errors": [err["msg"] for err in e.errors()]})
        # model definitions are checked here so bad kinds fail before any numerics
        config.system.to_spec()
        return config

    @property
    def config_hash(self) -> str:
        return canonical_hash(self.model_dump(mode="json"))

    def build_system(self) -> HamiltonianSystem:
        return build_model(self.system.to_spec())

    def seed(self, system: HamiltonianSystem) -> PhasePoint:
        """Explicit seed_point, else the model's built-in seed at the run energy."""
        if self.seed_point is not None:
            point = self.seed_point.to_point()
            if point.n != system.n:
                raise ConfigurationError(f"seed_point has {point.n} degrees of freedom, system has {system.n}")
            return point
        return system.seed_point(self.energy)

    def energy_grid(self, settings: Optional[HypresSettings] = None) -> np.ndarray:
        """Continuation grid; the run energy is always a grid point."""
        settings = settings or get_config()
        grid = self.grid or GridSection()
        if grid.energies is not None:
            energies = np.asarray(grid.energies, dtype=float)
        else:
            half_width = grid.half_width if grid.half_width is not None else settings.default_epsilon0
            points = grid.points if grid.points is not None else settings.default_grid_points
            energies = np.linspace(self.energy - half_width, self.energy + half_width, points)
        close = np.abs(energies - self.energy) <= 1e-12 * max(1.0, abs(self.energy))
        energies = np.where(close, self.energy, energies)
        return np.unique(np.append(energies, self.energy))

    def integrator_options(self, settings: Optional[HypresSettings] = None) -> IntegratorOptions:
        settings = settings or get_config()
        doc = self.integrator
        try:
            return IntegratorOptions.from_settings(
                settings,
                rtol=_resolve(settings, "rtol", doc.rtol),
                atol=_resolve(settings, "atol", doc.atol),
                method=_resolve(settings, "method", doc.method),
                horizon=_resolve(settings, "horizon", doc.horizon),
                max_step=doc.max_step,
                gauss_legendre_step=doc.gauss_legendre_step,
                gauss_legendre_stages=doc.gauss_legendre_stages,
            )
        except ValueError as e:
            raise ConfigurationError(f"invalid integrator options: {e}")

    def orbit_options(self, settings: Optional[HypresSettings] = None) -> OrbitOptions:
        settings = settings or get_config()
        doc = self.orbit
        return OrbitOptions.from_settings(
            settings,
            integrator=self.integrator_options(settings),
            max_newton_steps=_resolve(settings, "max_newton_steps", doc.max_newton_steps),
            tolerance=_resolve(settings, "newton_tolerance", doc.tolerance),
            samples=_resolve(settings, "orbit_samples", doc.samples),
            segments=doc.segments,
        )

    def hypothesis_bounds(self, settings: Optional[HypresSettings] = None) -> Tuple[int, float]:
        settings = settings or get_config()
        K = _resolve(settings, "hypothesis_lattice_bound", self.hypotheses.K)
        tol = _resolve(settings, "hypothesis_tolerance", self.hypotheses.tol)
        return int(K), float(tol)

    def resonance_query(self, k_range: Tuple[int, int]) -> ResonanceQuery:
        if self.resonances is None:
            raise ConfigurationError("the run configuration has no 'resonances' section")
        values = self.resonances.model_dump()
        values["k_range"] = tuple(k_range)
        if values["energy_window"] is not None:
            values["energy_window"] = tuple(values["energy_window"])
        return ResonanceQuery(**values)

    def output_directory(self, override: Optional[str] = None) -> Optional[Path]:
        directory = override or self.output.directory
        return Path(directory) if directory else None


def _resolve(settings: HypresSettings, name: str, document_value):
    """Environment beats the document; the document beats the built-in default."""
    if name in settings.model_fields_set:
        return getattr(settings, name)
    if document_value is not None:
        return document_value
    return getattr(settings, name)


def load_run_config(path: Union[str, Path]) -> RunConfig:
    """Read and validate a run configuration document."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigurationError(f"cannot read run configuration {str(path)!r}: {e}")
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"run configuration {str(path)!r} is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise ConfigurationError("run configuration must be a JSON object")
    return RunConfig.from_dict(data)
