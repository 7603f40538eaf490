"""
Built-in model systems used as oracles and demonstrations.

- normal_form: H0 = eta + sum_j b_j / T0 on (theta, y; eta, eta_y), an exactly
  solvable system whose orbit {y = eta_y = 0} has period T0 and per-return
  Floquet exponents given by the mode parameters.
- hyperboloid_geodesic: geodesic flow on the one-sheeted hyperboloid in the
  chart x = cosh u cos v, y = cosh u sin v, z = sinh u.
- coulomb_stark: H0 = |xi|^2 + 1/|r| + a x_1 on R^dim.
- custom: factories registered programmatically with register_custom.
"""

import json
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Tuple

import numpy as np

from hypres.core.hamiltonian import HamiltonianSystem
from hypres.core.phase_space import PhasePoint
from hypres.utils.error_manager import ConfigurationError, EvaluationError


class SystemKind(Enum):
    NORMAL_FORM = "normal_form"
    HYPERBOLOID_GEODESIC = "hyperboloid_geodesic"
    COULOMB_STARK = "coulomb_stark"
    CUSTOM = "custom"


_MODE_KEY = re.compile(r"^mu(?:_(re|im))?_(\d+)$")


@dataclass(frozen=True)
class NormalFormMode:
    """Per-return exponent mu = re + i*im of one transversal mode."""
    re: float
    im: float

    @property
    def tag(self) -> str:
        if self.im == 0.0:
            return "real-hyperbolic"
        if self.re == 0.0:
            return "elliptic"
        return "loxodromic"

    @property
    def dof(self) -> int:
        return 2 if self.tag == "loxodromic" else 1


@dataclass(frozen=True)
class ModelSystemSpec:
    """Definition of a model system as loaded from {"kind": ..., "parameters": {...}}."""

    kind: SystemKind
    parameters: Dict[str, float] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        kind = self.kind
        if not isinstance(kind, SystemKind):
            try:
                kind = SystemKind(kind)
            except ValueError:
                raise ConfigurationError(f"unknown system kind {self.kind!r}",
                                         context={"known": [k.value for k in SystemKind]})
            object.__setattr__(self, "kind", kind)
        try:
            params = {str(k): float(v) for k, v in dict(self.parameters).items()}
        except (TypeError, ValueError) as e:
            raise ConfigurationError(f"system parameters must be real numbers: {e}")
        object.__setattr__(self, "parameters", params)

        if kind is SystemKind.COULOMB_STARK:
            if params.get("a", 0.0) <= 0.0:
                raise ConfigurationError("coulomb_stark requires a > 0")
            if int(params.get("dim", 3)) < 2:
                raise ConfigurationError("coulomb_stark requires dim >= 2")
        elif kind is SystemKind.NORMAL_FORM:
            if params.get("T0", 0.0) <= 0.0:
                raise ConfigurationError("normal_form requires T0 > 0")
            if not self.modes():
                raise ConfigurationError("normal_form requires at least one mode")
        elif kind is SystemKind.CUSTOM and not self.name:
            raise ConfigurationError("custom systems need a registered name")

    def modes(self) -> List[NormalFormMode]:
        """Transversal modes of a normal_form spec, ordered by index."""
        found: Dict[int, Dict[str, float]] = {}
        for key, value in self.parameters.items():
            match = _MODE_KEY.match(key)
            if match:
                part = match.group(1) or "re"
                found.setdefault(int(match.group(2)), {})[part] = value
        modes = []
        for index in sorted(found):
            mode = NormalFormMode(found[index].get("re", 0.0), found[index].get("im", 0.0))
            if mode.re < 0.0 or mode.im < 0.0 or (mode.re == 0.0 and mode.im == 0.0):
                raise ConfigurationError(
                    f"normal_form mode {index} must have re >= 0, im >= 0 and not both zero",
                    context={"mode": index, "re": mode.re, "im": mode.im},
                )
            modes.append(mode)
        return modes

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind.value,
                                "parameters": {k: self.parameters[k] for k in sorted(self.parameters)}}
        if self.name:
            data["name"] = self.name
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ModelSystemSpec":
        if not isinstance(data, dict) or "kind" not in data:
            raise ConfigurationError("system definition needs a 'kind'")
        return cls(data["kind"], data.get("parameters", {}), data.get("name", ""))

    @classmethod
    def from_json(cls, text: str) -> "ModelSystemSpec":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"invalid system JSON: {e}")


_CUSTOM_FACTORIES: Dict[str, Callable[[Dict[str, float]], HamiltonianSystem]] = {}


def register_custom(name: str, factory: Callable[[Dict[str, float]], HamiltonianSystem]) -> None:
    """Register a programmatic system under `name` for kind=custom specs."""
    _CUSTOM_FACTORIES[name] = factory


def build_model(spec: ModelSystemSpec) -> HamiltonianSystem:
    """Build the HamiltonianSystem described by spec."""
    if spec.kind is SystemKind.NORMAL_FORM:
        system = _normal_form(spec)
    elif spec.kind is SystemKind.HYPERBOLOID_GEODESIC:
        system = _hyperboloid()
    elif spec.kind is SystemKind.COULOMB_STARK:
        system = _coulomb_stark(spec.parameters["a"], int(spec.parameters.get("dim", 3)))
    elif spec.kind is SystemKind.CUSTOM:
        if spec.name not in _CUSTOM_FACTORIES:
            raise ConfigurationError(f"no custom system registered as {spec.name!r}",
                                     context={"registered": sorted(_CUSTOM_FACTORIES)})
        system = _CUSTOM_FACTORIES[spec.name](dict(spec.parameters))
    else:  # pragma: no cover - SystemKind is exhaustive
        raise ConfigurationError(f"unknown system kind {spec.kind!r}")
    object.__setattr__(system, "spec", spec)
    return system


def normal_form_quadratic(modes: List[NormalFormMode], T0: float) -> Tuple[int, np.ndarray]:
    """
    Return (n, Q) with H0 = eta + 1/2 rho^T Q rho for the normal_form model.

    Index layout: x = (theta, y_1..y_m), xi = (eta, eta_1..eta_m).
    """
    m = sum(mode.dof for mode in modes)
    n = m + 1
    Q = np.zeros((2 * n, 2 * n))
    k = 1
    for mode in modes:
        a, w = mode.re / T0, mode.im / T0
        if mode.tag == "real-hyperbolic":
            Q[k, n + k] = Q[n + k, k] = a
        elif mode.tag == "elliptic":
            Q[k, k] = Q[n + k, n + k] = w
        else:
            p, q = k, k + 1
            Q[p, n + p] = Q[n + p, p] = a
            Q[q, n + q] = Q[n + q, q] = a
            # w * (y_p eta_q - y_q eta_p)
            Q[p, n + q] = Q[n + q, p] = w
            Q[q, n + p] = Q[n + p, q] = -w
        k += mode.dof
    return n, Q


def _normal_form(spec: ModelSystemSpec) -> HamiltonianSystem:
    T0 = spec.parameters["T0"]
    n, Q = normal_form_quadratic(spec.modes(), T0)
    e_eta = np.zeros(2 * n)
    e_eta[n] = 1.0

    def h0(rho):
        return float(rho[n] + 0.5 * rho @ Q @ rho)

    def grad(rho):
        return e_eta + Q @ rho

    def hess(rho):
        return Q.copy()

    def seed(E: float) -> PhasePoint:
        xi = np.zeros(n)
        xi[0] = E
        return PhasePoint(np.zeros(n), xi)

    return HamiltonianSystem(
        n=n, h0=h0, grad_h0=grad, hess_h0=hess,
        periods=(T0,) + (None,) * (n - 1),
        name="normal_form", seed=seed, default_segments=1,
    )


def hyperboloid_gaussian_curvature(u: float) -> float:
    """Gaussian curvature of x^2 + y^2 - z^2 = 1 at height z = sinh u."""
    return -1.0 / math.cosh(2.0 * u) ** 2


def _hyperboloid() -> HamiltonianSystem:
    # H0 = 1/2 (f(u) xi_u^2 + g(u) xi_v^2), f = 1/cosh 2u, g = 1/cosh^2 u
    def parts(u):
        c2, s2 = math.cosh(2 * u), math.sinh(2 * u)
        c, s = math.cosh(u), math.sinh(u)
        f = 1.0 / c2
        df = -2.0 * s2 / c2 ** 2
        ddf = -4.0 / c2 + 8.0 * s2 ** 2 / c2 ** 3
        g = 1.0 / c ** 2
        dg = -2.0 * s / c ** 3
        ddg = -2.0 / c ** 2 + 6.0 * s ** 2 / c ** 4
        return f, df, ddf, g, dg, ddg

    def h0(rho):
        u, _, pu, pv = rho
        f, _, _, g, _, _ = parts(u)
        return 0.5 * (f * pu ** 2 + g * pv ** 2)

    def grad(rho):
        u, _, pu, pv = rho
        f, df, _, g, dg, _ = parts(u)
        return np.array([0.5 * (df * pu ** 2 + dg * pv ** 2), 0.0, f * pu, g * pv])

    def hess(rho):
        u, _, pu, pv = rho
        f, df, ddf, g, dg, ddg = parts(u)
        H = np.zeros((4, 4))
        H[0, 0] = 0.5 * (ddf * pu ** 2 + ddg * pv ** 2)
        H[0, 2] = H[2, 0] = df * pu
        H[0, 3] = H[3, 0] = dg * pv
        H[2, 2] = f
        H[3, 3] = g
        return H

    def seed(E: float) -> PhasePoint:
        if E <= 0.0:
            raise ConfigurationError("hyperboloid geodesics need E > 0", context={"energy": E})
        return PhasePoint([0.0, 0.0], [0.0, math.sqrt(2.0 * E)])

    return HamiltonianSystem(
        n=2, h0=h0, grad_h0=grad, hess_h0=hess,
        periods=(None, 2.0 * math.pi),
        name="hyperboloid_geodesic", seed=seed, default_segments=1,
    )


def _coulomb_stark(a: float, dim: int) -> HamiltonianSystem:
    def radius(r):
        dist = float(np.linalg.norm(r))
        if dist < 1e-300:
            raise EvaluationError("Coulomb singularity at r = 0", point=np.asarray(r))
        return dist

    def h0(rho):
        r, xi = rho[:dim], rho[dim:]
        return float(xi @ xi + 1.0 / radius(r) + a * r[0])

    def grad(rho):
        r, xi = rho[:dim], rho[dim:]
        dist = radius(r)
        gx = -r / dist ** 3
        gx[0] += a
        return np.concatenate([gx, 2.0 * xi])

    def hess(rho):
        r = rho[:dim]
        dist = radius(r)
        H = np.zeros((2 * dim, 2 * dim))
        H[:dim, :dim] = 3.0 * np.outer(r, r) / dist ** 5 - np.eye(dim) / dist ** 3
        H[dim:, dim:] = 2.0 * np.eye(dim)
        return H

    def seed(E: float) -> PhasePoint:
        # collinear orbit along the field axis through the potential minimum x_1 = 1/sqrt(a)
        floor = 2.0 * math.sqrt(a)
        if E <= floor:
            raise ConfigurationError(
                f"coulomb_stark has no axial orbit at E={E}; need E > {floor}",
                context={"energy": E, "threshold": floor},
            )
        x = np.zeros(dim)
        x[0] = 1.0 / math.sqrt(a)
        xi = np.zeros(dim)
        xi[0] = math.sqrt(E - floor)
        return PhasePoint(x, xi)

    return HamiltonianSystem(
        n=dim, h0=h0, grad_h0=grad, hess_h0=hess,
        periods=(None,) * dim,
        name="coulomb_stark", seed=seed, default_segments=4,
    )
