"""
Shared builders for the test suite: small Hamiltonian systems with known flows.
"""

import math

import numpy as np
import pytest

from hypres.core.hamiltonian import HamiltonianSystem
from hypres.core.models import ModelSystemSpec, build_model
from hypres.core.phase_space import PhasePoint


def make_oscillator(frequencies=(1.0,)) -> HamiltonianSystem:
    """H = sum_j 1/2 (xi_j^2 + w_j^2 x_j^2)."""
    w2 = np.asarray(frequencies, dtype=float) ** 2
    n = w2.size

    def h0(rho):
        x, xi = rho[:n], rho[n:]
        return float(0.5 * (xi @ xi + w2 @ (x * x)))

    def grad(rho):
        x, xi = rho[:n], rho[n:]
        return np.concatenate([w2 * x, xi])

    def hess(rho):
        return np.diag(np.concatenate([w2, np.ones(n)]))

    def seed(E):
        x = np.zeros(n)
        x[0] = math.sqrt(2.0 * E) / math.sqrt(w2[0])
        return PhasePoint(x, np.zeros(n))

    return HamiltonianSystem(n=n, h0=h0, grad_h0=grad, hess_h0=hess, name="oscillator", seed=seed)


def make_free_motion() -> HamiltonianSystem:
    """H = 1/2 xi^2 on T*R."""
    return HamiltonianSystem(n=1, h0=lambda rho: 0.5 * rho[1] ** 2,
                             grad_h0=lambda rho: np.array([0.0, rho[1]]), name="free")


def make_normal_form(**parameters) -> HamiltonianSystem:
    params = {"T0": 2.0 * math.pi}
    params.update(parameters)
    return build_model(ModelSystemSpec("normal_form", params))


@pytest.fixture
def oscillator():
    return make_oscillator()


@pytest.fixture
def oscillator_2d():
    return make_oscillator((1.0, math.sqrt(2.0)))


@pytest.fixture
def free_motion():
    return make_free_motion()


@pytest.fixture
def normal_form():
    """Modes mu = (pi/2, 0.3 i) per return, T0 = 2 pi."""
    return make_normal_form(mu_re_1=math.pi / 2, mu_im_2=0.3)


@pytest.fixture
def hyperboloid():
    return build_model(ModelSystemSpec("hyperboloid_geodesic", {}))
