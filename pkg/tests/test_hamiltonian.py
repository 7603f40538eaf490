"""
Test suite for the phase-space layer and Hamiltonian systems.

Covers:
- PhasePoint validation and conversions
- the symplectic form and its residuals
- Hamilton vector fields and derivative fallbacks
- built-in model systems and their definitions
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypres.core.hamiltonian import HamiltonianSystem, hamilton_vector_field, verify_gradient
from hypres.core.models import (
    ModelSystemSpec,
    SystemKind,
    build_model,
    hyperboloid_gaussian_curvature,
    normal_form_quadratic,
    register_custom,
)
from hypres.core.phase_space import PhasePoint, SymplecticForm, standard_j, wrap_difference
from hypres.utils.error_manager import ConfigurationError, EvaluationError

from tests.conftest import make_free_motion, make_oscillator


class TestPhasePoint:
    """PhasePoint construction and conversions."""

    def test_round_trip_through_vector(self):
        """from_vector(as_vector()) reproduces the point."""
        p = PhasePoint([1.0, 2.0], [3.0, 4.0])
        q = PhasePoint.from_vector(p.as_vector())

        assert np.array_equal(q.x, p.x)
        assert np.array_equal(q.xi, p.xi)
        assert q.n == 2

    def test_one_degree_of_freedom_is_allowed(self):
        """n = 1 points exist for the oscillator and free-motion systems."""
        assert PhasePoint([0.5], [0.0]).n == 1

    def test_mismatched_lengths_rejected(self):
        """x and xi must have the same length."""
        with pytest.raises(ValueError):
            PhasePoint([1.0, 2.0], [3.0])

    def test_non_finite_rejected(self):
        """NaN coordinates are invalid."""
        with pytest.raises(ValueError):
            PhasePoint([float("nan")], [0.0])

    def test_point_is_immutable(self):
        """Coordinates cannot be modified in place."""
        p = PhasePoint([1.0], [2.0])
        with pytest.raises(ValueError):
            p.x[0] = 3.0


class TestSymplecticForm:
    """sigma(u, v) = <J u, v> and the residual helpers."""

    def test_standard_j_convention(self):
        """J = [[0, I], [-I, 0]]."""
        J = standard_j(2)
        expected = np.array([[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]], dtype=float)
        assert np.array_equal(J, expected)

    def test_sigma_is_antisymmetric(self):
        """sigma(u, v) = -sigma(v, u)."""
        form = SymplecticForm(4)
        u = np.array([1.0, 2.0, 3.0, 4.0])
        v = np.array([-1.0, 0.5, 2.0, 1.0])
        assert form.sigma(u, v) == pytest.approx(-form.sigma(v, u))
        assert form.sigma(u, u) == pytest.approx(0.0)

    def test_rotation_is_symplectic(self):
        """A planar rotation has zero symplectic residual."""
        c, s = math.cos(0.7), math.sin(0.7)
        R = np.array([[c, s], [-s, c]])
        assert SymplecticForm(2).symplectic_residual(R) == pytest.approx(0.0, abs=1e-15)

    @given(st.lists(st.floats(-2.0, 2.0), min_size=3, max_size=3))
    @settings(max_examples=30, deadline=None)
    def test_j_times_symmetric_is_hamiltonian(self, entries):
        """B = J S with S symmetric satisfies B^T J + J B = 0."""
        a, b, c = entries
        S = np.array([[a, b], [b, c]])
        B = standard_j(1) @ S
        assert SymplecticForm(2).hamiltonian_residual(B) == pytest.approx(0.0, abs=1e-12)

    def test_wrap_difference_reduces_periodic_coordinates(self):
        """Angle differences are reduced modulo their period; momenta untouched."""
        delta = np.array([2 * math.pi + 0.1, 7.0, 2 * math.pi])
        wrapped = wrap_difference(delta, (2 * math.pi, None, None))
        assert wrapped[0] == pytest.approx(0.1)
        assert wrapped[1] == 7.0
        assert wrapped[2] == pytest.approx(2 * math.pi)


class TestHamiltonianSystem:
    """Evaluation of H0, its derivatives and X_H."""

    def setup_method(self):
        self.oscillator = make_oscillator((1.0, 2.0))

    def test_vector_field_convention(self):
        """X_H = (dH/dxi, -dH/dx)."""
        p = PhasePoint([1.0, 0.5], [0.25, -1.0])
        X = hamilton_vector_field(self.oscillator, p)
        assert np.allclose(X, [0.25, -1.0, -1.0, -2.0])

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(-2.0, 2.0), min_size=8, max_size=8))
    def test_differential_is_sigma_against_vector_field(self, entries):
        """dH0(p)(w) = sigma(w, X_H(p))."""
        rho, w = np.array(entries[:4]), np.array(entries[4:])
        X = hamilton_vector_field(self.oscillator, PhasePoint.from_vector(rho))
        form = SymplecticForm(4)
        assert form.sigma(w, X) == pytest.approx(self.oscillator.gradient(rho) @ w, abs=1e-12)

    def test_finite_difference_fallbacks_match_closed_forms(self):
        """Without grad/hess callables the finite-difference derivatives are used."""
        bare = HamiltonianSystem(n=2, h0=self.oscillator.h0)
        rho = np.array([0.3, -0.2, 0.7, 0.1])
        assert np.allclose(bare.gradient(rho), self.oscillator.gradient(rho), atol=1e-8)
        assert np.allclose(bare.hessian(rho), self.oscillator.hessian(rho), atol=1e-5)

    def test_verify_gradient_accepts_correct_gradient(self):
        """A consistent gradient passes the central-difference check."""
        rng = np.random.default_rng(0)
        worst = verify_gradient(self.oscillator, rng.normal(size=(5, 4)))
        assert worst < 1e-6

    def test_verify_gradient_rejects_wrong_gradient(self):
        """A gradient off by a factor fails the check."""
        wrong = HamiltonianSystem(n=1, h0=lambda r: 0.5 * (r @ r), grad_h0=lambda r: 2.0 * r)
        with pytest.raises(ValueError):
            verify_gradient(wrong, [np.array([1.0, 1.0])])

    def test_non_finite_energy_raises(self):
        """EvaluationError carries the offending point."""
        bad = HamiltonianSystem(n=1, h0=lambda r: float("inf"))
        with pytest.raises(EvaluationError) as info:
            bad.energy(np.array([1.0, 2.0]))
        assert info.value.point is not None

    def test_missing_seed_is_a_configuration_error(self):
        """Systems without a built-in seed need an explicit seed point."""
        with pytest.raises(ConfigurationError):
            make_free_motion().seed_point(1.0)

    def test_subprincipal_defaults_to_zero(self):
        """H1 is zero when not supplied."""
        assert self.oscillator.subprincipal(np.zeros(4)) == 0.0


class TestModelSystems:
    """Built-in model systems."""

    def test_unknown_kind_rejected(self):
        """Unknown kinds are configuration errors."""
        with pytest.raises(ConfigurationError):
            ModelSystemSpec("double_pendulum", {})

    def test_coulomb_stark_requires_positive_field(self):
        """a <= 0 is invalid."""
        with pytest.raises(ConfigurationError):
            ModelSystemSpec(SystemKind.COULOMB_STARK, {"a": -1.0})

    def test_normal_form_requires_a_mode(self):
        """A normal form with no transversal mode is invalid."""
        with pytest.raises(ConfigurationError):
            ModelSystemSpec("normal_form", {"T0": 1.0})

    def test_normal_form_modes_parsed(self):
        """mu_j is shorthand for mu_re_j; loxodromic modes use two degrees of freedom."""
        spec = ModelSystemSpec("normal_form", {"T0": 1.0, "mu_1": 0.5, "mu_re_2": 0.2, "mu_im_2": 0.4})
        modes = spec.modes()
        assert [m.tag for m in modes] == ["real-hyperbolic", "loxodromic"]
        assert build_model(spec).n == 4

    def test_normal_form_quadratic_is_symmetric(self):
        """Q is symmetric and the theta row is empty."""
        spec = ModelSystemSpec("normal_form", {"T0": 2.0, "mu_re_1": 1.0, "mu_im_2": 0.5})
        n, Q = normal_form_quadratic(spec.modes(), 2.0)
        assert n == 3
        assert np.array_equal(Q, Q.T)
        assert not np.any(Q[0]) and not np.any(Q[n])

    def test_normal_form_reference_orbit_energy(self):
        """The seed lies on the energy surface with X_H = d/dtheta."""
        system = build_model(ModelSystemSpec("normal_form", {"T0": 3.0, "mu_1": 1.0}))
        rho = system.seed_point(0.7).as_vector()
        assert system.energy(rho) == pytest.approx(0.7)
        assert np.allclose(system.vector_field(rho), [1.0, 0.0, 0.0, 0.0])

    def test_hyperboloid_curvature_at_equator(self):
        """K = -1 on the equator of x^2 + y^2 - z^2 = 1."""
        assert hyperboloid_gaussian_curvature(0.0) == pytest.approx(-1.0)
        assert -1.0 < hyperboloid_gaussian_curvature(0.5) < 0.0

    def test_hyperboloid_gradient_is_consistent(self):
        """Closed-form gradient agrees with finite differences."""
        system = build_model(ModelSystemSpec("hyperboloid_geodesic", {}))
        points = [np.array([0.3, 1.0, 0.2, 0.9]), np.array([-0.5, 0.0, -0.4, 1.3])]
        assert verify_gradient(system, points) < 1e-5

    def test_coulomb_stark_seed_threshold(self):
        """The axial seed exists only above E = 2 sqrt(a)."""
        system = build_model(ModelSystemSpec("coulomb_stark", {"a": 1.0}))
        assert system.seed_point(3.0).x[0] == pytest.approx(1.0)
        with pytest.raises(ConfigurationError):
            system.seed_point(1.5)

    def test_coulomb_singularity(self):
        """Evaluating at r = 0 raises EvaluationError."""
        system = build_model(ModelSystemSpec("coulomb_stark", {"a": 1.0, "dim": 2}))
        with pytest.raises(EvaluationError):
            system.gradient(np.zeros(4))

    def test_custom_registration(self):
        """kind=custom builds registered factories and keeps the spec."""
        register_custom("test-oscillator", lambda params: make_oscillator((params.get("w", 1.0),)))
        spec = ModelSystemSpec("custom", {"w": 2.0}, name="test-oscillator")
        system = build_model(spec)
        assert system.spec is spec
        assert system.energy(np.array([1.0, 0.0])) == pytest.approx(2.0)

    def test_unregistered_custom_system(self):
        """An unknown custom name is a configuration error."""
        with pytest.raises(ConfigurationError):
            build_model(ModelSystemSpec("custom", {}, name="nothing-here"))

    def test_spec_round_trip(self):
        """to_dict/from_dict preserve the definition."""
        spec = ModelSystemSpec("coulomb_stark", {"a": 2.0, "dim": 3})
        assert ModelSystemSpec.from_dict(spec.to_dict()) == spec
