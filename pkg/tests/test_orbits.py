"""
Test suite for periodic orbit search.

Covers:
- multiple-shooting Newton on systems with known orbits
- action and orbit averages
- degenerate starting guesses
- serialization of orbits for the cache
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from hypres.core.models import ModelSystemSpec, build_model
from hypres.core.phase_space import PhasePoint
from hypres.dynamics.orbits import (
    CLOSURE_TOLERANCE,
    OrbitOptions,
    PeriodicOrbit,
    find_periodic_orbit,
    monodromy,
    orbit_average,
    reintegration_drift,
)
from hypres.floquet.analysis import floquet_of_orbit
from hypres.utils.error_manager import DegenerateSectionError, NonConvergenceError

from tests.conftest import make_normal_form, make_oscillator


class TestFindPeriodicOrbit:
    """Orbit search on the oscillator, the normal form and the hyperboloid."""

    def setup_method(self):
        self.opts = OrbitOptions()

    def test_two_dof_oscillator_from_perturbed_guess(self, oscillator_2d):
        """The (1, sqrt 2) oscillator has the mode-1 orbit with T = 2 pi and S = 2 pi E."""
        E = 0.5
        guess = PhasePoint([1.0 + 1e-4, 1e-4], [0.0, -1e-4])
        orbit = find_periodic_orbit(oscillator_2d, guess, E, self.opts)

        assert orbit.period == pytest.approx(2 * math.pi, abs=1e-8)
        assert orbit.closure_residual <= CLOSURE_TOLERANCE
        assert orbit.energy_residual <= 1e-10
        assert orbit.action == pytest.approx(2 * math.pi * E, rel=1e-8)
        assert abs(orbit.ref_point.x[1]) < 1e-8

    def test_normal_form_reference_orbit(self, normal_form):
        """On the normal form the reference orbit has period T0 at every energy."""
        orbit = find_periodic_orbit(normal_form, normal_form.seed_point(1.0), 1.0, self.opts)
        assert orbit.period == pytest.approx(2 * math.pi, abs=1e-9)
        assert orbit.action == pytest.approx(2 * math.pi, rel=1e-10)

    def test_hyperboloid_equator(self, hyperboloid):
        """The equator geodesic at E = 1/2 has unit speed and period 2 pi."""
        orbit = find_periodic_orbit(hyperboloid, hyperboloid.seed_point(0.5), 0.5, self.opts)
        assert orbit.period == pytest.approx(2 * math.pi, abs=1e-6)
        assert orbit.closure_residual <= CLOSURE_TOLERANCE

    @pytest.mark.parametrize("energy", [2.0, 8.0])
    def test_hyperboloid_fast_equator(self, hyperboloid, energy):
        """Above E = 1/2 the equator is still found once covered: T = 2 pi / sqrt(2E), S = 2 pi sqrt(2E)."""
        orbit = find_periodic_orbit(hyperboloid, hyperboloid.seed_point(energy), energy, self.opts)
        speed = math.sqrt(2.0 * energy)
        assert orbit.period == pytest.approx(2 * math.pi / speed, abs=1e-8)
        assert orbit.action == pytest.approx(2 * math.pi * speed, rel=1e-8)

    def test_section_normal_does_not_change_the_orbit(self, hyperboloid):
        """A rotated transversal section finds the same T and S from a perturbed guess."""
        guess = PhasePoint([1e-4, 0.0], [-1e-4, 1.0])
        default = find_periodic_orbit(hyperboloid, guess, 0.5, self.opts)
        rotated = find_periodic_orbit(hyperboloid, guess, 0.5, self.opts,
                                      section_normal=np.array([0.3, 1.0, 0.2, 0.0]))
        assert abs(rotated.period - default.period) <= 1e-9
        assert abs(rotated.action - default.action) <= 1e-8
        assert rotated.period == pytest.approx(2 * math.pi, abs=1e-8)

    def test_tangent_section_normal_rejected(self, hyperboloid):
        """A normal orthogonal to X_H at the guess is not a section."""
        with pytest.raises(DegenerateSectionError):
            find_periodic_orbit(hyperboloid, hyperboloid.seed_point(0.5), 0.5, self.opts,
                                section_normal=np.array([1.0, 0.0, 0.0, 0.0]))

    def test_energy_residual_is_enforced(self, normal_form):
        """An orbit off the energy surface by 1e-4 is rejected even under a loose Newton tolerance."""
        guess = PhasePoint([0.0, 0.0, 0.0], [1.0 + 1e-4, 0.0, 0.0])
        with pytest.raises(NonConvergenceError) as info:
            find_periodic_orbit(normal_form, guess, 1.0, OrbitOptions(tolerance=1e-3))
        assert info.value.context["residual"] == pytest.approx(1e-4, rel=1e-6)

    def test_period_guess_skips_section_search(self, oscillator):
        """A supplied period guess is used as the Newton start."""
        orbit = find_periodic_orbit(oscillator, oscillator.seed_point(2.0), 2.0, self.opts,
                                    period_guess=6.2)
        assert orbit.period == pytest.approx(2 * math.pi, abs=1e-8)

    def test_equilibrium_guess_is_degenerate(self, oscillator):
        """X_H = 0 at the origin; there is no section through an equilibrium."""
        with pytest.raises(DegenerateSectionError):
            find_periodic_orbit(oscillator, PhasePoint([0.0], [0.0]), 0.0, self.opts)

    def test_samples_cover_one_period(self, oscillator):
        """Samples run from 0 to T and the last sample closes the loop."""
        orbit = find_periodic_orbit(oscillator, oscillator.seed_point(0.5), 0.5, OrbitOptions(samples=32))
        assert orbit.samples.times[0] == 0.0
        assert orbit.samples.times[-1] == pytest.approx(orbit.period)
        assert len(orbit.samples.times) == 33
        assert np.allclose(orbit.samples.states[-1], orbit.samples.states[0], atol=1e-8)


class TestOrbitQuantities:
    """Averages, monodromy and reintegration on a found orbit."""

    def setup_method(self):
        self.system = make_oscillator()
        self.orbit = find_periodic_orbit(self.system, self.system.seed_point(1.0), 1.0, OrbitOptions())

    def test_average_of_energy_is_energy(self):
        """<H0> over the orbit equals E."""
        assert orbit_average(self.system.energy, self.orbit) == pytest.approx(1.0, rel=1e-10)

    def test_average_of_missing_function_is_zero(self):
        """A missing H1 integrates to zero."""
        assert orbit_average(None, self.orbit) == 0.0

    def test_monodromy_of_oscillator_is_identity(self):
        """Every orbit of the unit oscillator has monodromy Id."""
        base, result = monodromy(self.system, self.orbit, phase=0.25)
        assert np.allclose(result.fundamental_matrix, np.eye(2), atol=1e-8)
        assert self.system.energy(base.as_vector()) == pytest.approx(1.0, rel=1e-9)

    def test_reintegration_drift_is_small(self):
        """Tightening tolerances barely moves the closure residual."""
        assert reintegration_drift(self.system, self.orbit) < 1e-8


class TestOrbitSerialization:
    """Orbits round-trip through plain dictionaries."""

    def test_round_trip(self):
        """from_dict(to_dict()) restores every float exactly."""
        system = make_normal_form(mu_1=0.5)
        orbit = find_periodic_orbit(system, system.seed_point(1.0), 1.0, OrbitOptions(samples=16))
        restored = PeriodicOrbit.from_dict(orbit.to_dict(), system)

        assert restored.period == orbit.period
        assert restored.action == orbit.action
        assert np.array_equal(restored.samples.states, orbit.samples.states)
        assert restored.system is system

    def test_inconsistent_samples_rejected(self):
        """Sample arrays of the wrong shape are not an orbit."""
        system = make_oscillator()
        orbit = find_periodic_orbit(system, system.seed_point(1.0), 1.0, OrbitOptions(samples=8))
        data = orbit.to_dict()
        data["samples"]["times"] = data["samples"]["times"][:-1]
        with pytest.raises(ValueError):
            PeriodicOrbit.from_dict(data)


@pytest.mark.slow
class TestCoulombStark:
    """Collinear orbit in the Coulomb-Stark well along the field axis."""

    def test_collinear_period_matches_quadrature(self):
        """T = int sqrt(m + r sin t) / sqrt(a) dt over [-pi/2, pi/2] for the axial oscillation."""
        a, E = 1.0, 3.0
        system = build_model(ModelSystemSpec("coulomb_stark", {"a": a, "dim": 3}))
        orbit = find_periodic_orbit(system, system.seed_point(E), E, OrbitOptions())

        m = E / (2 * a)
        r = math.sqrt(E ** 2 - 4 * a) / (2 * a)
        expected, _ = quad(lambda t: math.sqrt(m + r * math.sin(t)) / math.sqrt(a),
                           -math.pi / 2, math.pi / 2, epsabs=1e-13, epsrel=1e-13)

        assert orbit.segments == 4
        assert orbit.period == pytest.approx(expected, rel=1e-8)
        assert orbit.closure_residual <= CLOSURE_TOLERANCE
        assert np.allclose(orbit.samples.states[:, [1, 2, 4, 5]], 0.0, atol=1e-10)

    def test_collinear_orbit_is_hyperbolic(self):
        """The axial orbit carries one doubly degenerate real-hyperbolic exponent."""
        system = build_model(ModelSystemSpec("coulomb_stark", {"a": 1.0, "dim": 3}))
        orbit = find_periodic_orbit(system, system.seed_point(3.0), 3.0, OrbitOptions())
        data = floquet_of_orbit(system, orbit)

        assert data.hyperbolic_dimension >= 1
        (exponent,) = data.exponents
        assert exponent.tag == "real-hyperbolic"
        assert exponent.multiplicity == 2
        # regression baseline at a = 1, E = 3
        assert orbit.period == pytest.approx(3.690342274750269, rel=1e-7)
        assert exponent.value.real == pytest.approx(5.142155646743743, rel=1e-6)
        assert abs(exponent.value.imag) < 1e-8
