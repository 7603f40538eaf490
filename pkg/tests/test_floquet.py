"""
Test suite for Floquet analysis.

Covers:
- reduction of the monodromy and the analytic normal-form spectrum
- Williamson classification and its degeneracies
- the real symplectic logarithm
- the stable/unstable splitting and the action-coordinate decomposition of b
- exponents along an orbit family
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from hypres.core.models import NormalFormMode, normal_form_quadratic
from hypres.core.phase_space import SymplecticForm, standard_j
from hypres.dynamics.continuation import continue_family
from hypres.dynamics.orbits import OrbitOptions, find_periodic_orbit
from hypres.floquet.analysis import (
    FloquetTable,
    analyze_monodromy,
    basepoint_discrepancy,
    floquet_at_phase,
    floquet_of_orbit,
)
from hypres.floquet.reduction import reduce_monodromy
from hypres.floquet.spectrum import (
    ELLIPTIC,
    LOXODROMIC,
    REAL_HYPERBOLIC,
    classify_multipliers,
    floquet_exponents,
    pairing_residual,
    symplectic_log,
)
from hypres.floquet.splitting import invariant_splitting, lagrangian_residual, quadratic_form_b
from hypres.utils.error_manager import (
    BranchError,
    ConfigurationError,
    DegeneracyError,
    NonSemisimpleError,
    WilliamsonDegeneracyError,
)

from tests.conftest import make_normal_form

TWO_PI = 2.0 * math.pi


def _transversal_block(modes, T0=1.0):
    """Q restricted to the transversal coordinates of the normal form."""
    n, Q = normal_form_quadratic(modes, T0)
    keep = list(range(1, n)) + list(range(n + 1, 2 * n))
    return Q[np.ix_(keep, keep)]


def _normal_form_monodromy(system, T0):
    """exp(T0 J Q) with X and grad H0 at the reference orbit."""
    n = system.n
    Q = system.hessian(np.zeros(2 * n))
    rho = system.seed_point(1.0).as_vector()
    full = expm(T0 * standard_j(n) @ Q)
    return full, system.vector_field(rho), system.gradient(rho)


class TestAnalyticMonodromy:
    """analyze_monodromy on exp(T0 J Q) for the normal form."""

    def setup_method(self):
        self.system = make_normal_form(mu_re_1=math.pi / 2, mu_im_2=0.3)
        self.data = analyze_monodromy(*_normal_form_monodromy(self.system, TWO_PI))

    def test_exponents_recovered(self):
        """Exponents are pi/2 (real-hyperbolic) then 0.3 i (elliptic)."""
        values = [e.value for e in self.data.exponents]
        assert values[0] == pytest.approx(math.pi / 2, abs=1e-10)
        assert values[1] == pytest.approx(0.3j, abs=1e-10)
        assert self.data.tags == [REAL_HYPERBOLIC, ELLIPTIC]

    def test_counts(self):
        """One hyperbolic exponent out of two distinct ones."""
        assert self.data.r == 2
        assert self.data.hyperbolic_dimension == 1
        assert not self.data.completely_elliptic
        assert self.data.reduced.trivial_multiplicity == 2

    def test_residuals(self):
        """Every residual of the pipeline is at round-off level."""
        assert self.data.log_residual < 1e-10
        assert self.data.hamiltonian_residual < 1e-10
        assert self.data.pairing_residual < 1e-10
        assert self.data.lagrangian_residual < 1e-9
        assert self.data.decomposition_residual < 1e-10

    def test_reduced_basis_is_symplectic(self):
        """P^T J P = J_m for the reduced basis."""
        induced = self.data.reduced.induced_form
        assert np.allclose(induced, standard_j(2), atol=1e-12)

    def test_coefficients_and_krein_sign(self):
        """b = (pi/2) x xi + 0.3 (x^2 + xi^2)/2 with a positive Krein sign."""
        assert sorted(self.data.coefficients) == pytest.approx([0.3, math.pi / 2])
        assert self.data.krein_signs == [1]

    def test_to_dict_has_residuals(self):
        """The serialized record carries every residual."""
        record = self.data.to_dict()
        assert set(record["residuals"]) == {"full_symplectic", "reduced_symplectic", "log",
                                            "hamiltonian", "pairing", "lagrangian", "decomposition"}
        assert record["hyperbolic_dimension"] == 1

    def test_extra_unit_multiplier_is_a_degeneracy(self):
        """A transversal multiplier at 1 gives trivial multiplicity 4."""
        system = make_normal_form(mu_im_1=TWO_PI)
        with pytest.raises(DegeneracyError) as info:
            reduce_monodromy(*_normal_form_monodromy(system, TWO_PI))
        assert info.value.multiplicity == 4


class TestWilliamsonClassification:
    """classify_multipliers and its failure modes."""

    def test_minus_identity_is_a_branch_error(self):
        """-1 has no real logarithm."""
        with pytest.raises(BranchError):
            classify_multipliers(-np.eye(2))

    def test_negative_real_multiplier(self):
        """-2 and -1/2 lie on the negative axis."""
        with pytest.raises(BranchError):
            classify_multipliers(np.diag([-2.0, -0.5]))

    def test_identity_is_degenerate(self):
        """A multiplier at +1 violates the Williamson conditions."""
        with pytest.raises(WilliamsonDegeneracyError):
            classify_multipliers(np.eye(2))

    def test_groups(self):
        """Elliptic pairs, hyperbolic pairs and loxodromic quadruples."""
        B = standard_j(3) @ _transversal_block(
            [NormalFormMode(0.0, 0.5), NormalFormMode(0.4, 0.7)])
        groups = classify_multipliers(expm(B))
        assert sorted(g.tag for g in groups) == [ELLIPTIC, LOXODROMIC]
        assert sum(len(g.members) * g.multiplicity for g in groups) == 6

    def test_pairing_residual_of_symplectic_spectrum(self):
        """{l, 1/l, conj l} closes for a symplectic matrix."""
        lam = np.array([2.0, 0.5, np.exp(0.3j), np.exp(-0.3j)])
        assert pairing_residual(lam) < 1e-15
        assert pairing_residual(np.array([2.0, 0.25])) > 0.1


class TestSymplecticLog:
    """Real logarithms of symplectic matrices."""

    @given(
        st.floats(0.1, 1.0),
        st.floats(0.1, 2.0),
        st.lists(st.floats(-0.4, 0.4), min_size=10, max_size=10),
    )
    @settings(max_examples=200, deadline=None)
    def test_log_of_conjugated_normal_form(self, a, w, entries):
        """log(exp(P B0 P^-1)) = P B0 P^-1 for a symplectic P = exp(J S)."""
        J = standard_j(2)
        B0 = J @ _transversal_block([NormalFormMode(a, 0.0), NormalFormMode(0.0, w)])
        S = np.zeros((4, 4))
        S[np.triu_indices(4)] = entries
        S = S + np.triu(S, 1).T
        P = expm(J @ S)
        target = P @ B0 @ np.linalg.inv(P)

        B = symplectic_log(expm(target))
        assert np.allclose(B, target, atol=1e-7 * max(1.0, np.linalg.norm(target)))
        assert SymplecticForm(4).hamiltonian_residual(B) < 1e-8

    def test_branch_error_precedes_log(self):
        """No logarithm is attempted for -Id."""
        with pytest.raises(BranchError):
            symplectic_log(-np.eye(4))

    def test_loxodromic_exponents(self):
        """0.4 +- 0.7 i are both kept, ordered by imaginary part."""
        B = standard_j(2) @ _transversal_block([NormalFormMode(0.4, 0.7)])
        exponents = floquet_exponents(symplectic_log(expm(B)))
        assert [e.value for e in exponents] == [pytest.approx(0.4 + 0.7j), pytest.approx(0.4 - 0.7j)]
        assert all(e.tag == LOXODROMIC for e in exponents)

    def test_equal_exponents_merge(self):
        """Two modes with the same exponent give one entry of multiplicity 2."""
        B = standard_j(2) @ _transversal_block([NormalFormMode(0.5, 0.0), NormalFormMode(0.5, 0.0)])
        exponents = floquet_exponents(B)
        assert len(exponents) == 1
        assert exponents[0].multiplicity == 2


class TestSplittingAndQuadraticForm:
    """F_plus, F_minus and b = 1/2 sigma(rho, B rho)."""

    def test_b_matrix_is_half_q(self):
        """For B = J Q the quadratic form is b(rho) = rho^T Q rho / 2."""
        Q = _transversal_block([NormalFormMode(0.8, 0.0), NormalFormMode(0.0, 1.3)])
        form = quadratic_form_b(standard_j(2) @ Q)
        assert np.allclose(form.b_matrix, 0.5 * Q)
        rho = np.array([0.3, -0.2, 0.5, 0.1])
        assert form(rho) == pytest.approx(0.5 * rho @ Q @ rho)

    def test_negative_krein_sign(self):
        """Q = -w I gives Krein sign -1 and coefficient -w."""
        w = 0.9
        form = quadratic_form_b(standard_j(1) @ (-w * np.eye(2)))
        (coordinate,) = form.action_coordinates
        assert coordinate.kind == "elliptic"
        assert coordinate.krein_sign == -1
        assert coordinate.coefficient == pytest.approx(-w)
        # iota = (x^2 + xi^2) / 2
        assert coordinate(np.array([1.0, 0.0])) == pytest.approx(0.5)

    def test_loxodromic_decomposition(self):
        """A loxodromic block decomposes into a dilation and a rotation term."""
        B = standard_j(2) @ _transversal_block([NormalFormMode(0.4, 0.7)])
        form = quadratic_form_b(B)
        kinds = sorted(c.kind for c in form.action_coordinates)
        assert kinds == ["loxodromic-real", "loxodromic-rotation"]
        assert sorted(form.coefficients) == pytest.approx([0.4, 0.7])
        assert form.residual < 1e-10

    def test_unstable_space_is_lagrangian(self):
        """sigma vanishes on F_plus and on F_minus."""
        B = standard_j(3) @ _transversal_block(
            [NormalFormMode(1.1, 0.0), NormalFormMode(0.2, 0.6)])
        F_plus, F_minus = invariant_splitting(B)
        assert F_plus.shape == (6, 3) and F_minus.shape == (6, 3)
        assert lagrangian_residual(F_plus) < 1e-9
        assert lagrangian_residual(F_minus) < 1e-9

    def test_non_semisimple_log(self):
        """A Jordan block is rejected."""
        B = np.array([[0.5, 1.0, 0.0, 0.0],
                      [0.0, 0.5, 0.0, 0.0],
                      [0.0, 0.0, -0.5, 0.0],
                      [0.0, 0.0, -1.0, -0.5]])
        with pytest.raises(NonSemisimpleError):
            invariant_splitting(B)


class TestOrbitFloquet:
    """Floquet data computed from integrated orbits."""

    def test_hyperboloid_equator_exponent(self, hyperboloid):
        """The Jacobi equation J'' = J along the unit-speed equator gives mu = 2 pi."""
        orbit = find_periodic_orbit(hyperboloid, hyperboloid.seed_point(0.5), 0.5, OrbitOptions())
        data = floquet_of_orbit(hyperboloid, orbit)
        (exponent,) = data.exponents
        assert exponent.tag == REAL_HYPERBOLIC
        assert exponent.value.real == pytest.approx(TWO_PI, rel=1e-6)

    def test_hyperboloid_exponent_is_energy_independent(self, hyperboloid):
        """Geodesic flows are homogeneous: the exponent per return does not depend on E."""
        orbit = find_periodic_orbit(hyperboloid, hyperboloid.seed_point(2.0), 2.0, OrbitOptions())
        assert orbit.period == pytest.approx(math.pi, abs=1e-6)
        assert floquet_of_orbit(hyperboloid, orbit).exponents[0].value.real == pytest.approx(TWO_PI, rel=1e-6)

    def test_basepoint_independence(self, normal_form):
        """Multipliers at phase 0 and phase 1/2 agree."""
        orbit = find_periodic_orbit(normal_form, normal_form.seed_point(1.0), 1.0, OrbitOptions())
        first = floquet_at_phase(normal_form, orbit, 0.0)
        second = floquet_at_phase(normal_form, orbit, 0.5)
        assert basepoint_discrepancy(first, second) < 1e-7
        assert first.exponents[0].value == pytest.approx(math.pi / 2, abs=1e-7)


class TestFloquetTable:
    """Exponents tabulated along a family."""

    def setup_method(self):
        self.system = make_normal_form(mu_re_1=0.5, mu_im_2=0.3)
        opts = OrbitOptions(samples=32)
        seed = find_periodic_orbit(self.system, self.system.seed_point(1.0), 1.0, opts)
        self.family = continue_family(self.system, seed, [0.8, 0.9, 1.0, 1.1], opts)
        self.table = FloquetTable.from_family(self.system, self.family, max_workers=2)

    def test_constant_exponents(self):
        """The normal form has the same exponents on every orbit."""
        values = self.table(0.95)
        assert sorted(values, key=lambda v: v.real) == [pytest.approx(0.3j, abs=1e-7),
                                                        pytest.approx(0.5, abs=1e-7)]

    def test_outside_range(self):
        """Energies outside the table are rejected."""
        with pytest.raises(ConfigurationError):
            self.table(2.0)

    def test_one_row_per_energy(self):
        """modes has shape (energies, transversal modes)."""
        assert self.table.modes.shape == (4, 2)
