"""
Tests for the canonical splitting, curvature maps, structural equations and
both conjugate-time detectors, checked against the closed-form predictor.
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from complex_geometry import AmbientVector, SpherePoint
from detectors import FrameDetector
from errors import (ConfigError, DegenerateMomentumError, GeometryError, IntegrationError, LevelSetError,
                    RefinementError)
from extremal_flow import PhasePoint, integrate_extremal
from jacobi_conjugate import (ConjugateReport, CurvatureCoefficients, canonical_splitting,
                              closed_form_conjugate_times, compare_reports, conjugate_times_structural,
                              conjugate_times_variational, constant_propagator, curvature_maps, frame_rhs,
                              structural_ode_integrate, tan_root, variational_pairing_drift)

from conftest import CHARGE_RATIO

Y1 = 4.493409457909064


def phase_point(z, p):
    return PhasePoint(SpherePoint(AmbientVector(z)), AmbientVector(p))


# =============================================================================
# 1. SPLITTING AND CURVATURE MAPS
# =============================================================================


class TestCanonicalSplitting:

    def test_n1_has_no_c_block(self, make_covector):
        assert canonical_splitting(make_covector(1, 0.5)).d_c == 0

    def test_b_direction_at_e1(self):
        splitting = canonical_splitting(phase_point([1, 0, 0], [0, 1, 0]))
        assert np.allclose(splitting.b_dir.components, [0, 1j, 0])
        assert np.allclose(splitting.a_dir.components, [1j, 0, 0])

    @given(seed=st.integers(min_value=0, max_value=10_000), n=st.integers(min_value=1, max_value=4))
    @settings(max_examples=20)
    def test_orthonormal(self, make_covector, seed, n):
        splitting = canonical_splitting(make_covector(n, 1.0, seed=seed))
        assert splitting.d_c == 2 * n - 2
        gram = splitting.gram()
        assert np.max(np.abs(gram - np.eye(gram.shape[0]))) <= 1e-12

    def test_deterministic(self, make_covector):
        first = canonical_splitting(make_covector(3, 0.0, seed=5))
        second = canonical_splitting(make_covector(3, 0.0, seed=5))
        for a, b in zip(first.c_basis, second.c_basis):
            assert np.array_equal(a.components, b.components)

    def test_degenerate_momentum(self):
        with pytest.raises(DegenerateMomentumError):
            canonical_splitting(phase_point([1, 0, 0], [1j, 0, 0]))

    def test_off_level_set(self):
        with pytest.raises(LevelSetError):
            canonical_splitting(phase_point([1, 0, 0], [0, 2, 0]))


class TestCurvatureMaps:

    @pytest.mark.parametrize("n", [1, 2, 3])
    @pytest.mark.parametrize("charge", [0.0, 0.5, 1.0, 2.0])
    def test_constants(self, make_covector, n, charge):
        coeffs = curvature_maps(make_covector(n, charge, seed=n), CHARGE_RATIO)
        assert coeffs.r_aa == 0.0
        assert np.all(coeffs.r_ac == 0.0)
        assert abs(coeffs.r_bb - (4 + charge ** 2)) <= 1e-9
        if n > 1:
            assert np.max(np.abs(coeffs.r_bc)) <= 1e-9
            assert np.max(np.abs(coeffs.r_cc - (1 + charge ** 2 / 4) * np.eye(2 * n - 2))) <= 1e-9

    def test_printed_normalization_reads_ambient_u0(self, make_covector):
        lam = make_covector(2, 1.0)
        assert abs(curvature_maps(lam, 1.0).r_bb - 4.25) <= 1e-9

    def test_measured_ratio_is_default(self, make_covector):
        coeffs = curvature_maps(make_covector(2, 2.0))
        assert abs(coeffs.r_bb - 8.0) <= 1e-9

    def test_constant_along_extremal(self, make_covector):
        lam = make_covector(3, 1.0, seed=2)
        arc = integrate_extremal(lam, 5.0)
        start = curvature_maps(lam, CHARGE_RATIO)
        for index in (1000, 2500, 5000):
            later = curvature_maps(arc.state(index), CHARGE_RATIO)
            assert abs(later.r_bb - start.r_bb) <= 1e-9
            assert np.max(np.abs(later.r_cc - start.r_cc)) <= 1e-9

    def test_asymmetric_r_cc_rejected(self):
        with pytest.raises(GeometryError):
            CurvatureCoefficients(0.0, [0, 0], 4.0, [0, 0], [[1.0, 0.5], [0.0, 1.0]])


# =============================================================================
# 2. STRUCTURAL EQUATIONS
# =============================================================================


class TestStructuralEquations:

    def test_zero_coefficients_polynomial_flow(self):
        coeffs = CurvatureCoefficients(0.0, [0.0], 0.0, [0.0], [[0.0]])
        trajectory = structural_ode_integrate(coeffs, 2.0, 200)
        frame = trajectory.frames[-1]
        # E_a(t) = E_a(0) + t E_b(0) - t^3/6 F_a(0) + t^2/2 F_b(0)
        assert np.allclose(frame[:, 0], [1, 2.0, 0, -4 / 3, 2.0, 0], atol=1e-12)
        assert trajectory.pairing_drift() <= 1e-12

    @pytest.mark.parametrize("charge", [0.0, 1.0, 2.0])
    def test_c_block_is_a_cosine(self, charge):
        omega_c = 1 + charge ** 2 / 4
        coeffs = CurvatureCoefficients.constant(4 + charge ** 2, omega_c, 2)
        trajectory = structural_ode_integrate(coeffs, 5.0)
        root = math.sqrt(omega_c)
        expected = np.cos(root * trajectory.times)
        assert np.max(np.abs(trajectory.frames[:, 2, 2] - expected)) <= 1e-8
        assert np.max(np.abs(trajectory.frames[:, 3, 3] - expected)) <= 1e-8

    def test_matches_exponential(self):
        coeffs = CurvatureCoefficients.constant(5.0, 1.25, 2)
        trajectory = structural_ode_integrate(coeffs, 3.0)
        assert np.max(np.abs(trajectory.frames[-1] - constant_propagator(coeffs, 3.0))) <= 1e-9

    def test_darboux_drift(self):
        coeffs = CurvatureCoefficients.constant(5.0, 1.25, 4)
        trajectory = structural_ode_integrate(coeffs, 10.0)
        assert trajectory.pairing_drift() <= 1e-8
        assert trajectory.state(len(trajectory.times) - 1).pairing_residual() <= 1e-8

    def test_time_dependent_provider(self):
        coeffs = CurvatureCoefficients.constant(4.0, 1.0, 1)
        trajectory = structural_ode_integrate(lambda t: coeffs, 2.0, 2000)
        assert np.max(np.abs(trajectory.frames[-1] - constant_propagator(coeffs, 2.0))) <= 1e-9

    def test_printed_variant_needs_one_c_direction(self):
        with pytest.raises(ConfigError):
            structural_ode_integrate(CurvatureCoefficients.constant(4.0, 1.0, 2), 1.0, variant='printed')
        structural_ode_integrate(CurvatureCoefficients.constant(4.0, 1.0, 1), 1.0, variant='printed')

    def test_blow_up_reports_time(self):
        coeffs = CurvatureCoefficients.constant(-1e300, 1.0, 0)
        with pytest.raises(IntegrationError) as excinfo:
            structural_ode_integrate(coeffs, 1.0, 10)
        assert excinfo.value.time > 0


# =============================================================================
# 3. CLOSED FORM
# =============================================================================


class TestClosedForm:

    def test_coincident_blocks_merge(self):
        report = closed_form_conjugate_times(4.0, 1.0, 2, 3.3)
        assert len(report.entries) == 1
        assert abs(report.entries[0][0] - math.pi) <= 1e-12
        assert report.entries[0][1] == 3

    def test_ab_block_only(self):
        report = closed_form_conjugate_times(4.0, 1.0, 0, 4.6)
        assert report.multiplicities == [1, 1]
        assert abs(report.times[0] - math.pi) <= 1e-12
        assert abs(report.times[1] - Y1) <= 1e-9

    def test_empty_below_first_time(self):
        assert closed_form_conjugate_times(4.0, 1.0, 2, 3.0).entries == ()

    def test_tan_root(self):
        assert abs(tan_root(1) - Y1) <= 1e-10
        assert math.pi * 2 < tan_root(2) < 2.5 * math.pi

    def test_report_invariants(self):
        with pytest.raises(ValueError):
            ConjugateReport(((2.0, 1), (1.0, 1)), method='structural', horizon=3.0)
        with pytest.raises(ValueError):
            ConjugateReport(((4.0, 1),), method='structural', horizon=3.0)
        with pytest.raises(ValueError):
            ConjugateReport(((1.0, 0),), method='structural', horizon=3.0)


# =============================================================================
# 4. DETECTORS
# =============================================================================


class TestDetectors:

    def test_structural_n2_first_time(self, make_covector):
        report = conjugate_times_structural(make_covector(2, 0.0), 3.3, charge_ratio=CHARGE_RATIO)
        assert len(report.entries) == 1
        assert abs(report.entries[0][0] - math.pi) <= 1e-4
        assert report.entries[0][1] == 3

    def test_structural_n1(self, make_covector):
        report = conjugate_times_structural(make_covector(1, 0.0), 3.3, charge_ratio=CHARGE_RATIO)
        assert report.multiplicities == [1]
        assert abs(report.times[0] - math.pi) <= 1e-4

    def test_inside_conjugate_free_interval(self, make_covector):
        charge = 1.0
        T = 0.99 * math.pi / math.sqrt(4 + charge ** 2 / 4)
        assert conjugate_times_structural(make_covector(2, charge), T, charge_ratio=CHARGE_RATIO).entries == ()
        assert conjugate_times_variational(make_covector(2, charge), T, charge_ratio=CHARGE_RATIO).entries == ()

    @pytest.mark.parametrize("n,charge", [(1, 1.0), (2, 0.5), (3, 2.0)])
    def test_three_methods_agree(self, make_covector, n, charge):
        lam = make_covector(n, charge, seed=n)
        T = 7.0
        structural = conjugate_times_structural(lam, T, charge_ratio=CHARGE_RATIO)
        variational = conjugate_times_variational(lam, T, charge_ratio=CHARGE_RATIO)
        closed = closed_form_conjugate_times(4 + charge ** 2, 1 + charge ** 2 / 4, 2 * n - 2, T)
        assert compare_reports(structural, closed)['agree']
        assert compare_reports(variational, closed)['agree']
        assert abs(structural.times[0] - 2 * math.pi / math.sqrt(4 + charge ** 2)) <= 1e-4
        assert structural.multiplicities[0] == 2 * n - 1

    def test_n1_charge_one_times(self, make_covector):
        report = conjugate_times_variational(make_covector(1, 1.0), 7.0, charge_ratio=CHARGE_RATIO)
        root5 = math.sqrt(5)
        expected = [2 * math.pi / root5, 2 * Y1 / root5, 4 * math.pi / root5, 2 * tan_root(2) / root5]
        assert np.allclose(report.times, expected, atol=1e-4)

    def test_printed_normalization_disagrees_with_oracle(self, make_covector):
        lam = make_covector(2, 1.0)
        printed = conjugate_times_structural(lam, 4.0, charge_ratio=1.0)
        oracle = conjugate_times_variational(lam, 4.0, charge_ratio=1.0)
        assert not compare_reports(printed, oracle)['agree']

    def test_halving_the_step(self, make_covector):
        lam = make_covector(2, 0.5)
        coarse = conjugate_times_structural(lam, 5.0, steps=20_000, charge_ratio=CHARGE_RATIO)
        fine = conjugate_times_structural(lam, 5.0, steps=40_000, charge_ratio=CHARGE_RATIO)
        assert coarse.multiplicities == fine.multiplicities
        assert max(abs(a - b) for a, b in zip(coarse.times, fine.times)) <= 1e-5

    def test_variational_pairings_conserved(self, make_covector):
        assert variational_pairing_drift(make_covector(2, 1.0), 10.0, steps=10_000) <= 1e-8

    def test_close_candidates_raise(self):
        detector = FrameDetector(frame_rhs(CurvatureCoefficients.constant(4.0, 1.0, 0)), 2)
        with pytest.raises(RefinementError):
            detector._merge([(1.0, 1), (1.0 + 1e-4, 1)], step=1e-3)
        assert detector._merge([(1.0, 1), (1.0 + 1e-9, 2)], step=1e-3) == [(1.0, 2)]
