"""One-shot acceptance suite: one check_* method per criterion, like a data audit.

Every check records a result instead of raising, so a regression shows up as
a named failing criterion in the summary.
"""
import math
import time

import numpy as np

import console
from comparison import bounds_check, check_corollary, corollary_intervals, count_tan_roots, z_function
from complex_geometry import audit_curvature, resolve_charge_ratio
from errors import HopfLabError
from extremal_flow import (closed_form_gap, initial_covector, integrate_extremal, magnetic_charge)
from jacobi_conjugate import (CurvatureCoefficients, closed_form_conjugate_times, compare_reports,
                              conjugate_times_structural, conjugate_times_variational, curvature_maps,
                              structural_ode_integrate, tan_root, variational_pairing_drift)

CHARGE_GRID = (0.0, 0.5, 1.0, 2.0)
N_GRID = (1, 2, 3)
TRIANGLE_T = 7.0
DRIFT_TOL = 1e-8
TIME_TOL = 1e-4


class AcceptanceSuite:
    def __init__(self, normalization='measured', seed=0, samples=100_000):
        self.normalization = normalization
        self.seed = seed
        self.samples = samples
        self.results = []
        self.issues = []
        self._triangle = None
        self._ratios = {}

    def ratio(self, n):
        if n not in self._ratios:
            self._ratios[n] = resolve_charge_ratio(self.normalization, n, seed=self.seed)
        return self._ratios[n]

    def covector(self, n, charge_value, seed=None):
        return initial_covector(n, charge_value, self.ratio(n), seed=self.seed if seed is None else seed)

    def run(self):
        """Run every criterion in order and print the summary"""
        console.banner("🔍 ACCEPTANCE SUITE")
        console.bullet(f"charge normalization: {self.normalization}")
        started = time.perf_counter()

        checks = [
            (1, "curvature bounds", self.check_curvature_bounds),
            (2, "conservation", self.check_conservation),
            (3, "closed-form geodesics", self.check_closed_form),
            (4, "oracle triangle", self.check_oracle_triangle),
            (5, "first conjugate time", self.check_first_conjugate_time),
            (6, "comparison bounds", self.check_comparison_bounds),
            (7, "curvature-map constants", self.check_curvature_constants),
            (8, "symplectic integrity", self.check_symplectic_integrity),
            (9, "tan-root counter", self.check_tan_roots),
            ('magnetic', "magnetic charge", self.check_magnetic_charge),
        ]
        for criterion, name, check in checks:
            console.section(f"📋 [{criterion}] {name.upper()}")
            try:
                passed, detail = check()
            except HopfLabError as exc:
                passed, detail = False, f"{type(exc).__name__}: {exc}"
            self.record(criterion, name, passed, detail)

        console.bullet(f"runtime: {time.perf_counter() - started:.1f} s")
        self.print_summary()
        return self.results

    def record(self, criterion, name, passed, detail):
        self.results.append({'criterion': criterion, 'name': name, 'passed': bool(passed), 'detail': detail})
        if passed:
            console.ok(detail)
        else:
            console.warn(detail)
            self.issues.append(f"[{criterion}] {name}: {detail}")

    @property
    def passed(self):
        return not self.issues

    # -----------------------------------------------------------------------

    def check_curvature_bounds(self):
        worst = {'min': math.inf, 'max': -math.inf, 'violations': 0, 'extreme_error': 0.0}
        for n in (1, 2, 3, 4):
            audit = audit_curvature(n, samples=self.samples, seed=self.seed + n)
            worst['min'] = min(worst['min'], audit['min'])
            worst['max'] = max(worst['max'], audit['max'])
            worst['violations'] += audit['violations']
            extremes = audit['extremes']
            errors = [abs(extremes['holomorphic'] - 4.0)]
            if 'totally_real' in extremes:
                errors.append(abs(extremes['totally_real'] - 1.0))
            worst['extreme_error'] = max(worst['extreme_error'], *errors)
        passed = worst['violations'] == 0 and worst['extreme_error'] <= 1e-12
        detail = (f"sec in [{worst['min']:.12f}, {worst['max']:.12f}], violations {worst['violations']}, "
                  f"extreme planes off by {worst['extreme_error']:.1e}")
        return passed, detail

    def check_conservation(self):
        drift = 0.0
        for charge_value in (0.0, 1.0):
            arc = integrate_extremal(self.covector(2, charge_value), 10.0)
            drift = max(drift, *arc.drift().values())
        return drift <= DRIFT_TOL, f"largest drift of h, u0, |z|, gauge: {drift:.2e}"

    def check_closed_form(self):
        rng = np.random.default_rng(self.seed)
        gap = 0.0
        for n in N_GRID:
            for k in range(20):
                lam = self.covector(n, float(rng.uniform(-2.0, 2.0)), seed=self.seed + 100 * n + k)
                gap = max(gap, float(np.max(closed_form_gap(integrate_extremal(lam, 10.0)))))
        return gap <= 1e-6, f"sup-norm gap over 60 arcs: {gap:.2e}"

    def triangle(self):
        """Structural, variational and closed-form reports on the acceptance grid, computed once"""
        if self._triangle is None:
            self._triangle = {}
            for n in N_GRID:
                for charge_value in CHARGE_GRID:
                    lam = self.covector(n, charge_value)
                    ratio = self.ratio(n)
                    u_sq = charge_value ** 2
                    self._triangle[(n, charge_value)] = {
                        'structural': conjugate_times_structural(lam, TRIANGLE_T, charge_ratio=ratio),
                        'variational': conjugate_times_variational(lam, TRIANGLE_T, charge_ratio=ratio),
                        'closed_form': closed_form_conjugate_times(4 + u_sq, 1 + u_sq / 4, 2 * n - 2, TRIANGLE_T),
                    }
                    console.bullet(f"n={n} ū={charge_value}: "
                                   f"{self._triangle[(n, charge_value)]['variational'].entries}")
        return self._triangle

    def check_oracle_triangle(self):
        failures = []
        for (n, charge_value), reports in self.triangle().items():
            pairs = [('structural', 'variational'), ('structural', 'closed_form'), ('variational', 'closed_form')]
            for a, b in pairs:
                agreement = compare_reports(reports[a], reports[b], time_tol=TIME_TOL)
                if not agreement['agree']:
                    failures.append(f"n={n} ū={charge_value} {a}/{b}")
        if failures:
            return False, "disagreement at " + ", ".join(failures)
        return True, f"all three methods agree on {len(self.triangle())} configurations"

    def check_first_conjugate_time(self):
        failures = []
        for (n, charge_value), reports in self.triangle().items():
            expected_time = 2 * math.pi / math.sqrt(4 + charge_value ** 2)
            expected_mult = 2 * n - 1
            intervals = corollary_intervals(charge_value, n)
            for method in ('structural', 'variational'):
                report = reports[method]
                first = report.first()
                if first is None or abs(first[0] - expected_time) > TIME_TOL or first[1] != expected_mult:
                    failures.append(f"n={n} ū={charge_value} {method}: {first}")
                elif False in check_corollary(report, intervals).values():
                    failures.append(f"n={n} ū={charge_value} {method}: corollary interval violated")
        if failures:
            return False, "; ".join(failures)
        return True, "first time 2π/√(4+ū²) with multiplicity 2n-1 everywhere"

    def check_comparison_bounds(self):
        failures = []
        for (n, charge_value), reports in self.triangle().items():
            measured = reports['variational']
            bounds = bounds_check(measured, charge_value, n, TRIANGLE_T)
            pattern = z_function(4 + charge_value ** 2, 1 + charge_value ** 2 / 4, 2 * n - 2, TRIANGLE_T)
            if not bounds.passed or measured.total != pattern:
                failures.append(f"n={n} ū={charge_value}: {bounds.z_lower} <= {measured.total} "
                                f"<= {bounds.z_upper}, pattern {pattern}")
        if failures:
            return False, "; ".join(failures)
        return True, "measured counts inside [Z_lower, Z_upper] and equal to the Z pattern"

    def check_curvature_constants(self):
        worst = 0.0
        for n in N_GRID:
            for charge_value in CHARGE_GRID:
                lam = self.covector(n, charge_value)
                ratio = self.ratio(n)
                coeffs = curvature_maps(lam, ratio)
                omega_b = 4 + charge_value ** 2
                omega_c = 1 + charge_value ** 2 / 4
                if coeffs.r_aa != 0.0 or np.any(coeffs.r_ac != 0.0):
                    return False, f"r_aa/r_ac not exactly zero at n={n} ū={charge_value}"
                worst = max(worst, _coefficient_error(coeffs, omega_b, omega_c))

                arc = integrate_extremal(lam, TRIANGLE_T)
                for index in range(0, len(arc), len(arc) // 7):
                    worst = max(worst, _coefficient_error(curvature_maps(arc.state(index), ratio), omega_b, omega_c))
        return worst <= 1e-9, f"largest deviation from (4+ū², 0, (1+ū²/4)I) along arcs: {worst:.2e}"

    def check_symplectic_integrity(self):
        lam = self.covector(2, 1.0)
        coeffs = curvature_maps(lam, self.ratio(2))
        frame_drift = structural_ode_integrate(coeffs, 10.0).pairing_drift()
        variation_drift = variational_pairing_drift(lam, 10.0)
        passed = frame_drift <= DRIFT_TOL and variation_drift <= DRIFT_TOL
        return passed, f"Darboux drift {frame_drift:.2e}, variational σ drift {variation_drift:.2e}"

    def check_tan_roots(self):
        rng = np.random.default_rng(self.seed)
        mismatches = 0
        for _ in range(100):
            omega_b = float(rng.uniform(0.5, 20.0))
            T = float(rng.uniform(0.1, 20.0))
            if count_tan_roots(omega_b, T) != sign_scan_tan_roots(omega_b, T):
                mismatches += 1
        first = tan_root(1)
        passed = mismatches == 0 and abs(first - 4.4934) <= 1e-3
        return passed, f"{mismatches} mismatches against the sign scan, y1 = {first:.6f}"

    def check_magnetic_charge(self):
        worst = 0.0
        for charge_value in CHARGE_GRID:
            lam = self.covector(2, charge_value)
            arc = integrate_extremal(lam, 5.0)
            for index in (1, len(arc) // 2, len(arc) - 2):
                worst = max(worst, abs(magnetic_charge(arc, index) - charge_value))
        return worst <= 1e-5, f"projected curves have geodesic curvature ū within {worst:.2e}"

    # -----------------------------------------------------------------------

    def print_summary(self):
        console.banner("📊 ACCEPTANCE SUMMARY")
        if not self.issues:
            console.say(f"\n✅ ALL {len(self.results)} CRITERIA PASSED")
        else:
            console.say(f"\n⚠️  {len(self.issues)} of {len(self.results)} criteria failed:\n")
            for i, issue in enumerate(self.issues, 1):
                console.say(f"   {i}. {issue}")
        console.say("\n" + "=" * 60)


def _coefficient_error(coeffs: CurvatureCoefficients, omega_b, omega_c):
    errors = [abs(coeffs.r_bb - omega_b)]
    if coeffs.d_c:
        errors.append(float(np.max(np.abs(coeffs.r_bc))))
        errors.append(float(np.max(np.abs(coeffs.r_cc - omega_c * np.eye(coeffs.d_c)))))
    return max(errors)


def sign_scan_tan_roots(omega_b, T, points_per_unit=2000):
    """Independent count: sign changes of sin y - y cos y on (0, √ω_b T / 2]"""
    top = math.sqrt(omega_b) * T / 2
    y = np.linspace(1e-3, top, max(16, int(points_per_unit * top)))
    f = np.sin(y) - y * np.cos(y)
    return int(np.sum(np.signbit(f[1:]) != np.signbit(f[:-1])))
