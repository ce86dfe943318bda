"""Counting function Z_T, comparison bounds and the conjugate-point intervals."""
import math
from dataclasses import asdict, dataclass

from errors import NormalizationMismatchError
from jacobi_conjugate import ConjugateReport, closed_form_conjugate_times, tan_root

FLOOR_TOL = 1e-12
CHARGE_TOL = 1e-6
# measured times are trusted to this accuracy when compared with interval ends
TIME_TOL = 1e-6


@dataclass(frozen=True)
class BoundsReport:
    u0: float
    T: float
    dc: int
    z_lower: int
    predicted: int
    measured: int
    z_upper: int
    passed: bool

    def row(self):
        """Flat record in CSV column order"""
        record = asdict(self)
        record['pass'] = record.pop('passed')
        return record


def fibre_dimension(n):
    """d_c = 2n - 2, the size of the V_c block"""
    return 2 * n - 2


def _floor(x):
    return math.floor(x + FLOOR_TOL)


def count_tan_roots(omega_b, T):
    """Solutions x in (0, T] of tan(√ω_b x / 2) = √ω_b x / 2"""
    if T <= 0:
        return 0
    scale = math.sqrt(omega_b)
    count = 0
    while 2 * tan_root(count + 1) / scale <= T + FLOOR_TOL:
        count += 1
    return count


def z_function(omega_b, omega_c, d_c, T):
    return (d_c * _floor(T * math.sqrt(omega_c) / math.pi)
            + _floor(T * math.sqrt(omega_b) / (2 * math.pi))
            + count_tan_roots(omega_b, T))


def bounds_check(measured: ConjugateReport, u0, n, T) -> BoundsReport:
    """Place a measured count between the lower and upper comparison bounds"""
    if measured.charge is not None and abs(measured.charge - u0) > CHARGE_TOL:
        raise NormalizationMismatchError(
            f"Report was measured at charge {measured.charge:.9f}, bounds requested for {u0:.9f}")
    d_c = fibre_dimension(n)
    u_sq = u0 * u0
    z_lower = z_function(1 + u_sq, 1 + u_sq / 4, d_c, T)
    z_upper = z_function(4 + u_sq, 4 + u_sq / 4, d_c, T)
    predicted = closed_form_conjugate_times(4 + u_sq, 1 + u_sq / 4, d_c, T).total
    return BoundsReport(u0=u0, T=T, dc=d_c, z_lower=z_lower, predicted=predicted,
                        measured=measured.total, z_upper=z_upper,
                        passed=z_lower <= measured.total <= z_upper)


def corollary_intervals(u0, n):
    d_c = fibre_dimension(n)
    u_sq = u0 * u0
    return {
        'conjugate_free_radius': math.pi / math.sqrt(4 + u_sq / 4),
        'first_guarantee': {'radius': 2 * math.pi / math.sqrt(4 + u_sq), 'at_least': d_c},
        'second_guarantee': {'radius': 2 * math.pi / math.sqrt(1 + u_sq), 'at_least': d_c + 1},
    }


def check_corollary(report: ConjugateReport, intervals):
    """Apply the three interval statements to a measured report"""
    early = report.count_up_to(intervals['conjugate_free_radius'], inclusive=False, tol=TIME_TOL)
    results = {'conjugate_free': early == 0}
    for key in ('first_guarantee', 'second_guarantee'):
        radius = intervals[key]['radius']
        if radius > report.horizon:
            # the report does not reach the interval end
            results[key] = None
        else:
            results[key] = report.count_up_to(radius, tol=TIME_TOL) >= intervals[key]['at_least']
    return results
