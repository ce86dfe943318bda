"""Canonical splitting, curvature maps, structural equations and conjugate times.

Two detectors look for the same event from independent sides: the structural
detector integrates the intrinsic Jacobi equations built from the curvature
maps, the variational detector pushes vertical variations through the
linearized extremal flow. closed_form_conjugate_times predicts what both
should find for constant coefficients.
"""
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import expm
from scipy.optimize import bisect

from complex_geometry import (AmbientVector, HorizontalVector, curvature_kernel, measure_charge_ratio,
                              re_inner)
from config import DEFAULT_TOL, default_steps
from detectors import GUARD, FrameDetector, VariationalDetector, variation_pairings
from errors import ConfigError, DegenerateMomentumError, GeometryError, LevelSetError
from extremal_flow import (PhasePoint, charge, hamiltonian, project_reference, variational_rhs,
                           vertical_momentum)
from integrators import integrate_on_grid

LEVEL_TOL = 1e-9
MIN_MOMENTUM = 1e-9
SYMMETRY_TOL = 1e-12
COINCIDENCE_TOL = 1e-9
VARIANTS = ('consistent', 'printed')
# extra grid steps past T so that roots at the horizon are bracketed
OVERSHOOT_STEPS = 2


# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True, eq=False)
class CanonicalSplitting:
    """Basis of V_a ⊕ V_b ⊕ V_c at λ, read on horizontal lifts"""
    base: PhasePoint
    a_dir: AmbientVector
    b_dir: HorizontalVector
    c_basis: tuple
    p_h: HorizontalVector

    @property
    def d_c(self):
        return len(self.c_basis)

    def gram(self):
        """Ambient Gram matrix of (a, p_h/|p_h|, b, c_1, ..., c_dc)"""
        unit_ph = self.p_h.components / self.p_h.norm()
        vectors = np.array([self.a_dir.components, unit_ph, self.b_dir.components]
                           + [c.components for c in self.c_basis])
        return re_inner(vectors[:, None, :], vectors[None, :, :])


@dataclass(frozen=True, eq=False)
class CurvatureCoefficients:
    r_aa: float
    r_ac: np.ndarray
    r_bb: float
    r_bc: np.ndarray
    r_cc: np.ndarray

    def __post_init__(self):
        r_ac = np.asarray(self.r_ac, dtype=float).reshape(-1)
        r_bc = np.asarray(self.r_bc, dtype=float).reshape(-1)
        r_cc = np.asarray(self.r_cc, dtype=float).reshape(r_ac.size, r_ac.size)
        if r_bc.size != r_ac.size:
            raise GeometryError("r_ac and r_bc must have the same length")
        if r_cc.size and np.max(np.abs(r_cc - r_cc.T)) > SYMMETRY_TOL:
            raise GeometryError("r_cc must be symmetric")
        object.__setattr__(self, 'r_ac', r_ac)
        object.__setattr__(self, 'r_bc', r_bc)
        object.__setattr__(self, 'r_cc', r_cc)
        object.__setattr__(self, 'r_aa', float(self.r_aa))
        object.__setattr__(self, 'r_bb', float(self.r_bb))

    @classmethod
    def constant(cls, omega_b, omega_c, d_c):
        """Hopf-type coefficients: r_bb = ω_b, r_cc = ω_c·I, everything else zero"""
        return cls(0.0, np.zeros(d_c), omega_b, np.zeros(d_c), omega_c * np.eye(d_c))

    @property
    def d_c(self):
        return self.r_ac.size

    @property
    def half_dim(self):
        return 2 + self.d_c

    def generator(self, variant='consistent'):
        """A with Y' = Y·A; column j holds the derivative of frame vector j.

        Frame order is (E_a, E_b, E_c..., F_a, F_b, F_c...).
        """
        if variant not in VARIANTS:
            raise ConfigError(f"Unknown structural variant {variant!r}")
        d = self.d_c
        m = 2 + d
        c_idx = np.arange(2, m)
        fc_idx = m + 2 + np.arange(d)
        A = np.zeros((2 * m, 2 * m))

        A[1, 0] = 1.0
        if variant == 'consistent':
            A[m + 1, 1] = 1.0
        else:
            if d != 1:
                raise ConfigError(f"The printed variant E_b' = E_c needs d_c = 1, got d_c = {d}")
            A[2, 1] = 1.0
        A[fc_idx, c_idx] = 1.0

        A[0, m] = -self.r_aa
        A[c_idx, m] = -self.r_ac
        A[m, m + 1] = -1.0
        A[1, m + 1] = -self.r_bb
        A[c_idx, m + 1] = -self.r_bc
        A[0, fc_idx] = -self.r_ac
        A[1, fc_idx] = -self.r_bc
        A[np.ix_(c_idx, fc_idx)] = -self.r_cc
        return A

    def to_dict(self):
        return {
            'r_aa': self.r_aa,
            'r_ac': self.r_ac.tolist(),
            'r_bb': self.r_bb,
            'r_bc': self.r_bc.tolist(),
            'r_cc': self.r_cc.tolist(),
        }


def symplectic_form(half_dim):
    eye = np.eye(half_dim)
    zero = np.zeros((half_dim, half_dim))
    return np.block([[zero, eye], [-eye, zero]])


@dataclass(frozen=True, eq=False)
class DarbouxFrameState:
    time: float
    frame: np.ndarray      # (2m, 2m); column j = coordinates of frame vector j

    @property
    def half_dim(self):
        return self.frame.shape[0] // 2

    @property
    def E(self):
        return self.frame[:, :self.half_dim]

    @property
    def F(self):
        return self.frame[:, self.half_dim:]

    def pairing_residual(self):
        omega = symplectic_form(self.half_dim)
        return float(np.max(np.abs(self.frame.T @ omega @ self.frame - omega)))


@dataclass(frozen=True, eq=False)
class FrameTrajectory:
    times: np.ndarray
    frames: np.ndarray
    variant: str

    @property
    def half_dim(self):
        return self.frames.shape[1] // 2

    def state(self, index):
        return DarbouxFrameState(float(self.times[index]), self.frames[index])

    def pairing_drift(self):
        omega = symplectic_form(self.half_dim)
        pulled = np.einsum('kia,ij,kjb->kab', self.frames, omega, self.frames)
        return float(np.max(np.abs(pulled - omega)))


@dataclass(frozen=True)
class ConjugateReport:
    entries: tuple
    method: str
    horizon: float
    tolerances: dict = field(default_factory=dict)
    charge: float = None

    def __post_init__(self):
        entries = tuple((float(t), int(m)) for t, m in self.entries)
        for (t_prev, _), (t_next, _) in zip(entries, entries[1:]):
            if not t_next > t_prev:
                raise ValueError(f"Conjugate times must increase strictly: {t_prev} then {t_next}")
        for t, mult in entries:
            if not 0.0 < t <= self.horizon + COINCIDENCE_TOL:
                raise ValueError(f"Conjugate time {t} outside (0, {self.horizon}]")
            if mult < 1:
                raise ValueError(f"Multiplicity must be positive, got {mult} at t = {t}")
        object.__setattr__(self, 'entries', entries)

    @property
    def total(self):
        return sum(mult for _, mult in self.entries)

    @property
    def times(self):
        return [t for t, _ in self.entries]

    @property
    def multiplicities(self):
        return [mult for _, mult in self.entries]

    def first(self):
        return self.entries[0] if self.entries else None

    def count_up_to(self, t, inclusive=True, tol=COINCIDENCE_TOL):
        if inclusive:
            return sum(mult for time, mult in self.entries if time <= t + tol)
        return sum(mult for time, mult in self.entries if time < t - tol)

    def to_dict(self):
        return {
            'method': self.method,
            'T': self.horizon,
            'charge': self.charge,
            'entries': [{'time': t, 'multiplicity': mult} for t, mult in self.entries],
            'total': self.total,
            'tolerances': dict(self.tolerances),
        }


# ---------------------------------------------------------------------------
# Splitting and curvature maps


def _orthonormal_completion(z, span, count):
    """`count` real-orthonormal vectors orthogonal to `span` (itself orthonormal).

    Deterministic Gram-Schmidt seeded from e_1, i e_1, e_2, i e_2, ...
    """
    accepted = [np.asarray(v, dtype=complex) for v in span]
    completion = []
    for k in range(z.size):
        for unit in (1.0, 1j):
            if len(completion) == count:
                return completion
            candidate = np.zeros(z.size, dtype=complex)
            candidate[k] = unit
            for _ in range(2):
                for v in accepted:
                    candidate = candidate - re_inner(candidate, v) * v
            size = np.linalg.norm(candidate)
            if size > 1e-6:
                candidate = candidate / size
                accepted.append(candidate)
                completion.append(candidate)
    if len(completion) < count:
        raise GeometryError(f"Could only complete {len(completion)} of {count} basis vectors")
    return completion


def _require_level_set(lam):
    h = hamiltonian(lam)
    if abs(h - 0.5) > LEVEL_TOL:
        raise LevelSetError(f"Covector is off the level set h = 1/2: h = {h:.12f}")


def canonical_splitting(lam: PhasePoint) -> CanonicalSplitting:
    ph = lam.horizontal_momentum()
    size = float(np.linalg.norm(ph))
    if size < MIN_MOMENTUM:
        raise DegenerateMomentumError(f"Horizontal momentum vanishes: |p^h| = {size:.3e}")
    _require_level_set(lam)

    z = lam.z.components
    unit = ph / size
    base = lam.z
    c_basis = _orthonormal_completion(z, [z, 1j * z, unit, 1j * unit], 2 * lam.n - 2)
    return CanonicalSplitting(
        base=lam,
        a_dir=AmbientVector(1j * z),
        b_dir=HorizontalVector(base, AmbientVector(1j * unit)),
        c_basis=tuple(HorizontalVector(base, AmbientVector(c)) for c in c_basis),
        p_h=HorizontalVector(base, AmbientVector(ph)),
    )


def resolve_ratio(lam, charge_ratio):
    return measure_charge_ratio(lam.n) if charge_ratio is None else charge_ratio


def curvature_maps(lam: PhasePoint, charge_ratio=None) -> CurvatureCoefficients:
    """Curvature maps at λ with every u0 of the formulas read as the charge.

    charge_ratio=None uses the measured dω / g(J.,.) ratio for this n.
    """
    splitting = canonical_splitting(lam)
    q = charge(lam, resolve_ratio(lam, charge_ratio))
    ph = splitting.p_h.components
    jph = 1j * ph
    d = splitting.d_c
    C = np.array([c.components for c in splitting.c_basis]).reshape(d, ph.size)

    r_bb = curvature_kernel(ph, jph, ph, jph) + q ** 2
    r_bc = curvature_kernel(ph, jph, ph, C)
    r_cc = curvature_kernel(ph, C[:, None, :], ph, C[None, :, :]) + (q ** 2 / 4.0) * np.eye(d)
    return CurvatureCoefficients(0.0, np.zeros(d), r_bb, r_bc, r_cc)


# ---------------------------------------------------------------------------
# Structural equations


def frame_rhs(coeffs, variant='consistent'):
    """Right-hand side Y' = Y·A(t) for constant coefficients or a provider t -> coefficients"""
    if isinstance(coeffs, CurvatureCoefficients):
        A = coeffs.generator(variant)
        return lambda t, Y: Y @ A
    return lambda t, Y: Y @ coeffs(t).generator(variant)


def _half_dim(coeffs):
    if isinstance(coeffs, CurvatureCoefficients):
        return coeffs.half_dim
    return coeffs(0.0).half_dim


def structural_ode_integrate(coeffs, T, steps=None, variant='consistent') -> FrameTrajectory:
    if not T > 0:
        raise ValueError(f"Integration horizon must be positive, got T = {T}")
    rhs = frame_rhs(coeffs, variant)
    steps = steps or default_steps(T)
    times, frames = integrate_on_grid(rhs, np.eye(2 * _half_dim(coeffs)), T, steps)
    return FrameTrajectory(times=times, frames=frames, variant=variant)


def constant_propagator(coeffs: CurvatureCoefficients, t, variant='consistent'):
    """Exact frame matrix at time t for constant coefficients"""
    return expm(coeffs.generator(variant) * t)


def conjugate_times_structural(lam: PhasePoint, T, steps=None, tol=DEFAULT_TOL, charge_ratio=None,
                               variant='consistent') -> ConjugateReport:
    if not T > 0:
        raise ValueError(f"Integration horizon must be positive, got T = {T}")
    ratio = resolve_ratio(lam, charge_ratio)
    coeffs = curvature_maps(lam, ratio)
    steps = steps or default_steps(T)
    step = T / steps
    trajectory = structural_ode_integrate(coeffs, T + OVERSHOOT_STEPS * step, steps + OVERSHOOT_STEPS, variant)
    detector = FrameDetector(frame_rhs(coeffs, variant), coeffs.half_dim, tol=tol)
    entries = detector.detect(trajectory.times, trajectory.frames, T)
    return ConjugateReport(tuple(entries), method='structural', horizon=T, charge=charge(lam, ratio),
                           tolerances=_tolerances(tol, step, variant=variant))


# ---------------------------------------------------------------------------
# Linearized flow


def initial_variations(lam0: PhasePoint):
    """2n orthonormal δp with δz = 0, orthogonal to z0 and ż(0)"""
    z = lam0.z.components
    zdot = lam0.p.components - vertical_momentum(lam0) * 1j * z
    zdot = zdot / np.linalg.norm(zdot)
    return np.array(_orthonormal_completion(z, [z, zdot], 2 * lam0.n))


def integrate_variations(lam0: PhasePoint, T, steps):
    _require_level_set(lam0)
    if not lam0.is_gauge_fixed():
        raise GeometryError(f"Initial covector is not gauge-fixed: Re<p,z> = {lam0.gauge_residual():.3e}")
    deltas = initial_variations(lam0)
    y0 = np.zeros((1 + deltas.shape[0], 2, lam0.z.components.size), dtype=complex)
    y0[0, 0] = lam0.z.components
    y0[0, 1] = lam0.p.components
    y0[1:, 1] = deltas
    return integrate_on_grid(variational_rhs, y0, T, steps, project=project_reference)


def variational_pairing_drift(lam0: PhasePoint, T, steps=None):
    """Largest change of σ(δ_i, δ_j) over the arc"""
    steps = steps or default_steps(T)
    _, states = integrate_variations(lam0, T, steps)
    initial = variation_pairings(states[0])
    return float(max(np.max(np.abs(variation_pairings(state) - initial)) for state in states))


def conjugate_times_variational(lam0: PhasePoint, T, steps=None, tol=DEFAULT_TOL,
                                charge_ratio=None) -> ConjugateReport:
    if not T > 0:
        raise ValueError(f"Integration horizon must be positive, got T = {T}")
    steps = steps or default_steps(T)
    step = T / steps
    times, states = integrate_variations(lam0, T + OVERSHOOT_STEPS * step, steps + OVERSHOOT_STEPS)
    entries = VariationalDetector(variational_rhs, tol=tol).detect(times, states, T)
    return ConjugateReport(tuple(entries), method='variational', horizon=T,
                           charge=charge(lam0, resolve_ratio(lam0, charge_ratio)),
                           tolerances=_tolerances(tol, step))


def _tolerances(tol, step, **extra):
    return {'rank': tol, 'guard': GUARD, 'step': step, **extra}


# ---------------------------------------------------------------------------
# Closed form


@lru_cache(maxsize=None)
def tan_root(k):
    """The root of tan(y) = y in (kπ, kπ + π/2), k >= 1"""
    if k < 1:
        raise ValueError(f"tan(y) = y has no positive root below π; got k = {k}")
    lo = k * math.pi + 1e-9
    hi = k * math.pi + math.pi / 2 - 1e-9
    return bisect(lambda y: math.tan(y) - y, lo, hi, xtol=1e-12)


def closed_form_conjugate_times(omega_b, omega_c, d_c, T) -> ConjugateReport:
    if omega_b <= 0 or omega_c <= 0 or d_c < 0 or T <= 0:
        raise ValueError("Need ω_b > 0, ω_c > 0, d_c >= 0 and T > 0")
    sqrt_b, sqrt_c = math.sqrt(omega_b), math.sqrt(omega_c)
    limit = T + COINCIDENCE_TOL
    events = []

    if d_c > 0:
        k = 1
        while k * math.pi / sqrt_c <= limit:
            events.append((k * math.pi / sqrt_c, d_c))
            k += 1
    k = 1
    while 2 * math.pi * k / sqrt_b <= limit:
        events.append((2 * math.pi * k / sqrt_b, 1))
        k += 1
    k = 1
    while 2 * tan_root(k) / sqrt_b <= limit:
        events.append((2 * tan_root(k) / sqrt_b, 1))
        k += 1

    merged = []
    for t, mult in sorted(events):
        if merged and t - merged[-1][0] <= COINCIDENCE_TOL:
            merged[-1] = (merged[-1][0], merged[-1][1] + mult)
        else:
            merged.append((t, mult))
    merged = [(min(t, T), mult) for t, mult in merged]
    return ConjugateReport(tuple(merged), method='closed_form', horizon=T,
                           tolerances={'coincidence': COINCIDENCE_TOL})


def compare_reports(first: ConjugateReport, second: ConjugateReport, time_tol=1e-4):
    """Pairwise agreement: entry counts, largest time gap, multiplicity mismatches"""
    same_count = len(first.entries) == len(second.entries)
    gaps = [abs(a - b) for a, b in zip(first.times, second.times)]
    mismatches = sum(1 for a, b in zip(first.multiplicities, second.multiplicities) if a != b)
    mismatches += abs(len(first.entries) - len(second.entries))
    max_gap = max(gaps, default=0.0) if same_count else None
    return {
        'methods': [first.method, second.method],
        'max_time_gap': max_gap,
        'multiplicity_mismatches': mismatches,
        'agree': same_count and mismatches == 0 and max_gap <= time_tol,
    }
