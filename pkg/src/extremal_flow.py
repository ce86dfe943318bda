import math
from dataclasses import dataclass

import numpy as np

from complex_geometry import (AmbientVector, SpherePoint, project_horizontal_raw, re_inner,
                              random_horizontal_raw, random_sphere_raw)
from errors import GeometryError
from integrators import integrate_on_grid

GAUGE_TOL = 1e-10
MAX_STEP = 1e-3


@dataclass(frozen=True, eq=False)
class PhasePoint:
    """λ = (p, z): momentum identified with a vector via the round metric"""
    z: SpherePoint
    p: AmbientVector

    def __post_init__(self):
        if not isinstance(self.z, SpherePoint):
            object.__setattr__(self, 'z', SpherePoint(AmbientVector(self.z)))
        if not isinstance(self.p, AmbientVector):
            object.__setattr__(self, 'p', AmbientVector(self.p))
        if self.p.components.size != self.z.components.size:
            raise GeometryError("Momentum and base point live in different dimensions")

    @property
    def n(self):
        return self.z.n

    @property
    def h(self):
        return hamiltonian(self)

    @property
    def u0(self):
        return vertical_momentum(self)

    def gauge_residual(self):
        return float(re_inner(self.p.components, self.z.components))

    def is_gauge_fixed(self, tol=GAUGE_TOL):
        return abs(self.gauge_residual()) <= tol

    def horizontal_momentum(self):
        return project_horizontal_raw(self.z.components, self.p.components)


@dataclass(frozen=True, eq=False)
class GeodesicArc:
    initial: PhasePoint
    times: np.ndarray
    z: np.ndarray          # (nodes, n+1) complex
    p: np.ndarray
    step: float
    method: str = 'rk4'

    def __len__(self):
        return self.times.size

    def state(self, index):
        return PhasePoint(SpherePoint(AmbientVector(self.z[index])), AmbientVector(self.p[index]))

    @property
    def states(self):
        return [self.state(k) for k in range(len(self))]

    def conserved(self):
        """h, u0, |z| and the gauge residual at every node"""
        return {
            'h': hamiltonian_raw(self.z, self.p),
            'u0': vertical_momentum_raw(self.z, self.p),
            'norm_z': np.linalg.norm(self.z, axis=-1),
            'gauge': re_inner(self.p, self.z),
        }

    def drift(self):
        values = self.conserved()
        return {
            'h': float(np.max(np.abs(values['h'] - values['h'][0]))),
            'u0': float(np.max(np.abs(values['u0'] - values['u0'][0]))),
            'norm_z': float(np.max(np.abs(values['norm_z'] - 1.0))),
            'gauge': float(np.max(np.abs(values['gauge']))),
        }


# ---------------------------------------------------------------------------
# Conserved quantities


def hamiltonian_raw(z, p):
    return 0.5 * (re_inner(p, p) - re_inner(p, z) ** 2 - re_inner(p, 1j * z) ** 2)


def vertical_momentum_raw(z, p):
    return re_inner(p, 1j * z)


def hamiltonian(lam: PhasePoint) -> float:
    """½|p_H|², gauge-invariant under p -> p + s z"""
    return float(hamiltonian_raw(lam.z.components, lam.p.components))


def vertical_momentum(lam: PhasePoint) -> float:
    """u0 = p·V(z) = Re<p, iz>"""
    return float(vertical_momentum_raw(lam.z.components, lam.p.components))


def charge(lam: PhasePoint, ratio) -> float:
    """Vertical momentum in the normalization g(JX,Y) = dω(X,Y): ratio · u0"""
    return ratio * vertical_momentum(lam)


def normalize_gauge(lam: PhasePoint) -> PhasePoint:
    z = lam.z.components
    p = lam.p.components
    return PhasePoint(lam.z, AmbientVector(p - re_inner(p, z) * z))


def rotate_phase(lam: PhasePoint, theta) -> PhasePoint:
    """Circle action e^{iθ} on both z and p"""
    phase = np.exp(1j * theta)
    return PhasePoint(SpherePoint.normalized(phase * lam.z.components), AmbientVector(phase * lam.p.components))


# ---------------------------------------------------------------------------
# Flow


def flow_rhs(z, p):
    """ż = p - u0 iz,  ṗ = -u0 ip - (2h + u0²) z, with u0 and 2h+u0² read from the state"""
    u0 = re_inner(p, 1j * z)
    multiplier = re_inner(p, p) - re_inner(p, z) ** 2
    return p - u0 * 1j * z, -u0 * 1j * p - multiplier * z


def _stacked_rhs(t, y):
    dz, dp = flow_rhs(y[0], y[1])
    return np.stack((dz, dp))


def variational_rhs(t, y):
    """Reference arc in y[0] and 2n linearized variations (δz, δp) in y[1:].

    The variations follow the exact linearization of flow_rhs, which reduces
    to the gauge-fixed variational system when Re<p,z> = 0.
    """
    z, p = y[0, 0], y[0, 1]
    dz, dp = y[1:, 0], y[1:, 1]
    iz = 1j * z
    u0 = re_inner(p, iz)
    gauge = re_inner(p, z)
    multiplier = re_inner(p, p) - gauge ** 2
    du0 = re_inner(dp, iz) + re_inner(p, 1j * dz)
    dmultiplier = 2.0 * re_inner(p, dp) - 2.0 * gauge * (re_inner(dp, z) + re_inner(p, dz))

    out = np.empty_like(y)
    out[0, 0], out[0, 1] = flow_rhs(z, p)
    out[1:, 0] = dp - du0[:, None] * iz - u0 * 1j * dz
    out[1:, 1] = -du0[:, None] * 1j * p - u0 * 1j * dp - dmultiplier[:, None] * z - multiplier * dz
    return out


def project_reference(y):
    """Constraint projection of the reference arc only; variations are left free"""
    out = np.array(y, copy=True)
    out[0] = project_constraints(y[0])
    return out


def project_constraints(y):
    z = y[0] / np.linalg.norm(y[0])
    p = y[1] - re_inner(y[1], z) * z
    return np.stack((z, p))


def default_extremal_steps(T):
    return max(1, math.ceil(T / MAX_STEP))


def integrate_extremal(lam0: PhasePoint, T, steps=None) -> GeodesicArc:
    """Normal extremal through lam0 by RK4 with per-step constraint projection"""
    if not T > 0:
        raise ValueError(f"Integration horizon must be positive, got T = {T}")
    if not lam0.is_gauge_fixed():
        raise GeometryError(f"Initial covector is not gauge-fixed: Re<p,z> = {lam0.gauge_residual():.3e}")
    steps = steps or default_extremal_steps(T)
    y0 = np.stack((lam0.z.components, lam0.p.components))
    times, states = integrate_on_grid(_stacked_rhs, y0, T, steps, project=project_constraints)
    return GeodesicArc(initial=lam0, times=times, z=states[:, 0], p=states[:, 1], step=T / steps)


def closed_form_raw(z0, p0, times):
    """Closed-form (z, p) at an array of times for a gauge-fixed initial covector"""
    times = np.atleast_1d(np.asarray(times, dtype=float))[:, None]
    u0 = re_inner(p0, 1j * z0)
    omega = math.sqrt(max(2.0 * hamiltonian_raw(z0, p0) + u0 ** 2, 0.0))
    if omega == 0.0:
        return np.repeat(z0[None, :], times.shape[0], axis=0), np.repeat(p0[None, :], times.shape[0], axis=0)
    phase = np.exp(-1j * u0 * times)
    c, s = np.cos(omega * times), np.sin(omega * times)
    z = phase * (c * z0 + (s / omega) * p0)
    p = phase * (-omega * s * z0 + c * p0)
    return z, p


def closed_form_geodesic(lam0: PhasePoint, t) -> PhasePoint:
    if not lam0.is_gauge_fixed():
        raise GeometryError("Closed form needs a gauge-fixed initial covector")
    if t == 0:
        return lam0
    z, p = closed_form_raw(lam0.z.components, lam0.p.components, [t])
    return PhasePoint(SpherePoint.normalized(z[0]), AmbientVector(p[0]))


def closed_form_gap(arc: GeodesicArc):
    """Per-node sup-norm distance between the integrated and closed-form states"""
    z, p = closed_form_raw(arc.initial.z.components, arc.initial.p.components, arc.times)
    return np.maximum(np.max(np.abs(arc.z - z), axis=-1), np.max(np.abs(arc.p - p), axis=-1))


# ---------------------------------------------------------------------------
# Initial conditions and the magnetic reading of extremals


def initial_covector(n, charge_value, ratio, direction=None, seed=0) -> PhasePoint:
    """Covector on h = 1/2 whose charge (ratio · u0) equals charge_value.

    direction counts the 2n real horizontal directions at e_1 (even: e_k,
    odd: i e_k); without it the point and direction come from the seed.
    """
    if ratio == 0:
        raise GeometryError("Charge ratio must be nonzero")
    if direction is not None:
        if not 0 <= direction < 2 * n:
            raise GeometryError(f"Horizontal direction index must lie in [0, {2 * n}), got {direction}")
        z = np.zeros(n + 1, dtype=complex)
        z[0] = 1.0
        ph = np.zeros(n + 1, dtype=complex)
        ph[direction // 2 + 1] = 1j if direction % 2 else 1.0
    else:
        rng = np.random.default_rng(seed)
        z = random_sphere_raw(rng, n)
        ph = random_horizontal_raw(rng, z)
        ph = ph / np.linalg.norm(ph)
    p = ph + (charge_value / ratio) * 1j * z
    return PhasePoint(SpherePoint.normalized(z), AmbientVector(p))


def magnetic_charge(arc: GeodesicArc, index) -> float:
    """Charge q of the projected curve, ∇_{γ'}γ' = -q Jγ', by finite differences of z.

    Uses only the integrated positions; equals ratio · u0 for the measured ratio.
    """
    if not 0 < index < len(arc) - 1:
        raise IndexError(f"Finite differences need an interior node, got {index}")
    dt = arc.step
    z_prev, z_mid, z_next = arc.z[index - 1], arc.z[index], arc.z[index + 1]
    velocity = project_horizontal_raw(z_mid, (z_next - z_prev) / (2 * dt))
    acceleration = project_horizontal_raw(z_mid, (z_next - 2 * z_mid + z_prev) / dt ** 2)
    speed_sq = re_inner(velocity, velocity)
    if speed_sq == 0.0:
        raise GeometryError("Projected curve is stationary; charge is undefined")
    return float(-re_inner(acceleration, 1j * velocity) / speed_sq)
