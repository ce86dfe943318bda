"""Conjugate-time detection by smallest-singular-value dips.

A detector is handed a grid of states produced by an integrator and the
right-hand side that produced them. It monitors one matrix per state whose
rank drops exactly when the Jacobi curve meets its initial position, finds
the dips of the smallest singular value, refines them by repeated parabolic
fits of σ_min² and reads the multiplicity off the singular values at the
refined time. Determinant sign changes are not used: even multiplicities
do not change the sign.
"""
import numpy as np

from complex_geometry import re_inner
from config import DEFAULT_TOL
from errors import RefinementError
from integrators import rk4_step


GUARD = 1e-3
DUPLICATE_TOL = 1e-7
# second and third parabolic fits; the first one uses the grid step
REFINE_SPACINGS = (1e-6, 1e-8)


class BaseDetector:
    method = None

    def __init__(self, rhs, tol=DEFAULT_TOL, guard=GUARD):
        self.rhs = rhs
        self.tol = tol
        self.guard = guard

    def monitor(self, states):
        """Override: batch of monitored matrices, one per state"""
        raise NotImplementedError("Subclass must implement monitor()")

    def singular_values(self, states):
        return np.linalg.svd(self.monitor(states), compute_uv=False)

    def detect(self, times, states, T):
        """Ordered (time, multiplicity) pairs of conjugate times in (guard, T]"""
        sigma = self.singular_values(states)
        smallest = sigma[:, -1]
        step = times[1] - times[0]

        found = []
        for k in self._dip_indices(times, smallest):
            t_star = self._refine(times[k], states[k], step, smallest[k - 1:k + 2] ** 2)
            values = self.singular_values(self._state_at(times[k], states[k], t_star)[None])[0]
            threshold = self.tol * max(1.0, values[0])
            multiplicity = int(np.sum(values < threshold))
            if multiplicity and self.guard < t_star <= T + 1e-9:
                found.append((t_star, multiplicity))
        return self._merge(found, step)

    def _dip_indices(self, times, smallest):
        interior = np.arange(1, smallest.size - 1)
        is_dip = (smallest[interior] <= smallest[interior - 1]) & (smallest[interior] < smallest[interior + 1])
        return [k for k in interior[is_dip] if times[k] > self.guard]

    def _state_at(self, anchor_time, anchor_state, t):
        if t == anchor_time:
            return anchor_state
        return rk4_step(self.rhs, anchor_time, anchor_state, t - anchor_time)

    def _sigma_sq(self, anchor_time, anchor_state, t):
        state = self._state_at(anchor_time, anchor_state, t)
        return float(self.singular_values(state[None])[0, -1] ** 2)

    def _refine(self, anchor_time, anchor_state, step, grid_values):
        t = anchor_time + _parabola_vertex(*grid_values, step)
        for spacing in REFINE_SPACINGS:
            values = [self._sigma_sq(anchor_time, anchor_state, t + d) for d in (-spacing, 0.0, spacing)]
            t = t + _parabola_vertex(*values, spacing)
        return t

    @staticmethod
    def _merge(found, step):
        found.sort()
        merged = []
        for t, mult in found:
            if merged and t - merged[-1][0] < DUPLICATE_TOL:
                merged[-1] = (merged[-1][0], max(merged[-1][1], mult))
            elif merged and t - merged[-1][0] < step:
                raise RefinementError(merged[-1][0], t, step)
            else:
                merged.append((t, mult))
        return merged


def _parabola_vertex(f_lo, f_mid, f_hi, spacing):
    """Offset of the vertex of the parabola through three equally spaced samples"""
    curvature = f_lo - 2.0 * f_mid + f_hi
    if curvature <= 0.0:
        return 0.0
    offset = 0.5 * spacing * (f_lo - f_hi) / curvature
    return float(np.clip(offset, -spacing, spacing))


class FrameDetector(BaseDetector):
    """Monitors M(t)_ij = σ(E_i(t), E_j(0)) for Darboux frame coordinates"""
    method = 'structural'

    def __init__(self, rhs, half_dim, **kwargs):
        super().__init__(rhs, **kwargs)
        self.half_dim = half_dim

    def monitor(self, states):
        m = self.half_dim
        # σ(F_k(0), E_j(0)) = -δ_kj, so M = -(F-coordinates of E(t))^T
        return -np.swapaxes(states[:, m:, :m], 1, 2)


class VariationalDetector(BaseDetector):
    """Monitors the projections of δz_k(t) orthogonal to z(t) and ż(t)"""
    method = 'variational'

    def monitor(self, states):
        z = states[:, 0, 0]
        p = states[:, 0, 1]
        dz = states[:, 1:, 0]
        u0 = re_inner(p, 1j * z)
        zdot = p - u0[:, None] * 1j * z
        zdot = zdot / np.linalg.norm(zdot, axis=-1, keepdims=True)
        projected = dz - re_inner(dz, z[:, None, :])[..., None] * z[:, None, :]
        projected = projected - re_inner(projected, zdot[:, None, :])[..., None] * zdot[:, None, :]
        real_view = np.stack((projected.real, projected.imag), axis=-1).reshape(projected.shape[:2] + (-1,))
        return np.swapaxes(real_view, 1, 2)


def variation_pairings(state):
    """σ(δ_i, δ_j) = Re<δp_i, δz_j> - Re<δp_j, δz_i> for every pair of variations"""
    dz = state[1:, 0]
    dp = state[1:, 1]
    cross = re_inner(dp[:, None, :], dz[None, :, :])
    return cross - cross.T
