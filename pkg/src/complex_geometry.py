"""Ambient model of S^{2n+1} in C^{n+1} with the Hopf vertical/horizontal split.

Every base-manifold (CP^n) quantity is evaluated on horizontal lifts: the
Fubini-Study metric is the round inner product of lifts, J is complex
multiplication by i, and the curvature tensor is the closed form of constant
holomorphic sectional curvature 4.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from errors import GeometryError

SPHERE_TOL = 1e-12
HORIZONTAL_TOL = 1e-12
BASE_TOL = 1e-12
DEGENERATE_SIN_SQ = 1e-12
DIAGNOSTIC_STEP = 1e-4
DIAGNOSTIC_MIN_PAIRING = 1e-6


def re_inner(u, v):
    """Real inner product Re<u, v> over the last axis (works on batches)"""
    return np.real(np.sum(u * np.conj(v), axis=-1))


@dataclass(frozen=True, eq=False)
class AmbientVector:
    components: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.components, dtype=complex)
        if arr.ndim != 1 or arr.size < 2:
            raise GeometryError(f"Ambient vectors need n+1 >= 2 complex components, got shape {arr.shape}")
        object.__setattr__(self, 'components', arr)

    @classmethod
    def from_real(cls, coords):
        """Build from interleaved real coordinates (x_1, y_1, ..., x_{n+1}, y_{n+1})"""
        coords = np.asarray(coords, dtype=float)
        if coords.ndim != 1 or coords.size % 2:
            raise GeometryError(f"Real view must have even length, got {coords.size}")
        return cls(coords[0::2] + 1j * coords[1::2])

    @classmethod
    def basis(cls, n, k, imaginary=False):
        comps = np.zeros(n + 1, dtype=complex)
        comps[k] = 1j if imaginary else 1.0
        return cls(comps)

    @property
    def real(self):
        return np.column_stack((self.components.real, self.components.imag)).ravel()

    @property
    def fibration_index(self):
        return self.components.size - 1

    def norm(self):
        return float(np.linalg.norm(self.components))

    def __add__(self, other):
        return AmbientVector(self.components + _raw(other))

    def __sub__(self, other):
        return AmbientVector(self.components - _raw(other))

    def __neg__(self):
        return AmbientVector(-self.components)

    def __mul__(self, scalar):
        return AmbientVector(self.components * scalar)

    __rmul__ = __mul__

    def __repr__(self):
        return f"AmbientVector({np.array2string(self.components, precision=6)})"


@dataclass(frozen=True, eq=False)
class SpherePoint:
    z: AmbientVector

    def __post_init__(self):
        if not isinstance(self.z, AmbientVector):
            object.__setattr__(self, 'z', AmbientVector(self.z))
        if abs(self.z.norm() - 1.0) > SPHERE_TOL:
            raise GeometryError(f"Point is off the unit sphere: |z| = {self.z.norm():.15f}")

    @classmethod
    def normalized(cls, v):
        comps = _raw(v)
        size = np.linalg.norm(comps)
        if size == 0.0:
            raise GeometryError("Cannot normalize the zero vector onto the sphere")
        return cls(AmbientVector(comps / size))

    @property
    def n(self):
        return self.z.fibration_index

    @property
    def components(self):
        return self.z.components


@dataclass(frozen=True, eq=False)
class HorizontalVector:
    base: SpherePoint
    v: AmbientVector

    def __post_init__(self):
        if not isinstance(self.v, AmbientVector):
            object.__setattr__(self, 'v', AmbientVector(self.v))
        z = self.base.components
        if self.v.components.size != z.size:
            raise GeometryError("Horizontal vector and base point live in different dimensions")
        scale = max(1.0, self.v.norm())
        if abs(re_inner(self.v.components, z)) > HORIZONTAL_TOL * scale:
            raise GeometryError("Vector is not tangent to the sphere at its base point")
        if abs(re_inner(self.v.components, 1j * z)) > HORIZONTAL_TOL * scale:
            raise GeometryError("Vector has a vertical component")

    @property
    def components(self):
        return self.v.components

    def norm(self):
        return self.v.norm()

    def __add__(self, other):
        _check_common_base(self, other)
        return HorizontalVector(self.base, self.v + other.v)

    def __sub__(self, other):
        _check_common_base(self, other)
        return HorizontalVector(self.base, self.v - other.v)

    def __mul__(self, scalar):
        # real scalars only: multiplying by i leaves H_z only through J
        return HorizontalVector(self.base, self.v * float(scalar))

    __rmul__ = __mul__


def _raw(v):
    if isinstance(v, (AmbientVector, HorizontalVector, SpherePoint)):
        return v.components
    return np.asarray(v, dtype=complex)


def _check_common_base(*vectors):
    first = vectors[0].base.components
    for other in vectors[1:]:
        if other.base is vectors[0].base:
            continue
        if first.size != other.base.components.size or \
                np.max(np.abs(first - other.base.components)) > BASE_TOL:
            raise GeometryError("Horizontal vectors are attached to different base points")


# ---------------------------------------------------------------------------
# Hopf split


def vertical_field(z: SpherePoint) -> AmbientVector:
    """V(z) = iz, the unit generator of the circle action"""
    return AmbientVector(1j * z.components)


def project_horizontal_raw(z, v):
    """v - Re<v,z> z - Re<v,iz> iz on raw (possibly batched) arrays"""
    iz = 1j * z
    return v - re_inner(v, z)[..., None] * z - re_inner(v, iz)[..., None] * iz


def horizontal_project(z: SpherePoint, v) -> HorizontalVector:
    comps = project_horizontal_raw(z.components, _raw(v))
    return HorizontalVector(z, AmbientVector(comps))


def complex_structure(h: HorizontalVector) -> HorizontalVector:
    return HorizontalVector(h.base, AmbientVector(1j * h.components))


def fs_metric(u: HorizontalVector, v: HorizontalVector) -> float:
    """Fubini-Study inner product of the projections, read on horizontal lifts"""
    _check_common_base(u, v)
    return float(re_inner(u.components, v.components))


def connection_form(z: SpherePoint, v) -> float:
    """Component of v along the unit vertical field; the caller validates tangency"""
    return float(re_inner(_raw(v), 1j * z.components))


# ---------------------------------------------------------------------------
# Curvature


def curvature_kernel(X, Y, Z, W, j_sign=1.0):
    """R4 on raw (batched) horizontal arrays.

    j_sign = -1 flips the Kähler terms; only the audit's negative control uses it.
    """
    g = re_inner
    JX, JY, JZ = 1j * X, 1j * Y, 1j * Z
    metric_part = g(X, Z) * g(Y, W) - g(Y, Z) * g(X, W)
    kahler_part = g(JX, Z) * g(JY, W) - g(JY, Z) * g(JX, W) + 2.0 * g(JX, Y) * g(JZ, W)
    return metric_part + j_sign * kahler_part


def riemann4(X: HorizontalVector, Y: HorizontalVector,
             Z: HorizontalVector, W: HorizontalVector) -> float:
    _check_common_base(X, Y, Z, W)
    return float(curvature_kernel(X.components, Y.components, Z.components, W.components))


def _column(values):
    return np.asarray(values)[..., None]


def orthonormal_plane(X, Y):
    """Gram-Schmidt on raw (batched) pairs: returns X̂, Ŷ and sin² of the angle between X and Y.

    Zero vectors give nan, which every degeneracy test below treats as degenerate.
    """
    with np.errstate(divide='ignore', invalid='ignore'):
        x_hat = X / _column(np.sqrt(re_inner(X, X)))
        y_perp = Y - _column(re_inner(Y, x_hat)) * x_hat
        # second pass for nearly parallel pairs
        y_perp = y_perp - _column(re_inner(y_perp, x_hat)) * x_hat
        perp_sq = re_inner(y_perp, y_perp)
        y_hat = y_perp / _column(np.sqrt(perp_sq))
        sin_sq = perp_sq / re_inner(Y, Y)
    return x_hat, y_hat, sin_sq


def sectional_curvature_raw(X, Y, j_sign=1.0):
    """Sectional curvature on batches; degenerate planes come back as nan"""
    x_hat, y_hat, sin_sq = orthonormal_plane(X, Y)
    with np.errstate(invalid='ignore'):
        values = curvature_kernel(x_hat, y_hat, x_hat, y_hat, j_sign=j_sign)
        return np.where(sin_sq > DEGENERATE_SIN_SQ, values, np.nan)


def sectional_curvature(X: HorizontalVector, Y: HorizontalVector) -> float:
    _check_common_base(X, Y)
    x_hat, y_hat, sin_sq = orthonormal_plane(X.components, Y.components)
    if not sin_sq > DEGENERATE_SIN_SQ:
        raise GeometryError(f"Degenerate plane: sin^2 of the angle between X and Y is {float(sin_sq):.3e}")
    return float(curvature_kernel(x_hat, y_hat, x_hat, y_hat))


def curvature_form(z: SpherePoint, X: HorizontalVector, Y: HorizontalVector,
                   step=DIAGNOSTIC_STEP) -> float:
    """dω(X,Y) by central differences of the connection form.

    ω extends to C^{n+1} as w -> Re<., iw>, so X and Y are extended as
    constant ambient fields and the bracket term vanishes.
    """
    _check_common_base(X, Y)
    base = z.components
    x, y = X.components, Y.components

    def omega_at(w, v):
        return re_inner(v, 1j * w)

    dx_omega_y = (omega_at(base + step * x, y) - omega_at(base - step * x, y)) / (2 * step)
    dy_omega_x = (omega_at(base + step * y, x) - omega_at(base - step * y, x)) / (2 * step)
    return float(dx_omega_y - dy_omega_x)


def curvature_form_diagnostic(z: SpherePoint, X: HorizontalVector, Y: HorizontalVector,
                              step=DIAGNOSTIC_STEP):
    """Ratio dω(X,Y) / g(JX,Y), or None when the pairing is too small to use"""
    pairing = fs_metric(complex_structure(X), Y)
    if abs(pairing) <= DIAGNOSTIC_MIN_PAIRING:
        return None
    return curvature_form(z, X, Y, step=step) / pairing


# ---------------------------------------------------------------------------
# Sampling


def random_sphere_raw(rng, n, size=None):
    shape = (n + 1,) if size is None else (size, n + 1)
    w = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return w / np.linalg.norm(w, axis=-1, keepdims=True)


def random_horizontal_raw(rng, z):
    w = rng.standard_normal(z.shape) + 1j * rng.standard_normal(z.shape)
    return project_horizontal_raw(z, w)


def random_sphere_point(rng, n) -> SpherePoint:
    return SpherePoint(AmbientVector(random_sphere_raw(rng, n)))


def random_horizontal(rng, base: SpherePoint, unit=False) -> HorizontalVector:
    v = random_horizontal_raw(rng, base.components)
    if unit:
        v = v / np.linalg.norm(v)
    return HorizontalVector(base, AmbientVector(v))


@lru_cache(maxsize=None)
def measure_charge_ratio(n, samples=100, seed=0, step=DIAGNOSTIC_STEP):
    """Median of the dω / g(J.,.) ratio over random points and planes"""
    rng = np.random.default_rng(seed)
    ratios = []
    attempts = 0
    while len(ratios) < samples and attempts < 20 * samples:
        attempts += 1
        z = random_sphere_point(rng, n)
        ratio = curvature_form_diagnostic(z, random_horizontal(rng, z), random_horizontal(rng, z), step=step)
        if ratio is not None:
            ratios.append(ratio)
    if not ratios:
        raise GeometryError("Every diagnostic sample was skipped; cannot measure the charge ratio")
    return float(np.median(ratios))


def resolve_charge_ratio(mode, n, seed=0):
    """measured: the diagnostic's ratio; printed: 1.0, the curvature formula taken literally"""
    if mode == 'printed':
        return 1.0
    if mode == 'measured':
        return measure_charge_ratio(n, seed=seed)
    raise GeometryError(f"Unknown charge normalization {mode!r}")


# ---------------------------------------------------------------------------
# Audit


def symmetry_residuals(rng, n, size=1000, j_sign=1.0):
    """Largest violations of the algebraic curvature identities on random quadruples"""
    z = random_sphere_raw(rng, n, size)
    X, Y, Z, W = (random_horizontal_raw(rng, z) for _ in range(4))

    def R(a, b, c, d):
        return curvature_kernel(a, b, c, d, j_sign=j_sign)

    base = R(X, Y, Z, W)
    return {
        'antisymmetry_first': float(np.max(np.abs(base + R(Y, X, Z, W)))),
        'antisymmetry_second': float(np.max(np.abs(base + R(X, Y, W, Z)))),
        'pair_symmetry': float(np.max(np.abs(base - R(Z, W, X, Y)))),
        'bianchi': float(np.max(np.abs(base + R(Y, Z, X, W) + R(Z, X, Y, W)))),
    }


def extreme_planes(rng, n, j_sign=1.0):
    """Sectional curvature on a holomorphic plane and, for n >= 2, a totally real one"""
    z = random_sphere_raw(rng, n)
    x = random_horizontal_raw(rng, z)
    x = x / np.linalg.norm(x)
    result = {'holomorphic': float(sectional_curvature_raw(x, 1j * x, j_sign=j_sign))}
    if n >= 2:
        y = random_horizontal_raw(rng, z)
        y = y - re_inner(y, x) * x - re_inner(y, 1j * x) * (1j * x)
        result['totally_real'] = float(sectional_curvature_raw(x, y / np.linalg.norm(y), j_sign=j_sign))
    return result


def audit_curvature(n, samples=100_000, seed=0, j_sign=1.0, bound_tol=1e-9):
    """Sectional curvature range, sharpness, symmetries and the dω normalization at fibration index n"""
    rng = np.random.default_rng(seed)
    z = random_sphere_raw(rng, n, samples)
    values = sectional_curvature_raw(random_horizontal_raw(rng, z), random_horizontal_raw(rng, z), j_sign=j_sign)
    usable = values[np.isfinite(values)]
    violations = int(np.sum((usable < 1.0 - bound_tol) | (usable > 4.0 + bound_tol)))

    ratios = []
    for _ in range(100):
        point = random_sphere_point(rng, n)
        ratio = curvature_form_diagnostic(point, random_horizontal(rng, point), random_horizontal(rng, point))
        if ratio is not None:
            ratios.append(ratio)

    return {
        'n': n,
        'samples': int(samples),
        'skipped': int(samples - usable.size),
        'min': float(np.min(usable)),
        'max': float(np.max(usable)),
        'violations': violations,
        'extremes': extreme_planes(rng, n, j_sign=j_sign),
        'symmetry': symmetry_residuals(rng, n, j_sign=j_sign),
        'charge_ratio': float(np.median(ratios)),
        'charge_ratio_spread': float(np.max(ratios) - np.min(ratios)),
    }
