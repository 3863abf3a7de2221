"""Coherent-state manifolds, invariant measures, overlap kernels, quadrature.

Two manifolds are supported: the complex plane (field coherent states,
truncated to a square of half-width ``R``) and the unit 2-sphere (spin-J
coherent states). The invariant measure is folded into per-cell grid weights,
normalized so that the coherent-state identity resolution holds numerically:
``1/pi * dx dy`` on the plane and ``(2J+1)/(4 pi) * sin(theta) dtheta dphi``
on the sphere. Distribution values are stored without the metric factor;
``metric_density`` recovers it for figure-style output.

All objects are immutable after construction and all operations are pure.
Quadrature uses numpy pairwise summation, so results do not depend on
evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels

PLANE = "plane"
SPHERE = "sphere"


@dataclass(frozen=True)
class PhasePoint:
    """A point on a coherent-state manifold.

    ``kind`` selects the interpretation of the two coordinates:
    ``plane`` -> (re, im), ``sphere`` -> (theta in [0, pi], phi in [0, 2 pi)).
    Binary operations refuse to mix kinds.
    """

    kind: str
    c1: float
    c2: float

    def __post_init__(self):
        if self.kind not in (PLANE, SPHERE):
            raise ValueError(f"unknown manifold kind {self.kind!r}")
        if not (math.isfinite(self.c1) and math.isfinite(self.c2)):
            raise ValueError("phase-space coordinates must be finite")
        if self.kind == SPHERE:
            if not 0.0 <= self.c1 <= math.pi:
                raise ValueError(f"theta={self.c1} outside [0, pi]")
            if not 0.0 <= self.c2 < 2.0 * math.pi:
                raise ValueError(f"phi={self.c2} outside [0, 2 pi)")

    @staticmethod
    def plane(re: float, im: float) -> "PhasePoint":
        return PhasePoint(PLANE, float(re), float(im))

    @staticmethod
    def from_complex(z: complex) -> "PhasePoint":
        return PhasePoint(PLANE, float(z.real), float(z.imag))

    @staticmethod
    def sphere(theta: float, phi: float) -> "PhasePoint":
        theta = min(max(float(theta), 0.0), math.pi)
        phi = float(phi) % (2.0 * math.pi)
        return PhasePoint(SPHERE, theta, phi)

    @staticmethod
    def from_unit_vector(n) -> "PhasePoint":
        nx, ny, nz = float(n[0]), float(n[1]), float(n[2])
        theta = math.acos(min(max(nz, -1.0), 1.0))
        return PhasePoint.sphere(theta, math.atan2(ny, nx))

    @property
    def z(self) -> complex:
        if self.kind != PLANE:
            raise ValueError("z is only defined for plane points")
        return complex(self.c1, self.c2)

    @property
    def theta(self) -> float:
        if self.kind != SPHERE:
            raise ValueError("theta is only defined for sphere points")
        return self.c1

    @property
    def phi(self) -> float:
        if self.kind != SPHERE:
            raise ValueError("phi is only defined for sphere points")
        return self.c2

    def unit_vector(self) -> np.ndarray:
        if self.kind != SPHERE:
            raise ValueError("unit_vector is only defined for sphere points")
        st = math.sin(self.c1)
        return np.array([st * math.cos(self.c2), st * math.sin(self.c2), math.cos(self.c1)])


@dataclass(frozen=True)
class ManifoldSpec:
    """Which manifold, plus its single shape parameter.

    ``half_width`` (R > 0) truncates the plane to [-R, R]^2; ``spin`` (J) is a
    positive half-integer and fixes both the sphere measure normalization
    (2J+1)/(4 pi) and the overlap kernel exponent 2J.
    """

    kind: str
    half_width: float | None = None
    spin: float | None = None

    def __post_init__(self):
        if self.kind == PLANE:
            if self.half_width is None or not math.isfinite(self.half_width) or self.half_width <= 0:
                raise ValueError("plane manifold requires half_width R > 0")
            if self.spin is not None:
                raise ValueError("plane manifold takes no spin parameter")
        elif self.kind == SPHERE:
            if self.spin is None or self.spin <= 0:
                raise ValueError("sphere manifold requires spin J > 0")
            if abs(2.0 * self.spin - round(2.0 * self.spin)) > 1e-9:
                raise ValueError(f"J={self.spin} is not a half-integer")
            if self.half_width is not None:
                raise ValueError("sphere manifold takes no half_width")
        else:
            raise ValueError(f"unknown manifold kind {self.kind!r}")

    @staticmethod
    def plane(half_width: float) -> "ManifoldSpec":
        return ManifoldSpec(PLANE, half_width=float(half_width))

    @staticmethod
    def sphere(spin: float) -> "ManifoldSpec":
        return ManifoldSpec(SPHERE, spin=float(spin))

    @property
    def two_j(self) -> int:
        if self.kind != SPHERE:
            raise ValueError("two_j is only defined for the sphere")
        return int(round(2.0 * self.spin))


@dataclass(frozen=True)
class Grid:
    """A cell-center discretization of a manifold with measure weights.

    Cells tile the (truncated) manifold without overlap; ``weight[i]`` is the
    invariant measure of cell ``i`` evaluated at its center. Cell order is
    row-major: index = i1 * n2 + i2 over (coord1, coord2).
    """

    spec: ManifoldSpec
    resolution: tuple[int, int]
    coord1: np.ndarray
    coord2: np.ndarray
    weight: np.ndarray
    d1: float
    d2: float
    nx: np.ndarray | None = field(default=None, repr=False)
    ny: np.ndarray | None = field(default=None, repr=False)
    nz: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        for arr in (self.coord1, self.coord2, self.weight, self.nx, self.ny, self.nz):
            if arr is not None:
                arr.setflags(write=False)

    @property
    def n_cells(self) -> int:
        return self.coord1.shape[0]

    def point(self, idx: int) -> PhasePoint:
        if self.spec.kind == PLANE:
            return PhasePoint.plane(self.coord1[idx], self.coord2[idx])
        return PhasePoint.sphere(self.coord1[idx], self.coord2[idx])

    def compatible(self, other: "Grid") -> bool:
        return self.spec == other.spec and self.resolution == other.resolution

    def metric_density(self) -> np.ndarray:
        """Invariant-measure density in the chart coordinates, per cell.

        This is weight / (coordinate cell area): 1/pi on the plane,
        (2J+1) sin(theta) / (4 pi) on the sphere.
        """
        return self.weight / (self.d1 * self.d2)

    def to_csv(self, path) -> None:
        from ._io import write_grid_csv

        write_grid_csv(self, path)


def build_plane_grid(half_width: float, n: int) -> Grid:
    """n x n cell-centered grid on [-R, R]^2 with uniform weight dx dy / pi."""
    if not (isinstance(n, (int, np.integer)) and n >= 8):
        raise ValueError(f"plane grid needs n >= 8, got {n}")
    spec = ManifoldSpec.plane(half_width)
    r = spec.half_width
    d = 2.0 * r / n
    centers = -r + (np.arange(n) + 0.5) * d
    c1 = np.repeat(centers, n)
    c2 = np.tile(centers, n)
    w = np.full(n * n, d * d / math.pi)
    return Grid(spec, (n, n), c1, c2, w, d, d)


def build_sphere_grid(n_theta: int, n_phi: int, spin: float) -> Grid:
    """Cell-centered (theta, phi) grid with weights (2J+1)/(4 pi) sin(theta) dtheta dphi."""
    if not (isinstance(n_theta, (int, np.integer)) and n_theta >= 8):
        raise ValueError(f"sphere grid needs n_theta >= 8, got {n_theta}")
    if not (isinstance(n_phi, (int, np.integer)) and n_phi >= 8):
        raise ValueError(f"sphere grid needs n_phi >= 8, got {n_phi}")
    spec = ManifoldSpec.sphere(spin)
    if spec.spin < 0.5 - 1e-12:
        raise ValueError("sphere grid requires J >= 1/2")
    d_theta = math.pi / n_theta
    d_phi = 2.0 * math.pi / n_phi
    thetas = (np.arange(n_theta) + 0.5) * d_theta
    phis = np.arange(n_phi) * d_phi
    c1 = np.repeat(thetas, n_phi)
    c2 = np.tile(phis, n_theta)
    norm = (2.0 * spec.spin + 1.0) / (4.0 * math.pi)
    w = norm * np.sin(c1) * d_theta * d_phi
    st = np.sin(c1)
    return Grid(
        spec, (n_theta, n_phi), c1, c2, w, d_theta, d_phi,
        nx=st * np.cos(c2), ny=st * np.sin(c2), nz=np.cos(c1),
    )


def _check_same_manifold(spec: ManifoldSpec, *points: PhasePoint) -> None:
    for p in points:
        if p.kind != spec.kind:
            raise ValueError(f"point on {p.kind!r} manifold passed to {spec.kind!r} operation")


def overlap2(spec: ManifoldSpec, a: PhasePoint, b: PhasePoint) -> float:
    """Squared coherent-state overlap |<a|b>|^2; symmetric, in [0, 1].

    Plane: exp(-|a-b|^2). Sphere: ((1 + n_a . n_b)/2)^(2J).
    """
    _check_same_manifold(spec, a, b)
    if spec.kind == PLANE:
        dz = a.z - b.z
        return math.exp(-(dz.real * dz.real + dz.imag * dz.imag))
    dot = float(np.dot(a.unit_vector(), b.unit_vector()))
    base = 0.5 * (1.0 + min(max(dot, -1.0), 1.0))
    return base ** spec.two_j


def overlap_amplitude(spec: ManifoldSpec, a: PhasePoint, b: PhasePoint) -> complex:
    """Complex overlap <a|b> in the package's coherent-state phase convention.

    Plane: exp(-|a|^2/2 - |b|^2/2 + conj(a) b). Sphere:
    (sin(ta/2) sin(tb/2) + cos(ta/2) cos(tb/2) e^{i (phi_a - phi_b)})^(2J),
    consistent with the spin coherent kets built from the lowest-weight state.
    """
    _check_same_manifold(spec, a, b)
    if spec.kind == PLANE:
        za, zb = a.z, b.z
        return complex(np.exp(-0.5 * abs(za) ** 2 - 0.5 * abs(zb) ** 2 + np.conj(za) * zb))
    sa, ca = math.sin(a.theta / 2.0), math.cos(a.theta / 2.0)
    sb, cb = math.sin(b.theta / 2.0), math.cos(b.theta / 2.0)
    core = sa * sb + ca * cb * np.exp(1j * (a.phi - b.phi))
    return complex(core ** spec.two_j)


def overlap2_grid(grid: Grid, center: PhasePoint) -> np.ndarray:
    """|<cell|center>|^2 for every cell; the per-cell kernel behind h^gamma."""
    _check_same_manifold(grid.spec, center)
    if grid.spec.kind == PLANE:
        return _kernels.plane_husimi(grid.coord1, grid.coord2, center.c1, center.c2)
    b = center.unit_vector()
    return _kernels.sphere_husimi(grid.nx, grid.ny, grid.nz, b[0], b[1], b[2], grid.spec.two_j)


def integrate(grid: Grid, values) -> float:
    """Measure-weighted quadrature: sum_i weight_i * values_i."""
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.n_cells,):
        raise ValueError(
            f"values length {values.shape} does not match grid with {grid.n_cells} cells"
        )
    return float(np.sum(grid.weight * values))


def total_measure(spec: ManifoldSpec) -> float:
    """Exact measure of the (truncated) manifold: (2R)^2/pi or 2J+1."""
    if spec.kind == PLANE:
        return (2.0 * spec.half_width) ** 2 / math.pi
    return 2.0 * spec.spin + 1.0


def support_radius(spec: ManifoldSpec, epsilon: float) -> float:
    """Radius of the level set |<.|center>|^2 = epsilon around any center.

    Euclidean on the plane (sqrt(ln 1/eps)), geodesic angle on the sphere
    (arccos(2 eps^(1/2J) - 1)).
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    if spec.kind == PLANE:
        return math.sqrt(math.log(1.0 / epsilon))
    c = 2.0 * epsilon ** (1.0 / spec.two_j) - 1.0
    return math.acos(min(max(c, -1.0), 1.0))


def distance(spec: ManifoldSpec, a: PhasePoint, b: PhasePoint) -> float:
    """Euclidean distance on the plane, geodesic angle on the sphere."""
    _check_same_manifold(spec, a, b)
    if spec.kind == PLANE:
        return abs(a.z - b.z)
    dot = float(np.dot(a.unit_vector(), b.unit_vector()))
    return math.acos(min(max(dot, -1.0), 1.0))
