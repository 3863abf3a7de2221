"""Branch Hamiltonians, classical trajectories, phases, and Husimi bumps.

Two models are implemented. ``QubitBoson`` couples the measured qubit to a
harmonic mode, nu b'b + g sigma_z (b + b'); its branch trajectories live on
the complex plane and solve i z' = nu z + omega g in closed form. ``QubitSpinJ``
couples it to a large spin, h J_z + mu sigma_z J_x; its branch trajectories
precess on the unit sphere, n' = B x n with B = (omega mu, 0, h), starting
from the south pole (the lowest-weight reference state).

Orientation conventions are not free parameters here: they are anchored so
that the plane trajectory equals the exact <b>(t) and the sphere trajectory
equals <J>(t)/J, which the oracle test suite enforces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .manifold import (
    PLANE,
    SPHERE,
    Grid,
    ManifoldSpec,
    PhasePoint,
    overlap2_grid,
)

LABELS = ("+", "-")

BRANCH_NORM_TOL = 1e-12


@dataclass(frozen=True)
class QubitBoson:
    """Oscillator apparatus: frequency nu > 0, coupling g >= 0."""

    nu: float
    g: float

    def __post_init__(self):
        if not (math.isfinite(self.nu) and self.nu > 0):
            raise ValueError("QubitBoson requires nu > 0 (nu = 0 makes the trajectory singular)")
        if not (math.isfinite(self.g) and self.g >= 0):
            raise ValueError("QubitBoson requires g >= 0")


@dataclass(frozen=True)
class QubitSpinJ:
    """Spin-J apparatus: field h, coupling mu >= 0, half-integer J > 0."""

    h: float
    mu: float
    spin: float

    def __post_init__(self):
        if not (math.isfinite(self.h) and math.isfinite(self.mu)):
            raise ValueError("QubitSpinJ requires finite h, mu")
        if self.mu < 0:
            raise ValueError("QubitSpinJ requires mu >= 0")
        if self.h == 0 and self.mu == 0:
            raise ValueError("QubitSpinJ requires h and mu not both zero")
        if self.spin <= 0 or abs(2 * self.spin - round(2 * self.spin)) > 1e-9:
            raise ValueError(f"J={self.spin} must be a positive half-integer")

    @property
    def field_norm(self) -> float:
        return math.hypot(self.h, self.mu)


ModelSpec = QubitBoson | QubitSpinJ


@dataclass(frozen=True)
class BranchSpec:
    """One branch of the entangled state: label, observable eigenvalue, amplitude."""

    gamma: str
    omega: float
    c: complex

    def __post_init__(self):
        if self.omega not in (1.0, -1.0):
            raise ValueError(f"branch eigenvalue must be +1 or -1, got {self.omega}")


def make_branch_pair(c_plus: complex, c_minus: complex) -> tuple[BranchSpec, BranchSpec]:
    branches = (BranchSpec("+", +1.0, complex(c_plus)), BranchSpec("-", -1.0, complex(c_minus)))
    validate_branches(branches)
    return branches


def validate_branches(branches) -> None:
    labels = [b.gamma for b in branches]
    if len(set(labels)) != len(labels):
        raise ValueError(f"branch labels must be unique, got {labels}")
    total = sum(abs(b.c) ** 2 for b in branches)
    if abs(total - 1.0) > BRANCH_NORM_TOL:
        raise ValueError(f"branch amplitudes must satisfy sum |c|^2 = 1, got {total}")


def branch_omega(gamma: str) -> float:
    if gamma == "+":
        return 1.0
    if gamma == "-":
        return -1.0
    raise ValueError(f"unknown branch label {gamma!r}")


def manifold_of(model: ModelSpec, plane_half_width: float | None = None) -> ManifoldSpec:
    """The manifold a model's apparatus lives on.

    For the boson model the plane is truncated at R = 2g/nu + 4 unless
    overridden: the trajectory never exceeds |z| = 2g/nu and a coherent bump
    carries < 1e-6 of its mass beyond distance 4 from its center.
    """
    if isinstance(model, QubitBoson):
        r = plane_half_width if plane_half_width is not None else 2.0 * model.g / model.nu + 4.0
        return ManifoldSpec.plane(r)
    return ManifoldSpec.sphere(model.spin)


def default_horizon(model: ModelSpec) -> float:
    """One recurrence (boson) or precession (spin) period."""
    if isinstance(model, QubitBoson):
        return 2.0 * math.pi / model.nu
    return 2.0 * math.pi / model.field_norm


def ground_energy(model: ModelSpec) -> float:
    """Classical energy of the reference state: 0 (normal-ordered vacuum) or -h J."""
    if isinstance(model, QubitBoson):
        return 0.0
    return -model.h * model.spin


def _precession_field(model: QubitSpinJ, omega: float) -> np.ndarray:
    return np.array([omega * model.mu, 0.0, model.h])


def trajectory_coords(model: ModelSpec, gamma: str, ts: np.ndarray):
    """Closed-form branch trajectory at the given times.

    Returns complex z(t) for the plane, (n, 3) unit vectors for the sphere.
    """
    omega = branch_omega(gamma)
    ts = np.asarray(ts, dtype=float)
    if np.any(ts < 0):
        raise ValueError("trajectory times must be non-negative")
    if isinstance(model, QubitBoson):
        return -(omega * model.g / model.nu) * (1.0 - np.exp(-1j * model.nu * ts))
    b = _precession_field(model, omega)
    bn = np.linalg.norm(b)
    k = b / bn
    n0 = np.array([0.0, 0.0, -1.0])
    ang = bn * ts
    cos_a = np.cos(ang)[..., None]
    sin_a = np.sin(ang)[..., None]
    # Rodrigues in the n0 + sin K + (1-cos) K^2 grouping: exact (no rounding
    # drift) when n0 sits on the rotation axis
    kxn = np.cross(k, n0)
    kxkxn = np.cross(k, kxn)
    return n0 + kxn * sin_a + kxkxn * (1.0 - cos_a)


def classical_trajectory(model: ModelSpec, gamma: str, t: float) -> PhasePoint:
    """Branch trajectory point Xi^gamma_t; starts at the origin / south pole."""
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    coords = trajectory_coords(model, gamma, np.array([t]))
    if isinstance(model, QubitBoson):
        return PhasePoint.from_complex(coords[0])
    return PhasePoint.from_unit_vector(coords[0])


@dataclass(frozen=True)
class Trajectory:
    """Ordered samples (t, point, phase) for one branch."""

    model: ModelSpec
    gamma: str
    t: np.ndarray
    coords: np.ndarray
    phase: np.ndarray

    def __post_init__(self):
        for arr in (self.t, self.coords, self.phase):
            arr.setflags(write=False)

    @property
    def n_samples(self) -> int:
        return self.t.shape[0]

    def point(self, idx: int) -> PhasePoint:
        if isinstance(self.model, QubitBoson):
            return PhasePoint.from_complex(self.coords[idx])
        return PhasePoint.from_unit_vector(self.coords[idx])

    def coordinate_columns(self) -> tuple[np.ndarray, np.ndarray]:
        if isinstance(self.model, QubitBoson):
            return self.coords.real, self.coords.imag
        theta = np.arccos(np.clip(self.coords[:, 2], -1.0, 1.0))
        phi = np.mod(np.arctan2(self.coords[:, 1], self.coords[:, 0]), 2.0 * math.pi)
        return theta, phi

    def to_csv(self, path) -> None:
        from ._io import write_trajectory_csv

        write_trajectory_csv(self, path)


def _validate_time_grid(ts: np.ndarray) -> np.ndarray:
    ts = np.asarray(ts, dtype=float)
    if ts.ndim != 1 or ts.shape[0] < 1:
        raise ValueError("time grid must be a non-empty 1D array")
    if abs(ts[0]) > 1e-15:
        raise ValueError(f"time grid must start at 0, got {ts[0]}")
    if ts.shape[0] > 1 and np.any(np.diff(ts) <= 0):
        raise ValueError("time grid must be strictly increasing")
    return ts


def _phase_integrand(model: ModelSpec, omega: float, coords: np.ndarray) -> np.ndarray:
    """<Xi_t| (i d/dt - H^gamma) |Xi_t> along a sampled path.

    The time-derivative term is evaluated through the equations of motion, so
    the same expression serves closed-form and RK4 paths. On the sphere the
    geometric term J (n_x n_y' - n_y n_x') / (1 - n_z) follows from the
    lowest-weight coherent-state convention; it is regular everywhere except
    the exact north pole, where the trajectory measure vanishes.
    """
    if isinstance(model, QubitBoson):
        zdot = -1j * (model.nu * coords + omega * model.g)
        deriv_term = -np.imag(zdot * np.conj(coords))
        h_cl = model.nu * np.abs(coords) ** 2 + omega * model.g * 2.0 * coords.real
        return deriv_term - h_cl
    b = _precession_field(model, omega)
    ndot = np.cross(np.broadcast_to(b, coords.shape), coords)
    denom = np.maximum(1.0 - coords[:, 2], 1e-12)
    geometric = model.spin * (coords[:, 0] * ndot[:, 1] - coords[:, 1] * ndot[:, 0]) / denom
    h_cl = model.spin * (model.h * coords[:, 2] + omega * model.mu * coords[:, 0])
    return geometric - h_cl


def _cumulative_trapezoid(values: np.ndarray, ts: np.ndarray) -> np.ndarray:
    if ts.shape[0] == 1:
        return np.zeros(1)
    steps = 0.5 * (values[1:] + values[:-1]) * np.diff(ts)
    return np.concatenate([[0.0], np.cumsum(steps)])


def branch_phase(model: ModelSpec, gamma: str, t_grid) -> np.ndarray:
    """Accumulated branch phase phi^gamma_t on the given time grid.

    Cumulative trapezoid of the phase integrand along the closed-form
    trajectory; phi(0) = 0. Only phase differences against the exact
    propagator are physically meaningful.
    """
    ts = _validate_time_grid(t_grid)
    coords = trajectory_coords(model, gamma, ts)
    return _cumulative_trapezoid(_phase_integrand(model, branch_omega(gamma), coords), ts)


def integrate_eom(model: ModelSpec, gamma: str, t_grid) -> Trajectory:
    """Fixed-step RK4 integration of the classical equations of motion.

    One RK4 step per grid interval; sphere states are renormalized every step
    so |n| stays within 1e-9 of 1. Phases accumulate by the same trapezoid
    rule as ``branch_phase``, evaluated on the integrated path.
    """
    ts = _validate_time_grid(t_grid)
    omega = branch_omega(gamma)
    if isinstance(model, QubitBoson):
        coords = _kernels.rk4_plane(model.nu, omega * model.g, ts)
    else:
        b = _precession_field(model, omega)
        coords = _kernels.rk4_sphere(b[0], b[1], b[2], ts)
    phase = _cumulative_trapezoid(_phase_integrand(model, omega, coords), ts)
    return Trajectory(model, gamma, ts, coords, phase)


@lru_cache(maxsize=256)
def _phase_at_cached(model: ModelSpec, gamma: str, t: float) -> float:
    if t == 0.0:
        return 0.0
    n_steps = max(64, int(math.ceil(t / (1e-3 * default_horizon(model)))))
    ts = np.linspace(0.0, t, n_steps + 1)
    return float(branch_phase(model, gamma, ts)[-1])


def phase_at(model: ModelSpec, gamma: str, t: float) -> float:
    """phi^gamma_t on a dense default grid (cached per (model, branch, t))."""
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    return _phase_at_cached(model, gamma, float(t))


def classical_energy(model: ModelSpec, gamma: str, point: PhasePoint) -> float:
    """Classical branch energy H^gamma(Omega) = <Omega|H^gamma|Omega>."""
    omega = branch_omega(gamma)
    if isinstance(model, QubitBoson):
        if point.kind != PLANE:
            raise ValueError("boson model expects a plane point")
        z = point.z
        return model.nu * abs(z) ** 2 + omega * model.g * 2.0 * z.real
    if point.kind != SPHERE:
        raise ValueError("spin model expects a sphere point")
    n = point.unit_vector()
    return model.spin * (model.h * n[2] + omega * model.mu * n[0])


def pointer_symbol(model: ModelSpec, point: PhasePoint) -> float:
    """Classical symbol of the pointer observable: 2 Re z or J n_x."""
    if isinstance(model, QubitBoson):
        if point.kind != PLANE:
            raise ValueError("boson model expects a plane point")
        return 2.0 * point.z.real
    if point.kind != SPHERE:
        raise ValueError("spin model expects a sphere point")
    return model.spin * float(point.unit_vector()[0])


def apparatus_energy_symbol(model: ModelSpec, point: PhasePoint) -> float:
    """Classical symbol of the free apparatus Hamiltonian: nu |z|^2 or h J n_z."""
    if isinstance(model, QubitBoson):
        if point.kind != PLANE:
            raise ValueError("boson model expects a plane point")
        return model.nu * abs(point.z) ** 2
    if point.kind != SPHERE:
        raise ValueError("spin model expects a sphere point")
    return model.h * model.spin * float(point.unit_vector()[2])


def pointer_symbol_grid(model: ModelSpec, grid: Grid) -> np.ndarray:
    if isinstance(model, QubitBoson):
        return 2.0 * grid.coord1
    return model.spin * grid.nx


def apparatus_energy_symbol_grid(model: ModelSpec, grid: Grid) -> np.ndarray:
    if isinstance(model, QubitBoson):
        return model.nu * (grid.coord1 ** 2 + grid.coord2 ** 2)
    return model.h * model.spin * grid.nz


def _check_grid_matches(model: ModelSpec, grid: Grid) -> None:
    want = PLANE if isinstance(model, QubitBoson) else SPHERE
    if grid.spec.kind != want:
        raise ValueError(f"model lives on {want!r} but grid is on {grid.spec.kind!r}")
    if isinstance(model, QubitSpinJ) and abs(grid.spec.spin - model.spin) > 1e-12:
        raise ValueError(
            f"grid built for J={grid.spec.spin} but model has J={model.spin}"
        )


def husimi_branch(model: ModelSpec, gamma: str, t: float, grid: Grid):
    """Branch Husimi function h^gamma_t(Omega) = |<Omega|Xi^gamma_t>|^2 per cell."""
    from .precs import DistributionGrid, KIND_H_BRANCH

    _check_grid_matches(model, grid)
    center = classical_trajectory(model, gamma, t)
    values = overlap2_grid(grid, center)
    return DistributionGrid(
        grid=grid, values=values, time=float(t), model=model,
        branches=None, kind=KIND_H_BRANCH, gamma=gamma,
    )
