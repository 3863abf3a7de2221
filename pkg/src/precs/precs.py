"""Coherent-state densities, branch supports, disjointness, decoherence.

The normalized coherent-state density chi^2_t(Omega) = sum_g |c_g|^2 h^g_t is
what the measuring apparatus "shows"; a branch's epsilon-support is the region
where its Husimi bump exceeds epsilon. Pairwise disjointness of the supports
is the informative-apparatus criterion; the times where it holds form the
decoherence intervals.

Support membership is decided at grid cell centers. The interval scan
additionally requires the grid-independent condition that each branch's bump,
evaluated analytically at every other branch's trajectory point, is at most
epsilon; this is what makes the sqrt(epsilon) bound on the exact decoherence
factor provable rather than grid-dependent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import _kernels
from .errors import DegenerateConfigurationError, DegeneratePointError
from .dynamics import (
    ModelSpec,
    QubitBoson,
    _check_grid_matches,
    classical_trajectory,
    phase_at,
    validate_branches,
)
from .manifold import (
    SPHERE,
    Grid,
    PhasePoint,
    distance,
    integrate,
    overlap2_grid,
    overlap_amplitude,
    support_radius,
)

KIND_H_BRANCH = "h_branch"
KIND_CHI2 = "chi2"

DEFAULT_EPSILON = 1e-3

CHI_FLOOR = 1e-12


@dataclass(frozen=True)
class DistributionGrid:
    """Per-cell values of a branch Husimi function or of chi^2, plus metadata."""

    grid: Grid
    values: np.ndarray
    time: float
    model: ModelSpec
    kind: str
    branches: tuple | None = None
    gamma: str | None = None

    def __post_init__(self):
        if self.kind not in (KIND_H_BRANCH, KIND_CHI2):
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        if self.values.shape != (self.grid.n_cells,):
            raise ValueError("values length does not match grid cell count")
        if np.any(self.values < 0):
            raise ValueError("distribution values must be non-negative")
        self.values.setflags(write=False)

    def integral(self) -> float:
        return integrate(self.grid, self.values)

    def to_csv(self, path) -> None:
        from ._io import write_distribution_csv

        write_distribution_csv(self, path)


@dataclass(frozen=True)
class SupportSet:
    """Cells where one branch's Husimi value exceeds epsilon, at one time."""

    gamma: str
    epsilon: float
    indices: np.ndarray
    time: float
    grid: Grid

    def __post_init__(self):
        self.indices.setflags(write=False)

    @property
    def size(self) -> int:
        return self.indices.shape[0]

    def mask(self) -> np.ndarray:
        m = np.zeros(self.grid.n_cells, dtype=bool)
        m[self.indices] = True
        return m

    def to_csv(self, path) -> None:
        from ._io import write_support_csv

        write_support_csv(self, path)


@dataclass(frozen=True)
class ConditionalState:
    """Normalized system state conditioned on the apparatus being at a point."""

    labels: tuple[str, ...]
    amplitudes: np.ndarray
    point: PhasePoint
    time: float

    def weight(self, gamma: str) -> float:
        return float(abs(self.amplitudes[self.labels.index(gamma)]) ** 2)


def branch_husimi_values(model: ModelSpec, branches, t: float, grid: Grid) -> list[np.ndarray]:
    _check_grid_matches(model, grid)
    return [
        overlap2_grid(grid, classical_trajectory(model, b.gamma, t)) for b in branches
    ]


def chi_squared(model: ModelSpec, branches, t: float, grid: Grid) -> DistributionGrid:
    """chi^2_t(Omega) = sum_gamma |c_gamma|^2 h^gamma_t(Omega), per cell."""
    validate_branches(branches)
    hs = branch_husimi_values(model, branches, t, grid)
    values = np.zeros(grid.n_cells)
    for b, h in zip(branches, hs):
        values += abs(b.c) ** 2 * h
    return DistributionGrid(
        grid=grid, values=values, time=float(t), model=model,
        branches=tuple(branches), kind=KIND_CHI2,
    )


def conditional_state(model: ModelSpec, branches, t: float, point: PhasePoint) -> ConditionalState:
    """System state |phi_t(Omega)>: amplitudes c_g e^{i phi^g_t} <Omega|Xi^g_t>, normalized.

    Raises ``DegeneratePointError`` where chi_t(Omega) <= 1e-12, i.e. far from
    every branch trajectory.
    """
    validate_branches(branches)
    spec = _manifold_spec_for(model, point)
    amps = np.array(
        [
            b.c
            * np.exp(1j * phase_at(model, b.gamma, t))
            * overlap_amplitude(spec, point, classical_trajectory(model, b.gamma, t))
            for b in branches
        ],
        dtype=complex,
    )
    chi = math.sqrt(float(np.sum(np.abs(amps) ** 2)))
    if chi <= CHI_FLOOR:
        raise DegeneratePointError(
            f"chi({point}) = {chi:.3e} <= {CHI_FLOOR}; conditional state undefined"
        )
    return ConditionalState(
        labels=tuple(b.gamma for b in branches),
        amplitudes=amps / chi,
        point=point,
        time=float(t),
    )


def _manifold_spec_for(model: ModelSpec, point: PhasePoint):
    from .dynamics import manifold_of

    if isinstance(model, QubitBoson):
        # overlap kernels never consult the truncation radius
        return manifold_of(model, plane_half_width=max(1.0, abs(point.z) + 1.0))
    return manifold_of(model)


def support(distribution: DistributionGrid, epsilon: float) -> SupportSet:
    """Cells with h^gamma > epsilon; only defined for branch Husimi grids."""
    if distribution.kind != KIND_H_BRANCH:
        raise ValueError("support is defined on h_branch distributions, not chi2")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    idx = np.flatnonzero(distribution.values > epsilon)
    return SupportSet(
        gamma=distribution.gamma,
        epsilon=float(epsilon),
        indices=idx,
        time=distribution.time,
        grid=distribution.grid,
    )


def disjoint(s1: SupportSet, s2: SupportSet) -> tuple[bool, int]:
    """Cell-level disjointness of two supports, plus the intersection size."""
    if not s1.grid.compatible(s2.grid):
        raise ValueError("supports live on different grids")
    if s1.epsilon != s2.epsilon:
        raise ValueError(f"supports use different epsilon: {s1.epsilon} vs {s2.epsilon}")
    if s1.time != s2.time:
        raise ValueError(f"supports taken at different times: {s1.time} vs {s2.time}")
    overlap = np.intersect1d(s1.indices, s2.indices, assume_unique=True)
    return overlap.shape[0] == 0, int(overlap.shape[0])


def branch_supports(model: ModelSpec, branches, t: float, grid: Grid, epsilon: float) -> list[SupportSet]:
    hs = branch_husimi_values(model, branches, t, grid)
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    return [
        SupportSet(b.gamma, float(epsilon), np.flatnonzero(h > epsilon), float(t), grid)
        for b, h in zip(branches, hs)
    ]


def _cross_husimi_ok(model: ModelSpec, branches, t: float, epsilon: float) -> bool:
    """Grid-independent part of the disjointness test.

    h^g_t evaluated at Xi^g'_t equals |<Xi^g'_t|Xi^g_t>|^2, so requiring it
    to stay <= epsilon for all pairs bounds the exact decoherence factor by
    sqrt(epsilon).
    """
    from .manifold import overlap2

    points = {b.gamma: classical_trajectory(model, b.gamma, t) for b in branches}
    spec = _manifold_spec_for(model, next(iter(points.values())))
    for ba, bb in combinations(branches, 2):
        if overlap2(spec, points[ba.gamma], points[bb.gamma]) > epsilon:
            return False
    return True


def pairwise_disjoint_at(model: ModelSpec, branches, t: float, grid: Grid, epsilon: float) -> bool:
    """Full disjointness test: cell supports pairwise empty AND cross-Husimi <= eps."""
    if not _cross_husimi_ok(model, branches, t, epsilon):
        return False
    masks = [h > epsilon for h in branch_husimi_values(model, branches, t, grid)]
    for ma, mb in combinations(masks, 2):
        if np.any(ma & mb):
            return False
    return True


def decoherence_intervals(
    model: ModelSpec, branches, t_grid, grid: Grid, epsilon: float
) -> list[tuple[float, float]]:
    """Maximal sub-intervals of the time grid with all supports pairwise disjoint.

    The time grid must cover at least one model period. Returns [] when the
    supports are never disjoint; the first interval's start is the
    decoherence time tau_d.
    """
    from .dynamics import default_horizon

    validate_branches(branches)
    ts = np.asarray(t_grid, dtype=float)
    if ts.ndim != 1 or ts.shape[0] < 2 or np.any(np.diff(ts) <= 0):
        raise ValueError("time grid must be strictly increasing with >= 2 samples")
    if ts[-1] - ts[0] < default_horizon(model) * (1.0 - 1e-9):
        raise ValueError("time grid must cover at least one model period")
    flags = np.array(
        [pairwise_disjoint_at(model, branches, float(t), grid, epsilon) for t in ts]
    )
    intervals: list[tuple[float, float]] = []
    start = None
    for t, ok in zip(ts, flags):
        if ok and start is None:
            start = t
        elif not ok and start is not None:
            intervals.append((float(start), float(prev)))
            start = None
        prev = t
    if start is not None:
        intervals.append((float(start), float(ts[-1])))
    return intervals


def interval_report(intervals: list[tuple[float, float]], epsilon: float, t_end: float) -> dict:
    """JSON-ready summary; recoherence means disjointness was gained then lost."""
    tau_d = intervals[0][0] if intervals else None
    recoherence = any(t1 < t_end for _, t1 in intervals)
    return {
        "epsilon": epsilon,
        "intervals": [[t0, t1] for t0, t1 in intervals],
        "tau_d": tau_d,
        "recoherence": recoherence,
    }


def branch_separation(model: ModelSpec, branches, t: float) -> float:
    """Minimum pairwise distance between branch trajectory points at time t."""
    points = [classical_trajectory(model, b.gamma, t) for b in branches]
    spec = _manifold_spec_for(model, points[0])
    return min(distance(spec, a, b) for a, b in combinations(points, 2))


def resolution_ratio(model: ModelSpec, branches, t: float, epsilon: float) -> float:
    """(largest epsilon-support diameter) / (smallest branch separation) at time t.

    Both factors are analytic: the supports of the overlap kernel are disks
    (plane) or geodesic caps (sphere) of known radius. The ratio tends to zero
    in the classical limit g -> inf or J -> inf.
    """
    validate_branches(branches)
    if len(branches) < 2:
        raise ValueError("resolution ratio needs at least two branches")
    sep = branch_separation(model, branches, t)
    if sep <= 1e-12:
        raise DegenerateConfigurationError(
            f"branch separation {sep:.3e} at t={t}; resolution ratio undefined"
        )
    points = [classical_trajectory(model, b.gamma, t) for b in branches]
    spec = _manifold_spec_for(model, points[0])
    diameter = 2.0 * support_radius(spec, epsilon)
    return diameter / sep


def count_modes(distribution: DistributionGrid, epsilon: float) -> int:
    """Connected components of {value > epsilon} on the distribution's grid.

    4-neighbor adjacency; on the sphere the phi direction wraps around.
    """
    n1, n2 = distribution.grid.resolution
    mask = (distribution.values > epsilon).reshape(n1, n2).astype(np.uint8)
    wrap = distribution.grid.spec.kind == SPHERE
    return int(_kernels.count_components(mask, wrap))
