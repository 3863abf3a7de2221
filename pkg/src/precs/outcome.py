"""Branch masses, outcome selection, state reduction, Born statistics.

The symmetry-breaking step that singles out one measurement result is modeled
as a seeded draw over the branch masses: every microscopic configuration
compatible with a branch is equally likely, so the selection probability is
proportional to the distribution mass the branch carries. The masses come
from partitioning the normalized chi^2 cell masses:

* cells inside exactly one epsilon-support count toward that branch,
* cells inside several supports, or in none while chi^2 > epsilon, are
  "contested" (attributed to the branch maximizing |c|^2 h for reporting),
* remaining tail cells (chi^2 <= epsilon, no support) go to the nearest
  branch by the same argmax rule.

The partition is exhaustive, so sum(masses) + contested = 1 up to rounding.
A measurement refuses to run while the contested fraction exceeds 5%, which
operationalizes "wait until after the decoherence time".

Randomness uses numpy's counter-based Philox generator keyed by the user's
64-bit seed; run i advances the counter by i * 2^32 positions, so replays are
bit-identical and runs can execute in any order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import NotDecoheredError
from .dynamics import (
    ModelSpec,
    classical_trajectory,
    pointer_symbol,
    validate_branches,
)
from .manifold import Grid
from .precs import (
    KIND_CHI2,
    DistributionGrid,
    SupportSet,
    branch_husimi_values,
    branch_supports,
    chi_squared,
    conditional_state,
)

CONTESTED_LIMIT = 0.05

RNG_ALGORITHM = "philox4x64 keyed by seed; run i advances the counter by i * 2**32"


@dataclass(frozen=True)
class BranchMass:
    gamma: str
    mass: float
    contested_mass: float


@dataclass(frozen=True)
class MeasurementRecord:
    gamma_out: str
    pointer_value: float
    masses: tuple[BranchMass, ...]
    t: float
    seed: int
    run_index: int
    reduced_state: str

    def to_json_dict(self) -> dict:
        return {
            "gamma_out": self.gamma_out,
            "pointer_value": self.pointer_value,
            "masses": [
                {"gamma": m.gamma, "mass": m.mass, "contested_mass": m.contested_mass}
                for m in self.masses
            ],
            "T": self.t,
            "seed": self.seed,
            "run_index": self.run_index,
            "reduced_state": self.reduced_state,
        }


def branch_mass(chi2: DistributionGrid, supports: list[SupportSet]) -> list[BranchMass]:
    """Partition the normalized chi^2 cell masses among branches.

    The chi^2 grid and every support must share the same grid, time, and
    epsilon. Returns one BranchMass per support, in support order.
    """
    if chi2.kind != KIND_CHI2:
        raise ValueError("branch_mass expects a chi2 distribution")
    if not supports:
        raise ValueError("branch_mass needs at least one support")
    eps = supports[0].epsilon
    for sup in supports:
        if not sup.grid.compatible(chi2.grid):
            raise ValueError("support grid does not match the chi2 grid")
        if abs(sup.time - chi2.time) > 1e-12:
            raise ValueError(f"support at t={sup.time} but chi2 at t={chi2.time}")
        if sup.epsilon != eps:
            raise ValueError("supports use inconsistent epsilon")
    grid = chi2.grid
    cell_mass = grid.weight * chi2.values
    total = float(np.sum(cell_mass))
    if total <= 0:
        raise ValueError("chi2 distribution carries no mass on this grid")
    share = cell_mass / total

    masks = np.stack([s.mask() for s in supports])
    n_covering = masks.sum(axis=0)
    hs = branch_husimi_values(chi2.model, chi2.branches, chi2.time, grid)
    weighted = np.stack(
        [abs(b.c) ** 2 * h for b, h in zip(chi2.branches, hs)]
    )
    # map support order onto branch order (labels must agree)
    label_to_row = {b.gamma: i for i, b in enumerate(chi2.branches)}
    rows = [label_to_row[s.gamma] for s in supports]
    nearest = np.argmax(weighted[rows, :], axis=0)

    contested = (n_covering > 1) | ((n_covering == 0) & (chi2.values > eps))
    tail = (n_covering == 0) & ~contested

    result = []
    for k, sup in enumerate(supports):
        unique = masks[k] & (n_covering == 1)
        mass = float(np.sum(share[unique])) + float(np.sum(share[tail & (nearest == k)]))
        contested_k = float(np.sum(share[contested & (nearest == k)]))
        result.append(BranchMass(sup.gamma, mass, contested_k))
    return result


def total_contested(masses: list[BranchMass]) -> float:
    return sum(m.contested_mass for m in masses)


def _run_generator(seed: int, run_index: int) -> np.random.Generator:
    bitgen = np.random.Philox(key=seed)
    if run_index:
        bitgen.advance(run_index * (1 << 32))
    return np.random.Generator(bitgen)


def sample_outcome(
    masses: list[BranchMass],
    model: ModelSpec,
    branches,
    t: float,
    seed: int,
    run_index: int = 0,
) -> MeasurementRecord:
    """Draw one outcome with probability mass_gamma / sum(masses).

    Requires the contested mass to be at most 5%: sampling earlier than the
    decoherence time is a caller error. The pointer value is the classical
    pointer symbol at the selected branch's trajectory point.
    """
    validate_branches(branches)
    contested = total_contested(masses)
    if contested > CONTESTED_LIMIT:
        raise NotDecoheredError(
            f"contested mass {contested:.4f} exceeds {CONTESTED_LIMIT}; "
            "measure only after the supports have separated"
        )
    weights = np.array([m.mass for m in masses])
    total = weights.sum()
    if total <= 0:
        raise ValueError("all branch masses vanish; nothing to sample")
    probs = weights / total
    u = _run_generator(seed, run_index).random()
    pick = int(np.searchsorted(np.cumsum(probs), u, side="right"))
    pick = min(pick, len(masses) - 1)
    gamma_out = masses[pick].gamma
    point = classical_trajectory(model, gamma_out, t)
    return MeasurementRecord(
        gamma_out=gamma_out,
        pointer_value=pointer_symbol(model, point),
        masses=tuple(masses),
        t=float(t),
        seed=int(seed),
        run_index=int(run_index),
        reduced_state=gamma_out,
    )


def reduce_state(
    record: MeasurementRecord,
    model: ModelSpec,
    branches,
    epsilon: float = 1e-3,
) -> tuple[str, bool]:
    """Post-measurement system state label, plus a purity consistency check.

    The conditional state at the selected branch's trajectory point must put
    weight >= 1 - 10 epsilon on that branch.
    """
    point = classical_trajectory(model, record.gamma_out, record.t)
    state = conditional_state(model, branches, record.t, point)
    ok = state.weight(record.gamma_out) >= 1.0 - 10.0 * epsilon
    return record.gamma_out, ok


def born_statistics(
    model: ModelSpec,
    branches,
    t: float,
    grid: Grid,
    epsilon: float,
    n_runs: int,
    seed: int,
) -> tuple[list[MeasurementRecord], dict]:
    """Repeated seeded measurements plus a Pearson chi-square comparison.

    The masses are computed once at time t; each run draws independently via
    the counter-based splitting rule. The summary reports, per branch, the
    empirical frequency, the Born weight |c|^2, and their absolute deviation,
    together with the chi-square statistic and p-value against the *mass*
    probabilities actually sampled from.
    """
    if n_runs < 1:
        raise ValueError(f"n_runs must be positive, got {n_runs}")
    validate_branches(branches)
    chi2 = chi_squared(model, branches, t, grid)
    supports = branch_supports(model, branches, t, grid, epsilon)
    masses = branch_mass(chi2, supports)
    records = [
        sample_outcome(masses, model, branches, t, seed, run_index=i) for i in range(n_runs)
    ]
    labels = [m.gamma for m in masses]
    counts = {g: 0 for g in labels}
    for r in records:
        counts[r.gamma_out] += 1
    weights = np.array([m.mass for m in masses])
    probs = weights / weights.sum()
    observed = np.array([counts[g] for g in labels], dtype=float)
    expected = probs * n_runs
    keep = expected > 0
    if int(keep.sum()) > 1:
        stat = float(np.sum((observed[keep] - expected[keep]) ** 2 / expected[keep]))
        p_value = float(stats.chi2.sf(stat, df=int(keep.sum()) - 1))
    else:
        stat, p_value = 0.0, 1.0
    born = {b.gamma: abs(b.c) ** 2 for b in branches}
    summary = {
        "n_runs": n_runs,
        "seed": seed,
        "rng": RNG_ALGORITHM,
        "T": float(t),
        "epsilon": epsilon,
        "chi2_total": chi2.integral(),
        "contested_mass": total_contested(masses),
        "branches": [
            {
                "gamma": g,
                "frequency": counts[g] / n_runs,
                "born_weight": born[g],
                "abs_deviation": abs(counts[g] / n_runs - born[g]),
                "mass": float(weights[i]),
            }
            for i, g in enumerate(labels)
        ],
        "chi_square": stat,
        "p_value": p_value,
    }
    return records, summary
