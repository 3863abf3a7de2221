"""precs: a coherent-state pre-measurement laboratory.

Evolves measurement branches on coherent-state manifolds (complex plane or
unit sphere), detects decoherence through epsilon-support disjointness,
samples outcomes that reproduce Born statistics, and cross-checks every claim
against exact Hilbert-space dynamics.
"""

from ._kernels import NUMBA_ENABLED
from .errors import (
    ConfigError,
    DegenerateConfigurationError,
    DegeneratePointError,
    NotDecoheredError,
    PrecsError,
    SupportsNotDisjointError,
    TruncationTooLargeError,
)
from .manifold import (
    Grid,
    ManifoldSpec,
    PhasePoint,
    build_plane_grid,
    build_sphere_grid,
    integrate,
    overlap2,
    overlap_amplitude,
    support_radius,
    total_measure,
)
from .dynamics import (
    BranchSpec,
    ModelSpec,
    QubitBoson,
    QubitSpinJ,
    Trajectory,
    branch_phase,
    classical_energy,
    classical_trajectory,
    default_horizon,
    ground_energy,
    husimi_branch,
    integrate_eom,
    make_branch_pair,
    manifold_of,
    pointer_symbol,
)
from .precs import (
    DEFAULT_EPSILON,
    ConditionalState,
    DistributionGrid,
    SupportSet,
    branch_supports,
    chi_squared,
    conditional_state,
    count_modes,
    decoherence_intervals,
    disjoint,
    interval_report,
    pairwise_disjoint_at,
    resolution_ratio,
    support,
)
from .oracle import (
    BranchState,
    OracleSpace,
    build_space,
    coherence_amplitude,
    decoherence_factor,
    evolve_branch,
    expectation_check,
    reduced_density,
)
from .outcome import (
    BranchMass,
    MeasurementRecord,
    born_statistics,
    branch_mass,
    reduce_state,
    sample_outcome,
)
from .verify import run_verification

__version__ = "0.1.0"

__all__ = [
    "NUMBA_ENABLED",
    "__version__",
    "PrecsError",
    "ConfigError",
    "DegenerateConfigurationError",
    "DegeneratePointError",
    "NotDecoheredError",
    "SupportsNotDisjointError",
    "TruncationTooLargeError",
    "PhasePoint",
    "ManifoldSpec",
    "Grid",
    "build_plane_grid",
    "build_sphere_grid",
    "integrate",
    "overlap2",
    "overlap_amplitude",
    "support_radius",
    "total_measure",
    "QubitBoson",
    "QubitSpinJ",
    "ModelSpec",
    "BranchSpec",
    "Trajectory",
    "make_branch_pair",
    "manifold_of",
    "default_horizon",
    "ground_energy",
    "classical_trajectory",
    "integrate_eom",
    "branch_phase",
    "husimi_branch",
    "classical_energy",
    "pointer_symbol",
    "DEFAULT_EPSILON",
    "DistributionGrid",
    "SupportSet",
    "ConditionalState",
    "chi_squared",
    "conditional_state",
    "support",
    "branch_supports",
    "disjoint",
    "pairwise_disjoint_at",
    "decoherence_intervals",
    "interval_report",
    "resolution_ratio",
    "count_modes",
    "OracleSpace",
    "BranchState",
    "build_space",
    "evolve_branch",
    "coherence_amplitude",
    "decoherence_factor",
    "reduced_density",
    "expectation_check",
    "BranchMass",
    "MeasurementRecord",
    "branch_mass",
    "sample_outcome",
    "reduce_state",
    "born_statistics",
    "run_verification",
]
