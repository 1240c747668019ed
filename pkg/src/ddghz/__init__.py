"""Entangling-gate design for electron-nuclear spin registers.

Layers:

- ``spinmodel``: conditional nuclear propagators under pi-pulse sequences,
  axis-angle extraction, sequence composition, resonance scans.
- ``metrics``: Makhlin-invariant one-tangles, M-way entangling power
  (unitary and non-unitary), Kraus factors, gate error.
- ``search``: sequential and single-block multi-target sequence searches
  over a register, producing ranked cases.
- ``mixedstate``: rank-2 reduced states, convex-roof three-tangle bounds.
- ``oracle``: dense-statevector and enumeration cross-checks for every
  closed form, plus brute-force search references.
- ``config``/``cli``: run configuration, archives, command line.
"""

from .config import (
    DEFAULT_OMEGA_LARMOR_KHZ,
    RunConfig,
    TOOL_VERSION,
    bundled_register,
    load_register,
    load_run_config,
    write_case_archive,
)
from .errors import ConfigError, InvariantViolation
from .metrics import (
    EntanglingPowerReport,
    GateErrorReport,
    KrausFactorSet,
    MakhlinG1,
    MetricsReport,
    compute_metrics,
    g1,
    g1_iterated,
    gate_error,
    kraus_factors,
    metrics_from_rotations,
    mtangle_pure,
    mway_ep_nonunitary,
    mway_ep_scaled,
    mway_ep_unitary,
    one_tangle,
    one_tangle_scaled,
)
from .mixedstate import (
    ConvexRoofResult,
    ReducedDecomposition,
    bell_mixture_concurrence,
    convex_hull,
    convex_roof_curve,
    initial_state_search,
    reduced_decomposition,
    trial_state_minimize,
)
from .oracle import (
    DenseState,
    ProjectorPair,
    apply_cr_state,
    enumerate_kraus_channel,
    ep_via_projectors,
    evolve_dense,
    mc_entangling_power,
    partial_trace,
    product_state,
    tangle_via_projectors,
)
from .search import (
    Case,
    Candidate,
    DEFAULT_RANK_WEIGHTS,
    SearchTolerances,
    rank_cases,
    search_multispin,
    search_sequential,
)
from .spinmodel import (
    ConditionalRotation,
    NuclearSpin,
    Register,
    ResonanceSeed,
    SequenceBlock,
    SequencePlan,
    SequenceUnit,
    analytic_resonance_time,
    compose_register,
    compose_sequence,
    extract_axis_angle,
    scan_resonances,
    su2_matrix,
    unit_propagators,
)

__version__ = TOOL_VERSION

__all__ = [
    "ConfigError",
    "InvariantViolation",
    "NuclearSpin",
    "Register",
    "SequenceUnit",
    "SequenceBlock",
    "SequencePlan",
    "ConditionalRotation",
    "ResonanceSeed",
    "su2_matrix",
    "extract_axis_angle",
    "unit_propagators",
    "compose_sequence",
    "compose_register",
    "analytic_resonance_time",
    "scan_resonances",
    "MakhlinG1",
    "EntanglingPowerReport",
    "KrausFactorSet",
    "GateErrorReport",
    "MetricsReport",
    "g1",
    "g1_iterated",
    "one_tangle",
    "one_tangle_scaled",
    "mway_ep_unitary",
    "mway_ep_scaled",
    "mway_ep_nonunitary",
    "mtangle_pure",
    "kraus_factors",
    "gate_error",
    "compute_metrics",
    "metrics_from_rotations",
    "SearchTolerances",
    "Candidate",
    "Case",
    "DEFAULT_RANK_WEIGHTS",
    "search_sequential",
    "search_multispin",
    "rank_cases",
    "ReducedDecomposition",
    "ConvexRoofResult",
    "reduced_decomposition",
    "trial_state_minimize",
    "convex_hull",
    "convex_roof_curve",
    "bell_mixture_concurrence",
    "initial_state_search",
    "DenseState",
    "ProjectorPair",
    "product_state",
    "apply_cr_state",
    "evolve_dense",
    "partial_trace",
    "ep_via_projectors",
    "tangle_via_projectors",
    "mc_entangling_power",
    "enumerate_kraus_channel",
    "RunConfig",
    "load_run_config",
    "load_register",
    "bundled_register",
    "write_case_archive",
    "DEFAULT_OMEGA_LARMOR_KHZ",
    "TOOL_VERSION",
]
