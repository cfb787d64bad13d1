"""Best approximation under convex constraints and prescribed proximal points.

A catalog of firmly nonexpansive observation operators and equivalence
transforms, a closed-form anchored projection onto two halfspaces, a
block-iterative extrapolated best-approximation solver, and a
configuration-driven signal-recovery experiment.
"""

from .core import (
    ALGEBRAIC_TOL,
    ITERATIVE_TOL,
    CheckReport,
    LinearMap,
    Operator,
    Regularity,
    as_signal,
    check_class_t,
    check_firmly_nonexpansive,
    dot,
    identity_operator,
    norm,
)
from .catalog import (
    BlockPartition,
    EquivalentPrescription,
    Interval,
    ObservationSpec,
    ball_projector,
    ball_saturation,
    bandlimit_projector,
    block_norm_shrink,
    box_projector,
    cocoercive_aggregate,
    coordinatewise_basis_operator,
    distance_prox,
    equivalent_prescription_from_hard,
    firmly_nonexpansive_suite,
    group_soft_threshold,
    halfspace_projector,
    hard_clip,
    hard_threshold,
    hard_threshold_transform,
    hyperplane_projector,
    isotonic_projection,
    level_set_operator,
    logistic_encoder,
    soft_clip,
    soft_threshold,
    sqrt_sampler,
    sqrt_sampler_prescription,
    sqrt_sampler_transform,
    subgradient_projector,
    tv,
    tv_ball_operator,
    tv_subgradient,
    vector_hard_threshold_observation,
)
from .haugazeau import (
    InfeasibleHalfspacesError,
    QBranch,
    QDiagnostics,
    halfspace_pair_projection_oracle,
    q_operator,
)
from .solver import (
    AffineSubspace,
    ControlConfig,
    ConvexSet,
    Prescription,
    Problem,
    Schedule,
    SolveStatus,
    SolveTrace,
    TraceRecord,
    alternating_extrapolation,
    constraint_residual,
    fixed_point_activation,
    full_extrapolation,
    haugazeau_periodic,
    pierra_parallel,
    schedule_round_robin,
    solve,
    step,
)
from .experiment import (
    ExperimentConfig,
    ExperimentResult,
    ExperimentSetup,
    TraceRow,
    build_observations,
    build_setup,
    emit_csv,
    generate_signal,
    parse_trace_csv,
    run_experiment,
    run_variant,
    write_solution_csv,
)

__version__ = "0.1.0"
