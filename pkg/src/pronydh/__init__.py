"""Accurate recovery of near-colliding confluent Prony systems.

Measurements are decimated, the nonlinear node problem is turned into a
square Hankel-structured polynomial system, solved by homotopy
continuation, and aliased/spurious solutions are pruned away.  Condition
diagnostics and ESPRIT/classical-Prony baselines are included for
comparison experiments.
"""

from .classical import (
    assign_multiplicities,
    confluent_vandermonde_solve,
    hankel_matrix,
    hankel_nullspace,
    polynomial_roots,
    prony_solve,
    single_node_solve,
)
from .conditioning import (
    ConditionReport,
    condition_numbers_decimated,
    condition_numbers_full,
    forward_jacobian,
    system_sensitivity,
)
from .errors import SolveFailure
from .esprit import EspritOptions, esprit_estimate
from .hankelize import (
    CoefficientExpansion,
    HankelSystem,
    JacobianFactorization,
    build_hankel_system,
    closed_form_jacobian,
    elementary_symmetric,
    prony_coefficient_expansion,
    prony_polynomial,
    single_node_polynomial,
)
from .model import (
    MeasurementSequence,
    MultiplicityVector,
    NoiseSpec,
    PronyParameters,
    SeparationReport,
    add_noise,
    choose_decimation,
    decimate,
    forward_map,
    scale_map,
    separation,
)
from .pipeline import (
    ExperimentConfig,
    ExperimentReport,
    SolveOptions,
    decimated_homotopy,
    emit_report,
    node_error,
    random_cluster_instance,
    run_experiment,
)
from .polysolve import (
    MultiPoly,
    PathResult,
    SolutionSet,
    SquareSystem,
    TrackOptions,
    newton_refine,
    solve_system,
    total_degree_start,
    track_path,
)
from .pruning import (
    CandidateSet,
    aliased_roots,
    filter_by_init,
    recurrence_residual,
    select_exhaustive,
    select_prefilter,
)

__version__ = "0.1.0"
