"""Exact discrete and semi-discrete optimal transport with limit-law sampling.

The package solves small transport instances exactly, represents the full
set of dual optimizers as a polytope, samples the limit distributions of
the empirical transport cost (suprema of Gaussian fields over that
polytope), tests uniqueness and triviality of the optimizers, and runs
seeded Monte Carlo experiments for the associated central limit theorems,
bootstrap, and pivotal statistics.
"""

from .degeneracy import (
    ProjectionReport,
    all_trivial_test,
    bitrivial_check,
    c_projection,
    exists_trivial_test,
    min_potential_range,
    projected_measure_test,
)
from .dual_face import (
    DualFace,
    EpsilonFace,
    FaceError,
    anchored_bounds,
    build_face,
    enumerate_face_vertices,
    sup_linear,
    sup_linear_epsilon,
    uniqueness_test,
)
from .inference import (
    BootstrapResult,
    DegenerateVariance,
    ExperimentAborted,
    ExperimentReport,
    bootstrap_kn,
    clt_experiment,
    ks_distance,
    ks_distance_to_cdf,
    normal_cdf,
    pivotal_experiment,
    pivotal_statistic,
    sample_empirical,
)
from .limit_law import (
    GaussianDraw,
    LimitSampleSet,
    empirical_cdf,
    normal_limit_params,
    quantile,
    sample_gaussian,
    sample_limit,
)
from .measures import (
    CostMatrix,
    CostSpec,
    DiscreteMeasure,
    ExplicitMatrix,
    PowerDistance,
    RadialDistance,
    RegularityReport,
    ThresholdedPower,
    bdd_sum,
    cost_matrix,
    holder_estimate,
    measure,
    semiconcavity_check,
    support,
)
from .ot_core import (
    SolverError,
    TransportSolution,
    brute_force_ot,
    c_transform,
    duality_gap,
    normalize_to_Fc,
    solve_discrete_ot,
)
from .semidiscrete import (
    ConvergenceError,
    DensityMeasure1D,
    SemiDualState,
    semidiscrete_clt_experiment,
    solve_semidiscrete,
)

__version__ = "0.1.0"
