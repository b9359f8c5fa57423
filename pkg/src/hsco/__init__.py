"""Solvers for minimization under a cap on the number of positive entries of
Ax - b, with margin-classification and one-bit-recovery front ends."""

from .errors import (
    BadDimensions,
    BadLabel,
    DimensionMismatch,
    DirectionFailure,
    EmptyFile,
    EmptyMatrix,
    EmptyTrialList,
    HscoError,
    InfeasiblePoint,
    MalformedLine,
    MissingBiasColumn,
    NonIncreasingIndex,
    NonPositiveTau,
    NotSymmetric,
    RankDeficientActiveSet,
    Singular,
    SingularKKT,
    ZeroStartVector,
)
from .heaviside import (
    HeavisideBudget,
    IndexPartition,
    default_zero_tol,
    enumerate_working_sets,
    fixed_point_check,
    normal_cone_contains,
    partition,
    project,
    project_all,
    sign_pm1,
    sth_largest_positive,
    tangent_cone_contains,
)
from .model import (
    Objective,
    Problem,
    QuadraticObjective,
    SmoothedLqObjective,
    SvmObjective,
    build_cs_problem,
    build_svm_problem,
    evaluate,
    signed_design,
)
from .stationarity import (
    Iterate,
    StationarityReport,
    canonical_working_set,
    diagnostics,
    feasibility_rank_check,
    jacobian,
    residual,
    verify_stationary,
)
from .solver import (
    IterationRecord,
    SolveReport,
    SolverConfig,
    Termination,
    newton_direction,
    nhs_solve,
    nhst_solve,
)
from .dataio import (
    CsInstance,
    Dataset,
    generate_cs_instance,
    parse_libsvm,
    scale_and_augment,
    starting_point,
    write_libsvm,
)
from .metrics import (
    TrialResult,
    TrialSummary,
    aggregate,
    classification_accuracy,
    recovery_metrics,
)

__version__ = "0.1.0"
