"""Randomized block Kaczmarz methods for mixed linear equalities and inequalities."""

from .errors import (
    BadBlockCount,
    InvalidParams,
    KaczmarzError,
    NotConverged,
    ObtusifyFailed,
    OracleNotConverged,
    RankDeficient,
    ZeroRowError,
)
from .linalg import (
    gram_max_eigenvalue,
    lsq_min_norm,
    min_singular_value,
    pinv,
    row_norms,
    spectral_norm,
)
from .oracle import ProjectionResult, distance_to_S, hoffman_lower_bound, project_onto_S
from .paving import (
    RowPaving,
    check_prop1_regime,
    count_positive_pairs,
    is_pairwise_obtuse,
    measure_beta,
    obtusify,
    random_partition,
    singleton_paving,
)
from .rates import RateParams, epoch_comparison, hoffman_equality_case, rate_params, theoretical_rate
from .solvers import (
    ResidualTrace,
    SolverConfig,
    block_step,
    inequality_step,
    pruned_block_step,
    run_algorithm1,
    run_algorithm2,
    run_block_kaczmarz,
    run_simple,
    simple_step,
    violated_subset,
)
from .system import (
    MixedSystem,
    from_rows,
    gen_gaussian_system,
    is_feasible,
    residual,
    residual_norm,
    standardize,
)

__version__ = "0.1.0"
