"""Exact oracle complexity of finite problems.

Problems, strategies and their evaluation; the constructions that move between
one instance and n copies; exact solvers for the distributional frontier, the
randomized value and worst-case depth; and a harness that checks the direct-sum,
additivity, continuity and minimax statements on concrete instances.
"""

from .constructions import (
    Budget,
    FilterResult,
    chebyshev_budget,
    continuity_weight,
    embed_coordinate,
    filter_posterior,
    k_for_alpha,
    mix,
    posterior_table,
    repeat_n,
    truncate,
)
from .errors import (
    CatalogCapError,
    FormatError,
    InfeasibleError,
    OracleComplexityError,
    PreconditionError,
    ProblemError,
)
from .exact import Surd, fmt, frac, sqrt
from .model import (
    SINGLE,
    Joint,
    OutcomeSpace,
    Oracle,
    PerCoordinate,
    Prior,
    Problem,
    Semantics,
    TargetFunction,
    ensure_valid,
    make_estimation_problem,
    make_pac_problem,
    make_query_problem,
    product_problem,
    smooth_prior,
    validate_problem,
)
from .solver import (
    FrontierCurve,
    GameValue,
    TreeCatalog,
    dist_frontier,
    dist_value,
    enumerate_trees,
    matrix_game,
    randomized_value,
    worst_case_depth,
    worst_case_witness,
)
from .strategy import (
    Evaluation,
    Leaf,
    Query,
    RandomizedStrategy,
    canonicalize,
    derandomize,
    evaluate,
    mu_aggregates,
    worst_case,
)
from .verify import (
    CheckReport,
    Claim,
    check_additivity,
    check_continuity,
    check_derandomization,
    check_direct_sum,
    check_minimax,
    check_truncation,
)

__version__ = "0.1.0"
