"""Bounds on the probability of a finite union of events.

The inputs are partial: each event's probability and, for a chosen weight
vector c, the c-weighted sums of its pairwise intersection probabilities.
The package computes classical closed-form lower bounds, two selection-
based bound classes (lower and upper) parameterized by c, exact LP and
enumeration oracles for validating them at desk scale, and weight-search
strategies, all behind a deterministic CLI.
"""

from .bounds_classic import (
    BoundValue,
    cs_aggregate_bound,
    cs_percomponent_bound,
    dc_bound,
    gk_bound,
    kat_bound,
    ratio_bound,
    yat2_bound,
)
from .bounds_new import (
    Delta,
    PerEventSolution,
    delta_tilde,
    ell_i,
    ell_i_prime,
    feasible_x_window,
    lnew3,
    lnew4,
    unew4,
    unew5,
)
from .errors import (
    ArgumentError,
    DegenerateWeights,
    DimensionMismatch,
    InconsistentInfo,
    InfeasibleX,
    InvalidWeights,
    NoFeasibleSubset,
    ResolutionTooCoarse,
    UnionBoundsError,
)
from .linalg import (
    LinearSolution,
    LpProblem,
    LpSolution,
    optimal_inclass_bound,
    solve_linear_system,
    solve_lp,
)
from .space import (
    Classification,
    EventSpace,
    PartialInfo,
    WeightVector,
    derive_partial_info,
    exact_union,
    gamma,
    generate_random_space,
    weighted_identity,
)
from .subset_opt import (
    Direction,
    SelectionQuery,
    SubsetSelection,
    select_dp,
    select_exhaustive,
    select_fptas,
)
from .weights import (
    BoundReport,
    GkClipped,
    GkExact,
    KappaLine,
    RandomComparison,
    RandomPositive,
    ReportEntry,
    SearchConfig,
    SearchResult,
    compare_all,
    gk_clipped,
    kappa_line_search,
    random_search,
)

__version__ = "0.1.0"
