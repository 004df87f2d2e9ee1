"""Exact loop-series corrections to loopy belief propagation on binary
models, with the associated graph polynomials."""

from .exact import ExactResult, brute_force, belief_ratio_state_sum, loop_identity_state_sum, loop_identity_subset_sum
from .exceptions import (
    DivisibilityError,
    GenerationError,
    IdentityError,
    LoopcorrectError,
    NotConvergedError,
    NumericError,
    SizeError,
)
from .graph import (
    Multigraph,
    contract,
    cycle_rank,
    degree_in_subset,
    delete,
    enumerate_disjoint_cycles,
    enumerate_generalized_loops,
    enumerate_matchings,
    is_connected,
)
from .graphpoly import (
    MatchingPoly,
    OmegaPoly,
    ThetaPoly,
    golden_ratio_value,
    loop_count_bound,
    matching_polynomial,
    omega,
    omega_at_1_count,
    omega_determinant_form,
    regular_graph_matching_check,
    theta_at_beta1,
    theta_contraction_deletion,
    theta_direct,
)
from .lbp import (
    LbpOptions,
    LbpResult,
    bethe_log_z,
    bethe_log_z_factor,
    run_lbp,
    run_lbp_factor,
)
from .loopseries import (
    MarginalCorrection,
    SeriesCoefficients,
    SeriesReport,
    coefficients_from_beliefs,
    factor_coefficients,
    loop_series_marginal,
    loop_series_marginal_factor,
    loop_series_z,
    loop_series_z_factor,
    single_cycle_sign_check,
    truncated_series,
)
from .model import (
    FactorModel,
    PairwiseModel,
    absorb_node_potentials,
    factor_incidence_graph,
    model_from_json,
    to_factor_model,
)
from .poly import (
    BiPoly,
    GaussianInt,
    UniPoly,
    exact_divide,
    f_poly,
    f_product_identity_check,
    g_poly,
)

__all__ = [name for name in dir() if not name.startswith("_")]
