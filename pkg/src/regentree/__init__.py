"""Finite representations of rooted compact real trees, excursion coding,
certified discretization, branching-process samplers and numerics, and a
seeded Monte-Carlo verification harness."""

from .coding import Excursion, contour_of, excursion_point, pseudo_distance, tree_from_excursion
from .csbp import (
    BranchingMechanism,
    dsbp_extinction_ode,
    dsbp_generator_row,
    extinction_integral,
    gw_laplace_iterate,
    psi_eval,
    u_solve,
    v_levy,
)
from .discretize import (
    DiscretizationResult,
    discretisation_witness,
    uniform_ordering,
    xi_epsilon,
)
from .gh import (
    Correspondence,
    DeltaNet,
    delta_net,
    gh_bracket_small,
    gh_lower_invariants,
    gh_upper,
    half_distortion,
)
from .harness import CheckReport, CheckSpec, chi2_test, ks_test, run_check, run_suite
from .mtt import parse_tree, parse_tree_file, serialize_tree
from .samplers import (
    FiniteThetaParams,
    OffspringDistribution,
    RngState,
    sample_approx_levy_tree,
    sample_dsbp_path,
    sample_dyck_excursion,
    sample_finite_theta,
    sample_gw_process,
    sample_gw_tree,
    sample_gw_tree_cond_height,
    sample_poisson_forest,
)
from .trees import (
    CanonicalTree,
    MarkedTree,
    OrderedTree,
    TreePoint,
    canonicalize,
    count_at_level,
    count_orderings,
    count_Z,
    distance,
    height,
    level,
    metric_canonical_key,
    restrict,
    shift,
    subtrees_above,
)

__version__ = "0.1.0"
