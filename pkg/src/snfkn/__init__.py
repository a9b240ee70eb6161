"""Analysis of nearly linear Boolean functions on the symmetric group.

Linear means degree at most 1: f(pi) = constant + sum c[i, j] [pi(i) = j].
The library measures how far such a function is from Boolean-valued in the
L2, L0, and sup norms, and recovers the structure forcing that closeness:
a union of mostly disjoint cosets in general, a dictator (single-line
function) when the function is balanced enough.
"""
from .config import (
    DEFAULTS,
    Options,
    CapacityError,
    NotNearBoolean,
    PremiseViolated,
    SnfknError,
)
from .cube import (
    CubeForm,
    CubeLinear,
    cube_l2sq_between,
    evaluate_cube,
    fkn_round_cube,
    l0_form_check,
    linf_round_cube,
    restrict_to_square_system,
)
from .extract_l0 import (
    SquareCensus,
    analyze_l0,
    sparse_representation_l0,
    square_census,
    square_defect,
)
from .extract_l2 import (
    AnchorChoice,
    SparseRep,
    SporadicRep,
    analyze_l2,
    constant_or_dictator,
    extract_coset_family,
    select_anchor,
    sparse_representation,
    sporadic_representation,
)
from .extract_linf import (
    LinfRep,
    analyze_linf,
    dictator_decision_linf,
    sparse_representation_linf,
    sporadic_representation_linf,
)
from .generators import NoiseModel, apply_noise, gen_dictator, gen_disjoint_family, gen_tightness
from .linear import (
    DistanceReport,
    LinearFunction,
    ValueTable,
    centered_sq_norm,
    closeness_to_linear,
    degree_le1_projection,
    dist_to_boolean,
    distance_l2_between,
    efp_dictator,
    evaluate,
    evaluate_many,
    is_boolean,
    pair_covariance,
    recenter,
    value_range,
    value_table,
)
from .perms import (
    AvoidanceEstimate,
    CellSet,
    SquareSystem,
    all_permutations,
    avoid_probability,
    conditional_avoid_probability,
    derived_rng,
    permutation_from_cube_point,
    sample_permutations,
    sample_square_system,
)
from .reports import (
    CosetFamily,
    Dictator,
    StructureReport,
    dictator_sum_function,
    disjointness_stats,
    family_sum_function,
)
from .verify import SUITES, SuiteResult, run_suite

__version__ = "0.1.0"
