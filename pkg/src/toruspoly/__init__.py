"""Exact computations with torus-valued polynomials on F_p^n: uniformity
norms, analytic rank, symmetric multilinear forms, weighted-degree maps on
Z^m, and Host-Kra cube groups."""

from .core import (
    BudgetExceeded,
    CycloSum,
    ExactExpectation,
    FVec,
    PrimeField,
    TorusValue,
    UnityCounter,
    char_eval,
    counter_expectation,
    enumerate_space,
    torus_add,
    torus_scale,
)
from .forms import (
    CSMForm,
    MultilinearForm,
    antiderivative,
    bias,
    binomial_lift_power,
    check_dkp,
    concat,
    dk_extract,
    naive_bias,
    sym_power,
)
from .norms import (
    AnalyticRank,
    BoundedFunction,
    RankWitness,
    analytic_rank,
    conditional_expectation,
    gowers_norm,
    gowers_power,
    gowers_power_exact,
    inverse_explore,
    mult_derivative,
    rank_witness_check,
    verify_gowers_properties,
    walsh_fourier,
)
from .poly import (
    CanonicalForm,
    NCPoly,
    NotPolynomialError,
    canonical_slots,
    count_polys,
    enumerate_polys,
)
from .cubes import (
    CubePoint,
    FilteredAbelianGroup,
    cube_preservation_check,
    equidistribution_report,
    hk_enumerate,
    hk_membership,
    hk_taylor,
    is_polynomial_map,
    joint_equidistribution_report,
)
from .weighted import (
    Factor,
    PeriodicMap,
    WeightedPoly,
    binomial_expand,
    factor_depth_extend,
    factor_retract,
    periodicity_check,
    weighted_degree,
    weighted_pth_root,
)
from .suites import SUITE_NAMES, SuiteReport, run_suite

__version__ = "0.1.0"
