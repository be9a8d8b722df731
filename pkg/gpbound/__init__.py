"""
gpbound - lower bounds for multivariate polynomials via geometric programming.

Computes f_gp, a lower bound for f on R^n, and f_gp,M, a lower bound for f on
{x : sum x_i^(2d) <= M}, by solving small geometric programs.

Example:
    from gpbound import f_gp, f_gp_ball, parse_polynomial

    f = parse_polynomial("x^6 + 3x^4 - 9x^2")
    f_gp(f).value            # -10.3923...
    f_gp_ball(f, 1.0).value  # -8.0
"""

from gpbound.bounds import (
    Bound,
    BoundComputationError,
    BoundKind,
    Provenance,
    closed_form_bound,
    f_gp,
    f_gp_ball,
    is_trivially_exact,
    lagrangian,
)
from gpbound.config import BoundConfig, configure, get_config, set_config, using_config
from gpbound.gpmodel import (
    GeometricProgram,
    GpMonomial,
    GpVariable,
    LogConvexProgram,
    PreInfeasible,
    build_ball_gp,
    build_unconstrained_gp,
    log_transform,
)
from gpbound.gpsolve import (
    FeasibilityReport,
    Solution,
    SolverSettings,
    SolveStatus,
    phase1_feasibility,
    solve,
)
from gpbound.instances import InstanceSpec, InstanceSpecError, random_instance
from gpbound.oracle import (
    ViolationReport,
    exact_min_small,
    lambda_profile,
    lambda_sweep,
    sample_ball_check,
)
from gpbound.polyring import (
    DimensionError,
    Polynomial,
    PolynomialParseError,
    SupportSets,
    descending_permutation,
    evaluate,
    evaluate_many,
    is_square_monomial,
    parse_polynomial,
    permute_variables,
    support_sets,
)

__version__ = "0.1.0"
__all__ = [
    # Polynomials
    "Polynomial",
    "SupportSets",
    "PolynomialParseError",
    "DimensionError",
    "parse_polynomial",
    "evaluate",
    "evaluate_many",
    "support_sets",
    "is_square_monomial",
    "permute_variables",
    "descending_permutation",
    # Geometric programs
    "GpVariable",
    "GpMonomial",
    "GeometricProgram",
    "PreInfeasible",
    "LogConvexProgram",
    "build_unconstrained_gp",
    "build_ball_gp",
    "log_transform",
    # Solver
    "SolverSettings",
    "SolveStatus",
    "Solution",
    "FeasibilityReport",
    "solve",
    "phase1_feasibility",
    # Bounds
    "Bound",
    "BoundKind",
    "Provenance",
    "BoundComputationError",
    "f_gp",
    "f_gp_ball",
    "closed_form_bound",
    "is_trivially_exact",
    "lagrangian",
    # Oracle
    "ViolationReport",
    "sample_ball_check",
    "exact_min_small",
    "lambda_profile",
    "lambda_sweep",
    # Instances
    "InstanceSpec",
    "InstanceSpecError",
    "random_instance",
    # Config
    "BoundConfig",
    "get_config",
    "set_config",
    "configure",
    "using_config",
]
