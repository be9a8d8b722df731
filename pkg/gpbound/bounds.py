"""
Lower bounds for polynomials via geometric programming.

    f_gp(f)        = f(0) - rho               bound on all of R^n (may be -inf)
    f_gp_ball(f,M) = f(0) + M f_{2d,1} - rho_M  bound on {sum x_i^(2d) <= M}

rho and rho_M are optimal values of the programs built in gpbound.gpmodel.
When the support is small enough for explicit formulas, closed_form_bound
evaluates them directly; the solver path cross-checks against it.

The solved ball bound is finished with the Lagrangian dual value
G(lambda) = f_gp(f - lambda (M - sum x_i^(2d))) at the recovered multiplier
and at 0, whichever is largest, so large M does not cost accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any

from gpbound.cache import memoize
from gpbound.config import get_config
from gpbound.gpmodel import (
    PreInfeasible,
    build_ball_gp,
    build_unconstrained_gp,
    log_alpha_power,
    log_transform,
    variable_name,
)
from gpbound.gpsolve import Solution, SolverSettings, SolveStatus, solve
from gpbound.logging import get_logger, log_timing
from gpbound.polyring import (
    Polynomial,
    descending_permutation,
    inverse_permutation,
    permute_variables,
    support_sets,
)
from gpbound.validation import ensure, nonnegative, positive


class BoundKind(str, Enum):
    UNCONSTRAINED = "unconstrained"
    BALL = "ball"


class Provenance(str, Enum):
    CLOSED_FORM = "closed_form"
    GP_SOLVER = "gp_solver"


class BoundComputationError(RuntimeError):
    """
    The solver stopped before certifying optimality.

    `best_value` is the bound implied by the best feasible iterate (still a
    valid, looser lower bound) or None when no feasible iterate was found.
    """

    def __init__(self, message: str, best_value: float | None = None, solution: Solution | None = None):
        super().__init__(message)
        self.best_value = best_value
        self.solution = solution


@dataclass(frozen=True)
class Bound:
    """
    A lower bound on f, either global or on the ball of radius M.

    `value` is None for -inf; ball bounds are always finite.
    """

    value: float | None
    kind: BoundKind
    M: float | None = None
    provenance: Provenance = Provenance.GP_SOLVER
    lambda_star: float | None = None
    solver: Solution | None = None

    def __post_init__(self):
        if self.value is not None and not math.isfinite(self.value):
            raise ValueError("Bound values are finite; use None for -inf")
        if self.kind is BoundKind.BALL:
            if self.M is None or not self.M > 0:
                raise ValueError("Ball bounds require M > 0")
            if self.value is None:
                raise ValueError("Ball bounds are always finite")
        if self.lambda_star is not None and self.lambda_star < 0:
            raise ValueError("lambda_star must be nonnegative")

    @property
    def is_neg_inf(self) -> bool:
        return self.value is None

    @property
    def extended_value(self) -> float:
        """The value as a float, -inf included (for comparisons)."""
        return -math.inf if self.value is None else self.value

    def to_dict(self) -> dict[str, Any]:
        solver = None
        if self.solver is not None:
            solver = {
                "status": self.solver.status.value,
                "value": self.solver.value if math.isfinite(self.solver.value) else None,
                "kkt_residual": (
                    self.solver.kkt_residual if math.isfinite(self.solver.kkt_residual) else None
                ),
                "iterations": self.solver.iterations,
                "relaxation": self.solver.relaxation,
            }
        return {
            "bound": "neg_inf" if self.value is None else self.value,
            "kind": self.kind.value,
            "M": self.M,
            "provenance": self.provenance.value,
            "lambda_star": self.lambda_star,
            "solver": solver,
        }


# =============================================================================
# Closed forms
# =============================================================================


def closed_form_bound(p: Polynomial, M: float | None = None) -> Bound | None:
    """
    Explicit f_gp (M is None) or f_gp_ball(M) for small supports.

    Applies when Delta(f) is empty, or when Delta(f) = {alpha} and every
    diagonal coefficient equals 1. Returns None otherwise.
    """
    if M is not None:
        ensure({"M": (M, [positive()])})
    s = support_sets(p)
    f0 = s.constant
    kind = BoundKind.UNCONSTRAINED if M is None else BoundKind.BALL

    if not s.delta:
        low = min(s.diagonal)
        if M is None:
            value = f0 if low >= 0 else None
            return Bound(value, kind, provenance=Provenance.CLOSED_FORM)
        value = f0 if low >= 0 else f0 + M * low
        return Bound(value, kind, M, Provenance.CLOSED_FORM, lambda_star=max(0.0, -low))

    if len(s.delta) != 1 or any(d != 1 for d in s.diagonal):
        return None

    (alpha,) = s.delta
    two_d = s.two_d
    size = sum(alpha)
    magnitude = abs(s.coefficients[alpha])
    # K = (|f_alpha| / 2d)^(2d) * alpha^alpha
    log_k = two_d * math.log(magnitude / two_d) + log_alpha_power(alpha)

    if size == two_d:
        if M is None:
            return Bound(f0 if log_k <= 0 else None, kind, provenance=Provenance.CLOSED_FORM)
        u = math.exp(max(0.0, log_k / two_d))
        return Bound(f0 - M * (u - 1), kind, M, Provenance.CLOSED_FORM, lambda_star=u - 1)

    gap = two_d - size
    scale = math.exp(log_k / gap)
    global_value = f0 - gap * scale
    if M is None:
        return Bound(global_value, kind, provenance=Provenance.CLOSED_FORM)
    threshold = size * scale
    if M >= threshold:
        return Bound(global_value, kind, M, Provenance.CLOSED_FORM, lambda_star=0.0)
    tail = magnitude * math.exp((size * math.log(M / size) + log_alpha_power(alpha)) / two_d)
    lambda_star = (threshold / M) ** (gap / two_d) - 1
    return Bound(f0 + M - tail, kind, M, Provenance.CLOSED_FORM, lambda_star=max(0.0, lambda_star))


def is_trivially_exact(p: Polynomial) -> bool:
    """|Omega(f)| <= 1: the GP bounds coincide with the true infima."""
    return len(support_sets(p).omega) <= 1


def _agrees(a: Bound, b: Bound, rtol: float) -> bool:
    if a.is_neg_inf or b.is_neg_inf:
        return a.is_neg_inf and b.is_neg_inf
    return abs(a.value - b.value) <= rtol * max(1.0, abs(a.value))


def _cross_check(p: Polynomial, closed: Bound, solved: Bound, rtol: float) -> None:
    if not _agrees(closed, solved, rtol):
        get_logger().warning(
            "closed form and solver disagree",
            component="bounds",
            action="cross_check",
            polynomial=str(p),
            kind=closed.kind.value,
            M=closed.M,
            closed_form=closed.extended_value,
            solver=solved.extended_value,
        )


# =============================================================================
# Solver paths
# =============================================================================


def _require_optimal(solution: Solution, best_value: float | None, what: str) -> None:
    if solution.status is SolveStatus.MAX_ITERATIONS:
        raise BoundComputationError(
            f"{what}: solver hit the iteration limit after {solution.iterations} Newton steps",
            best_value=best_value,
            solution=solution,
        )


@memoize("f_gp", key_fn=lambda p, settings: (p.key(), settings))
def _solve_unconstrained(p: Polynomial, settings: SolverSettings) -> Bound:
    s = support_sets(p)
    gp = build_unconstrained_gp(s)
    if isinstance(gp, PreInfeasible):
        get_logger().debug(
            "unconstrained program infeasible by sign check",
            component="bounds",
            action="f_gp",
            reason=gp.reason,
        )
        return Bound(None, BoundKind.UNCONSTRAINED)

    solution = solve(log_transform(gp), settings)
    if solution.status is SolveStatus.INFEASIBLE:
        return Bound(None, BoundKind.UNCONSTRAINED, solver=solution)
    best = s.constant - solution.value if math.isfinite(solution.value) else None
    _require_optimal(solution, best, "f_gp")
    return Bound(s.constant - solution.value, BoundKind.UNCONSTRAINED, solver=solution)


def _dual_value(p: Polynomial, lam: float, M: float) -> float:
    """G(lambda) = f_gp(f_lambda), a lower bound on the ball for every lambda >= 0."""
    try:
        q = p if lam == 0 else lagrangian(p, lam, M)
        return f_gp(q).extended_value
    except BoundComputationError as e:
        return -math.inf if e.best_value is None else e.best_value


def _tighten(p: Polynomial, M: float, value: float, lambda_star: float) -> tuple[float, float]:
    """
    Best of the primal bound and the dual values at lambda_star and 0.

    f(0) + M f_{2d,1} - rho_M loses about tolerance * M to cancellation; the
    dual values carry no M f_{2d,1} term. Every candidate is a valid bound,
    so the largest is kept together with its multiplier.
    """
    candidates = [(value, lambda_star)]
    if lambda_star > 0:
        candidates.append((_dual_value(p, lambda_star, M), lambda_star))
    candidates.append((_dual_value(p, 0.0, M), 0.0))
    best, lam = max(candidates, key=lambda c: c[0])
    if best > value:
        get_logger().debug(
            "ball bound tightened by dual value",
            component="bounds",
            action="f_gp_ball",
            M=M,
            primal=value,
            dual=best,
            lambda_star=lam,
        )
    return best, lam


@memoize("f_gp_ball", key_fn=lambda p, M, settings: (p.key(), M, settings))
def _solve_ball(p: Polynomial, M: float, settings: SolverSettings) -> Bound:
    perm = descending_permutation(support_sets(p).diagonal)
    inverse = inverse_permutation(perm)
    s = support_sets(permute_variables(p, perm))
    gp = build_ball_gp(s, None, M)
    solution = solve(log_transform(gp), settings)

    offset = s.constant + M * s.diagonal[0]
    best = offset - solution.value if math.isfinite(solution.value) else None
    if solution.status is SolveStatus.INFEASIBLE:
        raise BoundComputationError("f_gp_ball: ball program reported infeasible", best, solution)
    _require_optimal(solution, best, "f_gp_ball")

    # report the point in the caller's variable labels
    point = {}
    for v in gp.variables:
        alpha = None if v.alpha is None else tuple(v.alpha[perm[i]] for i in range(s.n))
        point[variable_name(v.kind, inverse[v.index], alpha)] = solution.point[v.name]
    lambda_star = max(0.0, solution.point[variable_name("u", 0)] - s.diagonal[0])
    value, lambda_star = _tighten(p, M, offset - solution.value, lambda_star)
    return Bound(
        value,
        BoundKind.BALL,
        M,
        Provenance.GP_SOLVER,
        lambda_star=lambda_star,
        solver=replace(solution, point=point),
    )


@log_timing(component="bounds")
def f_gp(p: Polynomial) -> Bound:
    """
    Global lower bound f(0) - rho, or -inf when the program is infeasible.

    Small supports use the closed form; with cross_check enabled the solver
    is run as well and disagreements are logged.

    Raises:
        BoundComputationError: The solver hit its iteration limit
    """
    config = get_config()
    closed = closed_form_bound(p)
    if closed is not None:
        if config.cross_check:
            _cross_check(p, closed, _solve_unconstrained(p, config.solver), config.agreement_rtol)
        return closed
    return _solve_unconstrained(p, config.solver)


@log_timing(component="bounds")
def f_gp_ball(p: Polynomial, M: float) -> Bound:
    """
    Lower bound f(0) + M f_{2d,1} - rho_M on {x : sum x_i^(2d) <= M}.

    Variables are relabeled so the diagonal is descending before the program
    is built. The solver always runs unless the `fast` config flag is set and
    a closed form exists; the closed form then serves as a check.

    Raises:
        ValueError: M <= 0
        BoundComputationError: The solver hit its iteration limit
    """
    ensure({"M": (M, [positive()])})
    M = float(M)
    config = get_config()
    closed = closed_form_bound(p, M)
    if closed is not None and config.fast:
        return closed
    solved = _solve_ball(p, M, config.solver)
    if closed is not None:
        _cross_check(p, closed, solved, config.agreement_rtol)
    return solved


def lagrangian(p: Polynomial, lam: float, M: float) -> Polynomial:
    """
    f_lambda(x) = f(x) - lambda (M - sum x_i^(2d)).

    The constant drops by lambda*M and each x_i^(2d) coefficient rises by lambda.
    """
    ensure({"lambda": (lam, [nonnegative()]), "M": (M, [positive()])})
    terms = dict(p.terms)
    zero = (0,) * p.n
    terms[zero] = terms.get(zero, 0.0) - lam * M
    for i in range(p.n):
        unit = tuple(p.two_d if j == i else 0 for j in range(p.n))
        terms[unit] = terms.get(unit, 0.0) + lam
    return Polynomial(n=p.n, two_d=p.two_d, terms=terms)
