"""
Barrier solver for log-convex geometric programs.

Solves a LogConvexProgram to global optimality:

1. Each affine equality is eliminated by solving for one log-variable.
2. A phase-1 program (minimize a common slack s over every row) finds a
   strictly feasible point or certifies that none exists.
3. The log objective is minimized with a damped-Newton barrier method.

All exponential sums are max-shifted, so objective coefficients spanning
hundreds of decades are handled in log space.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg
from scipy.special import logsumexp

from gpbound.gpmodel import LogConvexProgram, row_logsumexp
from gpbound.logging import get_logger
from gpbound.validation import at_least, ensure, integer, positive

_FEASIBLE_MARGIN = 1e-6
_RELAX_MARGIN = 1e-9


class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    MAX_ITERATIONS = "max_iterations"


@dataclass(frozen=True)
class SolverSettings:
    """
    Barrier method settings.

    Attributes:
        tolerance: Target duality gap in log-objective units (relative accuracy of the value)
        max_iterations: Newton steps allowed per centering pass
        barrier_decrease: Factor the barrier weight shrinks by per outer iteration
        log_bound: Every log-variable is confined to [-log_bound, log_bound]
        feasibility_threshold: Phase-1 slack above which the program is infeasible
        stall_tolerance: Duality gap accepted when centering stalls on rounding
    """

    tolerance: float = 1e-9
    max_iterations: int = 200
    barrier_decrease: float = 10.0
    log_bound: float = 60.0
    feasibility_threshold: float = 1e-7
    stall_tolerance: float = 1e-6

    def __post_init__(self):
        ensure(
            {
                "tolerance": (self.tolerance, [positive()]),
                "max_iterations": (self.max_iterations, [integer(), at_least(1)]),
                "barrier_decrease": (
                    self.barrier_decrease,
                    [at_least(1.0 + 1e-12, "Must be greater than 1")],
                ),
                "log_bound": (self.log_bound, [positive()]),
                "feasibility_threshold": (self.feasibility_threshold, [positive()]),
                "stall_tolerance": (self.stall_tolerance, [positive()]),
            }
        )


@dataclass(frozen=True)
class Solution:
    """
    Result of solve().

    `value` is the objective in GP units: the optimum when OPTIMAL, the
    objective at the best feasible iterate when MAX_ITERATIONS (inf when no
    feasible iterate was reached), and inf when INFEASIBLE.

    `relaxation` is the amount (in log units) every row was widened by when
    the program is only weakly feasible. The value is then the optimum of the
    widened program, which can lie below the true optimum, so a bound
    f(0) - value built from it errs on the optimistic side by at most the
    change the widening allows.
    """

    status: SolveStatus
    value: float
    point: Mapping[str, float] = field(default_factory=dict)
    kkt_residual: float = math.inf
    iterations: int = 0
    trace: tuple[float, ...] = ()
    relaxation: float = 0.0

    @property
    def is_optimal(self) -> bool:
        return self.status is SolveStatus.OPTIMAL


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    slack: float
    point: Mapping[str, float] | None = None
    iterations: int = 0
    converged: bool = True


# =============================================================================
# Reduced problem
# =============================================================================


@dataclass
class _Problem:
    """
    minimize lse(obj_A x + obj_b) + mu * sum_r -log(-F_r(x)),
    F_r(x) = lse over the terms of row r of (row_A x + row_b).
    """

    obj_A: np.ndarray
    obj_b: np.ndarray
    row_A: np.ndarray
    row_b: np.ndarray
    starts: np.ndarray
    row_of: np.ndarray = field(init=False)

    def __post_init__(self):
        counts = np.diff(np.append(self.starts, self.row_b.size))
        self.row_of = np.repeat(np.arange(self.starts.size), counts)

    @property
    def n_rows(self) -> int:
        return int(self.starts.size)

    def rows(self, x: np.ndarray) -> np.ndarray:
        return row_logsumexp(self.row_A @ x + self.row_b, self.starts)

    def log_objective(self, x: np.ndarray) -> float:
        return float(logsumexp(self.obj_A @ x + self.obj_b))

    def merit(self, x: np.ndarray, mu: float) -> float:
        F = self.rows(x)
        if not np.all(F < 0):
            return math.inf
        return self.log_objective(x) - mu * float(np.log(-F).sum())

    def derivatives(self, x: np.ndarray, mu: float) -> tuple[float, np.ndarray, np.ndarray]:
        v0 = self.obj_A @ x + self.obj_b
        f0 = float(logsumexp(v0))
        pi = np.exp(v0 - f0)
        g0 = self.obj_A.T @ pi
        hess = (self.obj_A.T * pi) @ self.obj_A - np.outer(g0, g0)

        v = self.row_A @ x + self.row_b
        F = row_logsumexp(v, self.starts)
        neg = -F
        p = np.exp(v - F[self.row_of])
        G = np.add.reduceat(p[:, None] * self.row_A, self.starts, axis=0)
        grad = g0 + mu * (G.T @ (1.0 / neg))
        hess += mu * (
            (self.row_A.T * (p / neg[self.row_of])) @ self.row_A
            + (G.T * (1.0 / neg**2 - 1.0 / neg)) @ G
        )
        return f0 - mu * float(np.log(neg).sum()), grad, hess

    def relaxed(self, amount: float) -> _Problem:
        return _Problem(self.obj_A, self.obj_b, self.row_A, self.row_b - amount, self.starts)

    def phase1(self) -> _Problem:
        """Variables (x, s): minimize s subject to F_r(x) - s <= 0."""
        n_terms, n_vars = self.row_A.shape
        row_A = np.hstack([self.row_A, -np.ones((n_terms, 1))])
        obj_A = np.zeros((1, n_vars + 1))
        obj_A[0, -1] = 1.0
        return _Problem(obj_A, np.zeros(1), row_A, self.row_b, self.starts)


@dataclass
class _Reduction:
    """y = P w + q parametrises the affine equalities; w = y[free]."""

    P: np.ndarray
    q: np.ndarray
    free: list[int]
    problem: _Problem


def _eliminate(eq_A: np.ndarray, eq_b: np.ndarray, n_vars: int) -> tuple[np.ndarray, np.ndarray, list[int]] | None:
    P = np.eye(n_vars)
    q = np.zeros(n_vars)
    free = list(range(n_vars))
    for a, rhs in zip(eq_A, eq_b):
        c = a @ P
        r = rhs - a @ q
        if not np.any(np.abs(c) > 1e-12):
            if abs(r) > 1e-9:
                return None
            continue
        # largest coefficient, first index on ties
        p = int(np.argmax(np.abs(c)))
        keep = [j for j in range(c.size) if j != p]
        q = q + P[:, p] * (r / c[p])
        P = P[:, keep] - np.outer(P[:, p], c[keep] / c[p])
        free.pop(p)
    return P, q, free


def _reduce(lcp: LogConvexProgram, settings: SolverSettings) -> _Reduction | None:
    eliminated = _eliminate(lcp.eq_A, lcp.eq_b, lcp.n_vars)
    if eliminated is None:
        return None
    P, q, free = eliminated
    bound = settings.log_bound
    n_terms = lcp.ineq_b.size
    row_A = np.vstack([lcp.ineq_A @ P, P, -P])
    row_b = np.concatenate([lcp.ineq_b + lcp.ineq_A @ q, q - bound, -q - bound])
    starts = np.concatenate([lcp.ineq_starts, n_terms + np.arange(2 * lcp.n_vars)]).astype(int)
    problem = _Problem(
        obj_A=lcp.objective_A @ P,
        obj_b=lcp.objective_b + lcp.objective_A @ q,
        row_A=row_A,
        row_b=row_b,
        starts=starts,
    )
    return _Reduction(P, q, free, problem)


def _initial_point(lcp: LogConvexProgram, reduction: _Reduction) -> np.ndarray:
    if lcp.y0 is None:
        return np.zeros(len(reduction.free))
    return np.clip(np.asarray(lcp.y0, dtype=float)[reduction.free], -30.0, 30.0)


def _point_map(lcp: LogConvexProgram, reduction: _Reduction, w: np.ndarray) -> dict[str, float]:
    y = reduction.P @ w + reduction.q
    return {name: float(math.exp(v)) for name, v in zip(lcp.variable_names, y)}


# =============================================================================
# Barrier method
# =============================================================================


@dataclass
class _Centering:
    x: np.ndarray
    iterations: int
    decrement: float
    state: str  # "converged", "stalled", "max_iterations"


def _newton_direction(hess: np.ndarray, grad: np.ndarray) -> np.ndarray:
    # Hessians turn near-singular close to the optimum
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        try:
            return scipy.linalg.solve(hess, -grad, assume_a="pos", check_finite=False)
        except (np.linalg.LinAlgError, ValueError):
            return np.linalg.lstsq(hess, -grad, rcond=None)[0]


def _center(problem: _Problem, x: np.ndarray, mu: float, settings: SolverSettings) -> _Centering:
    stop = settings.tolerance / 10
    decrement = math.inf
    for k in range(settings.max_iterations):
        phi, grad, hess = problem.derivatives(x, mu)
        dx = _newton_direction(hess, grad)
        decrement = float(-grad @ dx)
        if not math.isfinite(decrement) or decrement <= 0:
            return _Centering(x, k, 0.0, "stalled")
        if decrement / 2 <= stop:
            return _Centering(x, k, decrement, "converged")

        slack = 1e-13 * (1 + abs(phi))
        step = 1.0
        while True:
            trial = x + step * dx
            phi_trial = problem.merit(trial, mu)
            if phi_trial <= phi - 0.25 * step * decrement + slack:
                break
            step *= 0.5
            if step < 1e-14:
                return _Centering(x, k, decrement, "stalled")
        x = trial
        if phi - phi_trial <= 1e-15 * (1 + abs(phi)):
            return _Centering(x, k + 1, decrement, "stalled")
    return _Centering(x, settings.max_iterations, decrement, "max_iterations")


@dataclass
class _BarrierRun:
    x: np.ndarray
    iterations: int
    gap: float
    decrement: float
    state: str  # "converged", "stopped", "max_iterations"
    trace: list[float]


def _minimize(
    problem: _Problem,
    x0: np.ndarray,
    settings: SolverSettings,
    *,
    label: str,
    stop_when: Callable[[np.ndarray, float], bool] | None = None,
    report: Callable[[np.ndarray], float] | None = None,
) -> _BarrierRun:
    logger = get_logger()
    m = problem.n_rows
    mu = 1.0
    x = x0
    total = 0
    trace: list[float] = []
    outer = 0
    while True:
        centered = _center(problem, x, mu, settings)
        x = centered.x
        total += centered.iterations
        gap = m * mu
        objective = report(x) if report else problem.log_objective(x)
        trace.append(objective)
        outer += 1
        logger.debug(
            "barrier iteration",
            component="gpsolve",
            action=label,
            iteration=outer,
            newton_steps=total,
            objective=objective,
            gap=gap,
            residual=centered.decrement,
        )
        if centered.state == "max_iterations":
            return _BarrierRun(x, total, gap, centered.decrement, "max_iterations", trace)
        if stop_when is not None and stop_when(x, gap):
            return _BarrierRun(x, total, gap, centered.decrement, "stopped", trace)
        if gap < settings.tolerance:
            return _BarrierRun(x, total, gap, centered.decrement, "converged", trace)
        if centered.state == "stalled" and gap <= settings.stall_tolerance:
            return _BarrierRun(x, total, gap, centered.decrement, "converged", trace)
        mu /= settings.barrier_decrease


def _max_row(problem: _Problem, x: np.ndarray) -> float:
    F = problem.rows(x)
    return float(F.max()) if F.size else -math.inf


@dataclass
class _Phase1:
    feasible: bool
    slack: float
    w: np.ndarray
    iterations: int
    converged: bool


def _phase1(problem: _Problem, w0: np.ndarray, settings: SolverSettings) -> _Phase1:
    start_slack = _max_row(problem, w0)
    if start_slack < 0:
        return _Phase1(True, start_slack, w0, 0, True)

    aux = problem.phase1()
    x0 = np.append(w0, start_slack + 1.0)
    threshold = settings.feasibility_threshold

    def decided(x: np.ndarray, gap: float) -> bool:
        s = x[-1]
        return s < -_FEASIBLE_MARGIN or s - gap > threshold

    run = _minimize(aux, x0, settings, label="phase1", stop_when=decided)
    w = run.x[:-1]
    slack = _max_row(problem, w)
    if run.state == "max_iterations":
        return _Phase1(slack < 0, slack, w, run.iterations, False)
    return _Phase1(slack <= threshold, slack, w, run.iterations, True)


# =============================================================================
# Public API
# =============================================================================


def phase1_feasibility(lcp: LogConvexProgram, settings: SolverSettings | None = None) -> FeasibilityReport:
    """
    Decide whether the program has a feasible point.

    Minimizes a slack s bounding every row's log-sum-exp value, subject to the
    equalities. Feasible iff the minimal slack is at most
    settings.feasibility_threshold. When feasible, `point` is a starting point
    for solve (strictly feasible whenever the slack is negative).
    """
    settings = settings or SolverSettings()
    reduction = _reduce(lcp, settings)
    if reduction is None:
        return FeasibilityReport(False, math.inf)
    w0 = _initial_point(lcp, reduction)
    if w0.size == 0:
        slack = _max_row(reduction.problem, w0)
        feasible = slack <= settings.feasibility_threshold
        return FeasibilityReport(feasible, slack, _point_map(lcp, reduction, w0) if feasible else None)

    result = _phase1(reduction.problem, w0, settings)
    point = _point_map(lcp, reduction, result.w) if result.feasible else None
    return FeasibilityReport(result.feasible, result.slack, point, result.iterations, result.converged)


def solve(lcp: LogConvexProgram, settings: SolverSettings | None = None) -> Solution:
    """
    Minimize the GP objective.

    Returns OPTIMAL with the optimal value, INFEASIBLE when phase 1 certifies
    an empty feasible set, or MAX_ITERATIONS with the best iterate when a
    centering pass does not converge.
    """
    settings = settings or SolverSettings()
    logger = get_logger()
    reduction = _reduce(lcp, settings)
    if reduction is None:
        logger.debug("inconsistent equalities", component="gpsolve", action="solve")
        return Solution(SolveStatus.INFEASIBLE, math.inf)

    problem = reduction.problem
    w = _initial_point(lcp, reduction)
    iterations = 0

    if w.size == 0:
        slack = _max_row(problem, w)
        if slack > settings.feasibility_threshold:
            return Solution(SolveStatus.INFEASIBLE, math.inf)
        y = reduction.q
        return Solution(SolveStatus.OPTIMAL, lcp.objective_value(y), _point_map(lcp, reduction, w), 0.0)

    start = _phase1(problem, w, settings)
    iterations += start.iterations
    if not start.converged and not start.feasible:
        return Solution(
            SolveStatus.MAX_ITERATIONS,
            math.inf,
            _point_map(lcp, reduction, start.w),
            iterations=iterations,
        )
    if not start.feasible:
        logger.debug(
            "phase 1 certified infeasibility",
            component="gpsolve",
            action="solve",
            slack=start.slack,
        )
        return Solution(SolveStatus.INFEASIBLE, math.inf, iterations=iterations)

    w = start.w
    relaxation = 0.0
    if start.slack >= 0:
        # weakly feasible: widen every row by the residual slack
        relaxation = start.slack + _RELAX_MARGIN
        problem = problem.relaxed(relaxation)
        logger.debug(
            "weakly feasible program relaxed",
            component="gpsolve",
            action="solve",
            relaxation=relaxation,
        )

    if lcp.objective_b.size == 0:
        return Solution(
            SolveStatus.OPTIMAL,
            0.0,
            _point_map(lcp, reduction, w),
            0.0,
            iterations,
            (0.0,),
            relaxation,
        )

    def value_at(x: np.ndarray) -> float:
        return lcp.objective_value(reduction.P @ x + reduction.q)

    run = _minimize(problem, w, settings, label="solve", report=value_at)
    iterations += run.iterations
    status = SolveStatus.MAX_ITERATIONS if run.state == "max_iterations" else SolveStatus.OPTIMAL
    return Solution(
        status=status,
        value=value_at(run.x),
        point=_point_map(lcp, reduction, run.x),
        kkt_residual=run.gap + run.decrement,
        iterations=iterations,
        trace=tuple(run.trace),
        relaxation=relaxation,
    )
