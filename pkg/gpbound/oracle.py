"""
Independent checks of the GP bounds.

- sample_ball_check: evaluate f at random points of the ball and report any
  value below a claimed lower bound.
- exact_min_small: ground-truth minima for one and two variables.
- lambda_profile / lambda_sweep: the Lagrangian lower envelope
  G(lambda) = f_gp(f - lambda (M - sum x_i^(2d))) and its maximum over a grid.
"""

from __future__ import annotations

import contextvars
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, NamedTuple

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import brentq

from gpbound.bounds import f_gp, lagrangian
from gpbound.logging import get_logger
from gpbound.polyring import Polynomial, evaluate_many, support_sets
from gpbound.validation import at_least, custom, ensure, integer, nonnegative, positive

_SAMPLE_BATCH = 4096
_MAX_ATTEMPT_FACTOR = 1000
_GRID_1D = 20001
_GRID_2D = 201
_ZOOM_TOL = 1e-6


@dataclass(frozen=True)
class Violation:
    point: tuple[float, ...]
    value: float
    margin: float


@dataclass(frozen=True)
class ViolationReport:
    """
    Outcome of a sampling check.

    `min_observed` is the smallest sampled value of f, an upper bound on the
    minimum over the ball.
    """

    samples: int
    violations: tuple[Violation, ...]
    min_observed: float
    bound: float
    M: float
    seed: int

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict[str, Any]:
        return {
            "samples": self.samples,
            "violations": [
                {"point": list(v.point), "value": v.value, "margin": v.margin} for v in self.violations
            ],
            "min_observed": self.min_observed,
            "bound": self.bound if math.isfinite(self.bound) else "neg_inf",
            "M": self.M,
            "seed": self.seed,
        }


def _ball_points(n: int, two_d: int, M: float, count: int, rng: np.random.Generator) -> np.ndarray:
    radius = M ** (1.0 / two_d)
    accepted: list[np.ndarray] = []
    total = 0
    attempts = 0
    while total < count and attempts < _MAX_ATTEMPT_FACTOR * count:
        batch = max(_SAMPLE_BATCH, 2 * (count - total))
        X = rng.uniform(-radius, radius, size=(batch, n))
        attempts += batch
        inside = X[(X**two_d).sum(axis=1) <= M]
        accepted.append(inside[: count - total])
        total += accepted[-1].shape[0]
    return np.vstack(accepted) if accepted else np.zeros((0, n))


def sample_ball_check(
    p: Polynomial,
    M: float,
    bound: float,
    samples: int = 10_000,
    seed: int = 0,
) -> ViolationReport:
    """
    Evaluate f at uniform points of [-M^(1/2d), M^(1/2d)]^n inside the ball.

    A point violates the bound when f(x) < bound - 1e-9 (1 + |bound|).
    Rejection stops after 1000 * samples draws; a shortfall is logged as a
    warning and `samples` in the report counts the points actually drawn.
    Deterministic for a given seed.
    """
    ensure({"M": (M, [positive()]), "samples": (samples, [integer(), at_least(1)])})
    rng = np.random.default_rng(seed)
    X = _ball_points(p.n, p.two_d, float(M), int(samples), rng)
    if X.shape[0] < samples:
        get_logger().warning(
            "rejection sampling gave fewer ball points than requested",
            component="oracle",
            action="sample_ball_check",
            requested=int(samples),
            drawn=int(X.shape[0]),
            M=M,
        )
    values = evaluate_many(p, X)

    violations: list[Violation] = []
    if math.isfinite(bound):
        slack = 1e-9 * (1 + abs(bound))
        for k in np.flatnonzero(values < bound - slack):
            violations.append(
                Violation(tuple(float(v) for v in X[k]), float(values[k]), float(bound - values[k]))
            )
    min_observed = float(values.min()) if values.size else math.inf
    if violations:
        get_logger().warning(
            "sampled values below the claimed bound",
            component="oracle",
            action="sample_ball_check",
            violations=len(violations),
            bound=bound,
            min_observed=min_observed,
        )
    return ViolationReport(int(X.shape[0]), tuple(violations), min_observed, float(bound), float(M), seed)


# =============================================================================
# Exact minima for n <= 2
# =============================================================================


def _univariate_coefficients(p: Polynomial) -> np.ndarray:
    coeffs = np.zeros(max(p.degree, 0) + 1)
    for (k,), c in p.terms.items():
        coeffs[k] = c
    return coeffs


def _critical_points(coeffs: np.ndarray, lo: float, hi: float) -> list[float]:
    """Zeros of f' in [lo, hi]: sign changes on a grid refined by bisection, plus polynomial roots."""
    deriv = npoly.polyder(coeffs)
    if deriv.size == 0 or not np.any(deriv):
        return []
    xs = np.linspace(lo, hi, _GRID_1D)
    ds = npoly.polyval(xs, deriv)
    points = [float(x) for x in xs[ds == 0]]
    for k in np.flatnonzero(np.sign(ds[:-1]) * np.sign(ds[1:]) < 0):
        points.append(
            brentq(lambda x: npoly.polyval(x, deriv), xs[k], xs[k + 1], xtol=1e-10, rtol=1e-14)
        )
    for root in np.roots(deriv[::-1]):
        if abs(root.imag) <= 1e-9 and lo <= root.real <= hi:
            points.append(float(root.real))
    return points


def _exact_min_1d(p: Polynomial, M: float | None) -> float:
    coeffs = _univariate_coefficients(p)
    nonzero = np.flatnonzero(coeffs)
    if nonzero.size == 0:
        return 0.0
    if M is None:
        lead = int(nonzero[-1])
        if lead > 0 and (lead % 2 == 1 or coeffs[lead] < 0):
            return -math.inf
        deriv = npoly.polyder(coeffs)
        d_nonzero = np.flatnonzero(deriv)
        if d_nonzero.size == 0:
            return float(coeffs[0])
        d_lead = int(d_nonzero[-1])
        reach = 1.0 + float(np.max(np.abs(deriv[:d_lead] / deriv[d_lead]))) if d_lead > 0 else 1.0
        candidates = _critical_points(coeffs, -reach, reach) or [0.0]
    else:
        radius = M ** (1.0 / p.two_d)
        candidates = _critical_points(coeffs, -radius, radius) + [-radius, radius]
    return float(np.min(npoly.polyval(np.asarray(candidates), coeffs)))


def _grid_min_2d(p: Polynomial, center: np.ndarray, half: float, M: float | None) -> tuple[float, np.ndarray]:
    best_value = math.inf
    best_point = center
    while True:
        axis = np.linspace(-half, half, _GRID_2D)
        X = np.stack(np.meshgrid(center[0] + axis, center[1] + axis), axis=-1).reshape(-1, 2)
        values = evaluate_many(p, X)
        if M is not None:
            values = np.where((X**p.two_d).sum(axis=1) <= M, values, np.inf)
        k = int(np.argmin(values))
        if values[k] < best_value:
            best_value = float(values[k])
            best_point = X[k]
        if half < _ZOOM_TOL:
            return best_value, best_point
        center = best_point
        half = 4 * half / (_GRID_2D - 1)


def _exact_min_2d(p: Polynomial, M: float | None) -> float:
    if M is not None:
        radius = M ** (1.0 / p.two_d)
        return _grid_min_2d(p, np.zeros(2), radius, M)[0]

    # expanding boxes; a minimiser stuck on the boundary of the largest box means unbounded below
    half = 1.0
    previous = math.inf
    for _ in range(12):
        value, point = _grid_min_2d(p, np.zeros(2), half, None)
        interior = np.max(np.abs(point)) < 0.9 * half
        if interior and abs(value - previous) <= 1e-9 * (1 + abs(value)):
            return value
        previous = value
        half *= 2
    return previous if interior else -math.inf


def exact_min_small(p: Polynomial, M: float | None = None) -> float:
    """
    Global minimum of f (M is None) or its minimum on {sum x_i^(2d) <= M}, for n <= 2.

    One variable: critical points isolated by sign changes of f' and refined
    by bisection to 1e-10, compared with the endpoints of the ball. Two
    variables: grid search zoomed to 1e-6. Returns -inf when f is unbounded below.

    Raises:
        ValueError: n > 2 or M <= 0
    """
    if M is not None:
        ensure({"M": (M, [positive()])})
    if p.n == 1:
        return _exact_min_1d(p, M)
    if p.n == 2:
        return _exact_min_2d(p, M)
    raise ValueError(f"exact_min_small supports n <= 2, got n={p.n}")


# =============================================================================
# Lagrangian sweep
# =============================================================================


class LambdaPoint(NamedTuple):
    lam: float
    value: float  # -inf below lambda_0 or when the program is infeasible


class SweepResult(NamedTuple):
    best_lambda: float
    best_value: float


def _lambda_value(p: Polynomial, M: float, lam: float, lambda0: float) -> LambdaPoint:
    if lam < lambda0:
        return LambdaPoint(lam, -math.inf)
    return LambdaPoint(lam, f_gp(lagrangian(p, lam, M)).extended_value)


def lambda_profile(p: Polynomial, M: float, grid: Sequence[float], jobs: int = 1) -> list[LambdaPoint]:
    """
    G(lambda) = f_gp(f_lambda) for each lambda in grid, in grid order.

    Entries below lambda_0 = max(0, -min_i f_{2d,i}) are -inf without solving.
    With jobs > 1 entries are evaluated on a thread pool under the caller's config.
    """
    grid = [float(lam) for lam in grid]
    ensure(
        {
            "M": (M, [positive()]),
            "grid": (grid, [custom(lambda g: len(g) > 0, "Must not be empty")]),
            "jobs": (jobs, [integer(), at_least(1)]),
        }
    )
    for lam in grid:
        ensure({"lambda": (lam, [nonnegative()])})
    lambda0 = max(0.0, -min(support_sets(p).diagonal))

    if jobs == 1:
        return [_lambda_value(p, M, lam, lambda0) for lam in grid]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [
            pool.submit(contextvars.copy_context().run, _lambda_value, p, M, lam, lambda0)
            for lam in grid
        ]
        return [future.result() for future in futures]


def lambda_sweep(p: Polynomial, M: float, grid: Sequence[float], jobs: int = 1) -> SweepResult:
    """
    Maximize G(lambda) over the grid.

    Every G(lambda) is a lower bound on the minimum over the ball, so the
    result never exceeds f_gp_ball(p, M). Ties keep the first grid entry.
    """
    profile = lambda_profile(p, M, grid, jobs=jobs)
    best = profile[0]
    for point in profile[1:]:
        if point.value > best.value:
            best = point
    return SweepResult(best.lam, best.value)
