"""
Geometric program construction for gpbound.

Builds the two posynomial programs whose optimal values give the lower
bounds: the unconstrained program (bound on all of R^n) and the ball
program (bound on {sum x_i^(2d) <= M}), and convexifies either one by the
substitution v = exp(y).

Monomial coefficients are carried as natural logarithms: the terms
(f_alpha / 2d)^(2d) * alpha^alpha span hundreds of decades for large 2d.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any

import numpy as np
from scipy.special import logsumexp

from gpbound.polyring import Exponent, SupportSets
from gpbound.validation import ensure, positive


@dataclass(frozen=True)
class GpVariable:
    """A positive GP variable: z[alpha][i] or u[i]."""

    name: str
    kind: str
    index: int
    alpha: Exponent | None = None


@dataclass(frozen=True)
class GpMonomial:
    """c * prod v_j^(a_j) with c = exp(log_coefficient) > 0."""

    log_coefficient: float
    exponents: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self):
        if not math.isfinite(self.log_coefficient):
            raise ValueError("Monomial coefficient must be positive and finite")
        object.__setattr__(self, "exponents", MappingProxyType(dict(self.exponents)))

    @property
    def coefficient(self) -> float:
        return math.exp(self.log_coefficient)

    def log_value(self, log_point: Sequence[float]) -> float:
        return self.log_coefficient + sum(a * log_point[j] for j, a in self.exponents.items())

    def value(self, point: Sequence[float]) -> float:
        return math.exp(self.log_value([math.log(v) for v in point]))


Posynomial = tuple[GpMonomial, ...]


@dataclass(frozen=True)
class PreInfeasible:
    """Sign pre-check failure: the unconstrained program has no feasible point."""

    variable: int
    reason: str


@dataclass(frozen=True)
class GeometricProgram:
    """
    minimize objective(v) s.t. each inequality posynomial <= 1, each equality monomial = 1.

    Variables are referenced by their position in `variables`. `start` is an
    optional positive initial point in the same order.
    """

    variables: tuple[GpVariable, ...]
    objective: Posynomial
    inequalities: tuple[Posynomial, ...]
    equalities: tuple[GpMonomial, ...]
    start: tuple[float, ...] | None = None
    label: str = "gp"

    def __post_init__(self):
        n_vars = len(self.variables)
        monomials = [*self.objective, *self.equalities]
        monomials.extend(m for row in self.inequalities for m in row)
        for monomial in monomials:
            if any(j < 0 or j >= n_vars for j in monomial.exponents):
                raise ValueError("Monomial references an unknown variable")
        if any(len(row) == 0 for row in self.inequalities):
            raise ValueError("Inequality rows must contain at least one term")

    @property
    def variable_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def index_of(self, name: str) -> int:
        return self.variable_names.index(name)

    @staticmethod
    def posynomial_value(posy: Posynomial, point: Sequence[float]) -> float:
        return sum(m.value(point) for m in posy)

    def objective_value(self, point: Sequence[float]) -> float:
        return self.posynomial_value(self.objective, point)

    def inequality_values(self, point: Sequence[float]) -> list[float]:
        return [self.posynomial_value(row, point) for row in self.inequalities]

    def equality_values(self, point: Sequence[float]) -> list[float]:
        return [m.value(point) for m in self.equalities]

    def is_feasible(self, point: Sequence[float], tol: float = 1e-9) -> bool:
        if any(v <= 0 for v in point):
            return False
        if any(g > 1 + tol for g in self.inequality_values(point)):
            return False
        return all(abs(h - 1) <= tol for h in self.equality_values(point))

    def to_dict(self) -> dict[str, Any]:
        """JSON debug form (CLI --dump-gp)."""
        names = self.variable_names

        def monomial(m: GpMonomial) -> dict[str, Any]:
            return {
                "coefficient": m.coefficient if m.log_coefficient < 700 else None,
                "log_coefficient": m.log_coefficient,
                "exponents": {names[j]: a for j, a in m.exponents.items()},
            }

        return {
            "label": self.label,
            "variables": list(names),
            "objective": [monomial(m) for m in self.objective],
            "inequalities": [[monomial(m) for m in row] for row in self.inequalities],
            "equalities": [monomial(m) for m in self.equalities],
        }


# =============================================================================
# Program construction
# =============================================================================


def variable_name(kind: str, index: int, alpha: Exponent | None = None) -> str:
    if kind == "u":
        return f"u[{index}]"
    label = ",".join(str(e) for e in alpha or ())
    return f"z[{label}][{index}]"


def _z_variables(s: SupportSets) -> tuple[list[GpVariable], dict[tuple[Exponent, int], int]]:
    variables: list[GpVariable] = []
    index: dict[tuple[Exponent, int], int] = {}
    for alpha in s.delta:
        for i, e in enumerate(alpha):
            if e > 0:
                index[(alpha, i)] = len(variables)
                variables.append(GpVariable(variable_name("z", i, alpha), "z", i, alpha))
    return variables, index


def log_alpha_power(alpha: Exponent) -> float:
    """log(alpha^alpha) with 0^0 = 1."""
    return sum(e * math.log(e) for e in alpha if e > 0)


def _objective_terms(
    s: SupportSets, z_index: dict[tuple[Exponent, int], int]
) -> list[GpMonomial]:
    """(2d-|a|) [ (|f_a|/2d)^2d a^a / z_a^a ]^(1/(2d-|a|)) for a in Delta^{<2d}."""
    two_d = s.two_d
    terms = []
    for alpha in s.delta_lt:
        gap = two_d - sum(alpha)
        log_inner = two_d * math.log(abs(s.coefficients[alpha]) / two_d) + log_alpha_power(alpha)
        exponents = {z_index[(alpha, i)]: -e / gap for i, e in enumerate(alpha) if e > 0}
        terms.append(GpMonomial(math.log(gap) + log_inner / gap, exponents))
    return terms


def _equality_terms(
    s: SupportSets, z_index: dict[tuple[Exponent, int], int]
) -> list[GpMonomial]:
    """(2d/|f_a|)^2d (z_a/a)^a = 1 for a in Delta with |a| = 2d."""
    two_d = s.two_d
    rows = []
    for alpha in s.delta:
        if sum(alpha) != two_d:
            continue
        log_c = two_d * math.log(two_d / abs(s.coefficients[alpha])) - log_alpha_power(alpha)
        exponents = {z_index[(alpha, i)]: float(e) for i, e in enumerate(alpha) if e > 0}
        rows.append(GpMonomial(log_c, exponents))
    return rows


def pre_infeasibility(s: SupportSets) -> PreInfeasible | None:
    """Sign check making the unconstrained program infeasible before any solve."""
    for i, fi in enumerate(s.diagonal):
        if fi < 0:
            return PreInfeasible(i, f"diagonal coefficient of x{i} is negative ({fi})")
        if fi == 0 and s.touched(i):
            return PreInfeasible(i, f"x{i} appears in a non-square term but x{i}^(2d) is absent")
    return None


def build_unconstrained_gp(s: SupportSets, two_d: int | None = None) -> GeometricProgram | PreInfeasible:
    """
    Program for the global bound f(0) - rho.

    Returns PreInfeasible when some diagonal coefficient is negative, or is
    zero while the corresponding variable occurs in Delta(f).
    """
    if two_d is not None and two_d != s.two_d:
        raise ValueError(f"two_d={two_d} does not match the support sets (2d={s.two_d})")
    blocked = pre_infeasibility(s)
    if blocked is not None:
        return blocked

    variables, z_index = _z_variables(s)
    inequalities: list[Posynomial] = []
    for i in range(s.n):
        if not s.touched(i):
            continue
        log_scale = -math.log(s.diagonal[i])
        row = tuple(
            GpMonomial(log_scale, {z_index[(alpha, i)]: 1.0})
            for alpha in s.delta
            if alpha[i] > 0
        )
        inequalities.append(row)

    share = len(s.delta) + 1
    start = tuple(s.diagonal[v.index] / share for v in variables)
    return GeometricProgram(
        variables=tuple(variables),
        objective=tuple(_objective_terms(s, z_index)),
        inequalities=tuple(inequalities),
        equalities=tuple(_equality_terms(s, z_index)),
        start=start,
        label="unconstrained",
    )


def build_ball_gp(s: SupportSets, two_d: int | None, M: float) -> GeometricProgram:
    """
    Program for the ball bound f(0) + M f_{2d,1} - rho_M.

    The diagonal must already be sorted in descending order (relabel the
    variables first). The program is always feasible.
    """
    ensure({"M": (M, [positive()])})
    if two_d is not None and two_d != s.two_d:
        raise ValueError(f"two_d={two_d} does not match the support sets (2d={s.two_d})")
    diag = s.diagonal
    if any(diag[i] < diag[i + 1] for i in range(len(diag) - 1)):
        raise ValueError("Diagonal coefficients must be sorted in descending order")

    variables, z_index = _z_variables(s)
    u_index = []
    for i in range(s.n):
        u_index.append(len(variables))
        variables.append(GpVariable(variable_name("u", i), "u", i))

    objective = [GpMonomial(math.log(M), {u_index[0]: 1.0}), *_objective_terms(s, z_index)]

    inequalities: list[Posynomial] = []
    for i in range(s.n):
        row = tuple(
            GpMonomial(0.0, {z_index[(alpha, i)]: 1.0, u_index[i]: -1.0})
            for alpha in s.delta
            if alpha[i] > 0
        )
        if row:
            inequalities.append(row)
    if diag[0] > 0:
        inequalities.append((GpMonomial(math.log(diag[0]), {u_index[0]: -1.0}),))
    for i in range(1, s.n):
        row = [GpMonomial(0.0, {u_index[i]: 1.0, u_index[i - 1]: -1.0})]
        step = diag[i - 1] - diag[i]
        if step > 0:
            row.append(GpMonomial(math.log(step), {u_index[i - 1]: -1.0}))
        inequalities.append(tuple(row))

    # u_i - f_{2d,i} decreases strictly in i, so (*) and (**) start strictly inside
    lambda0 = max(0.0, -diag[-1])
    u_start = [diag[i] + lambda0 + 1.0 + (s.n - 1 - i) / s.n for i in range(s.n)]
    share = len(s.delta) + 1
    start = [u_start[v.index] / share for v in variables if v.kind == "z"] + u_start

    return GeometricProgram(
        variables=tuple(variables),
        objective=tuple(objective),
        inequalities=tuple(inequalities),
        equalities=tuple(_equality_terms(s, z_index)),
        start=tuple(start),
        label="ball",
    )


# =============================================================================
# Log transform
# =============================================================================


def row_logsumexp(values: np.ndarray, starts: np.ndarray) -> np.ndarray:
    """Per-row log-sum-exp over contiguous segments, with max subtraction."""
    if values.size == 0:
        return np.zeros(0)
    peaks = np.maximum.reduceat(values, starts)
    counts = np.diff(np.append(starts, values.size))
    shifted = np.exp(values - np.repeat(peaks, counts))
    return peaks + np.log(np.add.reduceat(shifted, starts))


@dataclass(frozen=True, eq=False)
class LogConvexProgram:
    """
    GP after v = exp(y).

    objective:   sum_k exp(objective_A[k] . y + objective_b[k])
    inequality:  for each row r, log sum_{k in r} exp(ineq_A[k] . y + ineq_b[k]) <= 0
    equality:    eq_A . y = eq_b

    Inequality terms are stored row-contiguously; `ineq_starts[r]` is the first
    term of row r.
    """

    variable_names: tuple[str, ...]
    objective_A: np.ndarray
    objective_b: np.ndarray
    ineq_A: np.ndarray
    ineq_b: np.ndarray
    ineq_starts: np.ndarray
    eq_A: np.ndarray
    eq_b: np.ndarray
    y0: np.ndarray | None = None

    @property
    def n_vars(self) -> int:
        return len(self.variable_names)

    @property
    def n_rows(self) -> int:
        return int(self.ineq_starts.size)

    def log_objective(self, y: np.ndarray) -> float:
        if self.objective_b.size == 0:
            return -math.inf
        return float(logsumexp(self.objective_A @ y + self.objective_b))

    def objective_value(self, y: np.ndarray) -> float:
        if self.objective_b.size == 0:
            return 0.0
        return float(np.exp(self.objective_A @ y + self.objective_b).sum())

    def inequality_values(self, y: np.ndarray) -> np.ndarray:
        return row_logsumexp(self.ineq_A @ y + self.ineq_b, self.ineq_starts)

    def equality_residuals(self, y: np.ndarray) -> np.ndarray:
        return self.eq_A @ y - self.eq_b

    def to_dict(self) -> dict[str, Any]:
        return {
            "variables": list(self.variable_names),
            "objective": {"A": self.objective_A.tolist(), "b": self.objective_b.tolist()},
            "inequalities": {
                "A": self.ineq_A.tolist(),
                "b": self.ineq_b.tolist(),
                "row_starts": self.ineq_starts.tolist(),
            },
            "equalities": {"A": self.eq_A.tolist(), "b": self.eq_b.tolist()},
        }


def _monomial_rows(monomials: Sequence[GpMonomial], n_vars: int) -> tuple[np.ndarray, np.ndarray]:
    A = np.zeros((len(monomials), n_vars))
    b = np.zeros(len(monomials))
    for k, m in enumerate(monomials):
        for j, a in m.exponents.items():
            A[k, j] = a
        b[k] = m.log_coefficient
    return A, b


def log_transform(gp: GeometricProgram) -> LogConvexProgram:
    """Substitute v = exp(y): monomials become exp(a.y + log c), equalities a.y = -log c."""
    n_vars = len(gp.variables)
    objective_A, objective_b = _monomial_rows(gp.objective, n_vars)
    flat = [m for row in gp.inequalities for m in row]
    ineq_A, ineq_b = _monomial_rows(flat, n_vars)
    lengths = [len(row) for row in gp.inequalities]
    starts = np.cumsum([0, *lengths[:-1]]).astype(int) if lengths else np.zeros(0, dtype=int)
    eq_A, eq_log_c = _monomial_rows(gp.equalities, n_vars)
    y0 = None if gp.start is None else np.log(np.asarray(gp.start, dtype=float))
    return LogConvexProgram(
        variable_names=gp.variable_names,
        objective_A=objective_A,
        objective_b=objective_b,
        ineq_A=ineq_A,
        ineq_b=ineq_b,
        ineq_starts=starts,
        eq_A=eq_A,
        eq_b=-eq_log_c,
        y0=y0,
    )
