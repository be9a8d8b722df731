"""
Tests for geometric program construction and the log transform.
"""

from __future__ import annotations

import math
from collections import Counter

import numpy as np
import pytest

from gpbound.gpmodel import (
    GeometricProgram,
    GpMonomial,
    GpVariable,
    PreInfeasible,
    build_ball_gp,
    build_unconstrained_gp,
    log_alpha_power,
    log_transform,
    row_logsumexp,
    variable_name,
)
from gpbound.gpsolve import solve
from gpbound.polyring import parse_polynomial, permute_variables, support_sets

SIX_ROOT_THREE = 6 * math.sqrt(3)


def _signature(gp: GeometricProgram, rename=None) -> tuple[Counter, Counter, Counter]:
    """Objective terms, rows and equalities keyed by variable name, up to term order."""
    names = [rename(v) if rename else v.name for v in gp.variables]

    def monomial(m: GpMonomial) -> tuple[float, frozenset]:
        return round(m.log_coefficient, 9), frozenset((names[j], a) for j, a in m.exponents.items())

    return (
        Counter(monomial(m) for m in gp.objective),
        Counter(frozenset(monomial(m) for m in row) for row in gp.inequalities),
        Counter(monomial(m) for m in gp.equalities),
    )


class TestGpMonomial:
    """Tests for log-coefficient monomials."""

    @pytest.mark.unit
    def test_value(self):
        m = GpMonomial(math.log(3.0), {0: 2.0, 1: -1.0})
        assert m.coefficient == pytest.approx(3.0)
        assert m.value([2.0, 4.0]) == pytest.approx(3.0)

    @pytest.mark.unit
    def test_non_finite_coefficient_rejected(self):
        with pytest.raises(ValueError):
            GpMonomial(math.inf)

    @pytest.mark.unit
    def test_exponents_are_read_only(self):
        m = GpMonomial(0.0, {0: 1.0})
        with pytest.raises(TypeError):
            m.exponents[0] = 2.0  # type: ignore[index]


class TestGeometricProgram:
    """Tests for the GeometricProgram container."""

    @pytest.mark.unit
    def test_unknown_variable_rejected(self):
        with pytest.raises(ValueError, match="unknown variable"):
            GeometricProgram(
                variables=(GpVariable("u[0]", "u", 0),),
                objective=(GpMonomial(0.0, {1: 1.0}),),
                inequalities=(),
                equalities=(),
            )

    @pytest.mark.unit
    def test_empty_row_rejected(self):
        with pytest.raises(ValueError, match="at least one term"):
            GeometricProgram(
                variables=(GpVariable("u[0]", "u", 0),),
                objective=(GpMonomial(0.0, {0: 1.0}),),
                inequalities=((),),
                equalities=(),
            )

    @pytest.mark.unit
    def test_variable_names(self):
        assert variable_name("u", 3) == "u[3]"
        assert variable_name("z", 1, (3, 1)) == "z[3,1][1]"

    @pytest.mark.unit
    def test_log_alpha_power(self):
        assert log_alpha_power((0, 2)) == pytest.approx(math.log(4.0))
        assert log_alpha_power((3, 1)) == pytest.approx(math.log(27.0))


class TestUnconstrainedProgram:
    """Tests for the program behind f_gp."""

    @pytest.mark.unit
    def test_sextic(self, sextic):
        gp = build_unconstrained_gp(support_sets(sextic))
        assert isinstance(gp, GeometricProgram)
        assert gp.variable_names == ("z[2][0]",)
        (term,) = gp.objective
        assert term.coefficient == pytest.approx(SIX_ROOT_THREE, rel=1e-12)
        assert dict(term.exponents) == {0: -0.5}
        (row,) = gp.inequalities
        assert len(row) == 1
        assert row[0].coefficient == pytest.approx(1.0)
        assert gp.equalities == ()

    @pytest.mark.unit
    def test_sextic_feasibility(self, sextic):
        gp = build_unconstrained_gp(support_sets(sextic))
        assert gp.is_feasible([0.5])
        assert gp.is_feasible([1.0])
        assert not gp.is_feasible([1.5])
        assert gp.objective_value([1.0]) == pytest.approx(SIX_ROOT_THREE)

    @pytest.mark.unit
    def test_start_point(self, sextic):
        gp = build_unconstrained_gp(support_sets(sextic))
        assert gp.start == (0.5,)

    @pytest.mark.unit
    def test_full_degree_term_becomes_equality(self, binary_quartic):
        gp = build_unconstrained_gp(support_sets(binary_quartic))
        assert gp.objective == ()
        assert len(gp.inequalities) == 2
        (eq,) = gp.equalities
        assert sorted(eq.exponents.values()) == [1.0, 3.0]
        assert eq.coefficient == pytest.approx((4 / 6) ** 4 / 27)

    @pytest.mark.unit
    def test_negative_diagonal_is_pre_infeasible(self):
        result = build_unconstrained_gp(support_sets(parse_polynomial("x^4 - y^4 + x")))
        assert isinstance(result, PreInfeasible)
        assert result.variable == 1
        assert "negative" in result.reason

    @pytest.mark.unit
    def test_touched_zero_diagonal_is_pre_infeasible(self):
        result = build_unconstrained_gp(support_sets(parse_polynomial("x^4 + x*y^2")))
        assert isinstance(result, PreInfeasible)
        assert result.variable == 1

    @pytest.mark.unit
    def test_untouched_zero_diagonal_is_fine(self):
        gp = build_unconstrained_gp(support_sets(parse_polynomial("x^4 + y^2 - x")))
        assert isinstance(gp, GeometricProgram)
        assert len(gp.inequalities) == 1

    @pytest.mark.unit
    def test_two_d_mismatch(self, sextic):
        with pytest.raises(ValueError, match="does not match"):
            build_unconstrained_gp(support_sets(sextic), two_d=8)

    @pytest.mark.unit
    @pytest.mark.parametrize("perm", [[2, 0, 3, 1], [3, 2, 1, 0]])
    def test_permutation_covariance(self, weighted_sextic, four_var_sextic, perm):
        def rename(v):
            alpha = None
            if v.alpha is not None:
                beta = [0] * len(perm)
                for i, e in enumerate(v.alpha):
                    beta[perm[i]] = e
                alpha = tuple(beta)
            return variable_name(v.kind, perm[v.index], alpha)

        for p in (weighted_sextic, four_var_sextic):
            gp = build_unconstrained_gp(support_sets(p))
            permuted = build_unconstrained_gp(support_sets(permute_variables(p, perm)))
            assert _signature(permuted) == _signature(gp, rename)

    @pytest.mark.unit
    def test_high_degree_program(self, high_degree):
        s = support_sets(high_degree)
        gp = build_ball_gp(s, None, 1.0)
        assert all(math.isfinite(m.log_coefficient) for m in gp.objective)
        assert len(gp.objective) == 1 + len(s.delta_lt) == 6


class TestBallProgram:
    """Tests for the program behind f_gp_ball."""

    @pytest.mark.unit
    def test_sextic(self, sextic):
        gp = build_ball_gp(support_sets(sextic), None, 1.0)
        assert gp.variable_names == ("z[2][0]", "u[0]")
        m_term, delta_term = gp.objective
        assert m_term.coefficient == pytest.approx(1.0)
        assert dict(m_term.exponents) == {1: 1.0}
        assert delta_term.coefficient == pytest.approx(SIX_ROOT_THREE)
        # z/u0 <= 1 and f_{2d,1}/u0 <= 1
        assert len(gp.inequalities) == 2
        assert gp.objective_value([3.0, 3.0]) == pytest.approx(9.0)
        assert gp.is_feasible([3.0, 3.0])

    @pytest.mark.unit
    def test_radius_scales_u0_term(self, sextic):
        gp = build_ball_gp(support_sets(sextic), None, 10.0)
        assert gp.objective[0].coefficient == pytest.approx(10.0)

    @pytest.mark.unit
    def test_chain_rows(self, weighted_sextic):
        gp = build_ball_gp(support_sets(weighted_sextic), None, 1.0)
        u = [gp.index_of(variable_name("u", i)) for i in range(4)]
        for i, row in enumerate(gp.inequalities[-3:], start=1):
            ratio, step = row
            assert dict(ratio.exponents) == {u[i]: 1.0, u[i - 1]: -1.0}
            assert ratio.coefficient == pytest.approx(1.0)
            assert dict(step.exponents) == {u[i - 1]: -1.0}
            assert step.coefficient == pytest.approx(2.0)

    @pytest.mark.unit
    def test_star_row_present_only_for_positive_leading_coefficient(self, sextic, no_diagonal_octic):
        with_star = build_ball_gp(support_sets(sextic), None, 1.0)
        singles = [row for row in with_star.inequalities if len(row) == 1 and len(row[0].exponents) == 1]
        assert len(singles) == 1
        without = build_ball_gp(support_sets(no_diagonal_octic), None, 1.0)
        u_only = [
            row
            for row in without.inequalities
            if all(without.variables[j].kind == "u" for m in row for j in m.exponents)
        ]
        # zero diagonal: only u_i/u_{i-1} <= 1 chain rows remain
        assert len(u_only) == 2
        assert all(len(row) == 1 for row in u_only)

    @pytest.mark.unit
    def test_start_point_strictly_feasible(self, weighted_sextic, four_var_sextic, no_diagonal_octic):
        for p in (weighted_sextic, four_var_sextic, no_diagonal_octic):
            gp = build_ball_gp(support_sets(p), None, 10.0)
            assert all(g < 1 for g in gp.inequality_values(gp.start))

    @pytest.mark.unit
    def test_repair_keeps_feasibility_and_objective(self, weighted_sextic):
        s = support_sets(weighted_sextic)
        gp = build_ball_gp(s, None, 10.0)
        optimum = solve(log_transform(gp)).point
        points = [list(gp.start), [optimum[name] for name in gp.variable_names]]
        u = [gp.index_of(variable_name("u", i)) for i in range(s.n)]
        for point in points:
            shift = point[u[0]] - s.diagonal[0]
            repaired = list(point)
            for i in range(s.n):
                repaired[u[i]] = s.diagonal[i] + shift
            assert gp.is_feasible(point, tol=1e-6)
            assert gp.is_feasible(repaired, tol=1e-6)
            assert gp.objective_value(repaired) == pytest.approx(gp.objective_value(point), rel=1e-12)

    @pytest.mark.unit
    @pytest.mark.parametrize("M", [1.0, 10.0, 1e4])
    def test_empty_delta_value(self, M):
        p = parse_polynomial("2x^4 + y^4 + 3")
        gp = build_ball_gp(support_sets(p), None, M)
        assert gp.variable_names == ("u[0]", "u[1]")
        assert solve(log_transform(gp)).value == pytest.approx(2.0 * M, rel=1e-6)

    @pytest.mark.unit
    def test_unsorted_diagonal_rejected(self):
        p = parse_polynomial("x^4 + 2y^4 - x*y")
        with pytest.raises(ValueError, match="descending"):
            build_ball_gp(support_sets(p), None, 1.0)

    @pytest.mark.unit
    def test_radius_must_be_positive(self, sextic):
        with pytest.raises(ValueError, match="M"):
            build_ball_gp(support_sets(sextic), None, 0.0)

    @pytest.mark.unit
    def test_to_dict(self, sextic):
        data = build_ball_gp(support_sets(sextic), None, 1.0).to_dict()
        assert data["label"] == "ball"
        assert data["variables"] == ["z[2][0]", "u[0]"]
        assert data["objective"][0]["exponents"] == {"u[0]": 1.0}


class TestLogTransform:
    """Tests for the v = exp(y) substitution."""

    @pytest.mark.unit
    def test_sextic_unconstrained(self, sextic):
        lcp = log_transform(build_unconstrained_gp(support_sets(sextic)))
        assert lcp.n_vars == 1
        assert lcp.n_rows == 1
        np.testing.assert_allclose(lcp.objective_A, [[-0.5]])
        np.testing.assert_allclose(lcp.objective_b, [math.log(SIX_ROOT_THREE)])
        np.testing.assert_allclose(lcp.y0, [math.log(0.5)])
        assert lcp.objective_value(np.zeros(1)) == pytest.approx(SIX_ROOT_THREE)
        assert lcp.inequality_values(np.zeros(1))[0] == pytest.approx(0.0)

    @pytest.mark.unit
    def test_equalities_become_affine(self, binary_quartic):
        gp = build_unconstrained_gp(support_sets(binary_quartic))
        lcp = log_transform(gp)
        (eq,) = gp.equalities
        np.testing.assert_allclose(lcp.eq_b, [-eq.log_coefficient])
        y = np.zeros(lcp.n_vars)
        assert lcp.equality_residuals(y)[0] == pytest.approx(eq.log_coefficient)

    @pytest.mark.unit
    def test_values_match_gp(self, four_var_sextic):
        gp = build_ball_gp(support_sets(four_var_sextic), None, 10.0)
        lcp = log_transform(gp)
        y = np.log(np.asarray(gp.start))
        assert lcp.objective_value(y) == pytest.approx(gp.objective_value(gp.start), rel=1e-10)
        np.testing.assert_allclose(
            np.exp(lcp.inequality_values(y)), gp.inequality_values(gp.start), rtol=1e-10
        )

    @pytest.mark.unit
    def test_row_logsumexp(self):
        values = np.array([0.0, 0.0, math.log(2.0), 800.0, 800.0])
        out = row_logsumexp(values, np.array([0, 2, 3]))
        np.testing.assert_allclose(out, [math.log(2.0), math.log(2.0), 800.0 + math.log(2.0)])

    @pytest.mark.unit
    def test_row_logsumexp_empty(self):
        assert row_logsumexp(np.zeros(0), np.zeros(0, dtype=int)).size == 0
