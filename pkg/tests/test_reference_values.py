"""
Published bound values for the multivariate reference polynomials.

Each value is matched to relative 2e-3, the precision the values are quoted at.
"""

from __future__ import annotations

import math
import time

import pytest
from scipy.optimize import minimize_scalar

from gpbound.bounds import f_gp, f_gp_ball, lagrangian
from gpbound.oracle import sample_ball_check

RTOL = 2e-3


def _assert_ball_values(p, expected: dict[float, float]) -> list[float]:
    values = []
    for M, value in expected.items():
        bound = f_gp_ball(p, M)
        assert bound.value == pytest.approx(value, rel=RTOL), f"M={M}"
        values.append(bound.value)
    return values


class TestFourVariableSextic:
    """Dense sextic in four variables with a unit diagonal."""

    @pytest.mark.integration
    def test_ball_values(self, four_var_sextic):
        start = time.perf_counter()
        values = _assert_ball_values(
            four_var_sextic, {1.0: -39.022, 10.0: -213.631, 100.0: -1215.730}
        )
        global_bound = f_gp(four_var_sextic).value
        assert global_bound == pytest.approx(-9580211.794, rel=RTOL)
        assert time.perf_counter() - start < 10.0
        assert values == sorted(values, reverse=True)
        assert global_bound <= values[-1]


class TestWeightedSextic:
    """Sextic with diagonal (8, 6, 4, 2)."""

    @pytest.mark.integration
    def test_ball_values(self, weighted_sextic):
        _assert_ball_values(weighted_sextic, {1.0: -6.605, 10.0: -27.151, 100.0: -73.458})

    @pytest.mark.integration
    def test_global_value(self, weighted_sextic):
        assert f_gp(weighted_sextic).value == pytest.approx(-74.971, rel=RTOL)

    @pytest.mark.integration
    def test_ball_bound_is_sound(self, weighted_sextic):
        bound = f_gp_ball(weighted_sextic, 10.0).value
        assert sample_ball_check(weighted_sextic, 10.0, bound, samples=10_000, seed=1).ok


class TestNoDiagonalOctic:
    """Degree 7 polynomial bounded as an octic with zero diagonal."""

    @pytest.mark.integration
    def test_ball_values(self, no_diagonal_octic):
        _assert_ball_values(
            no_diagonal_octic, {1.0: -23.4559, 10.0: -117.9727, 100.0: -736.0259}
        )

    @pytest.mark.integration
    def test_global_is_neg_inf(self, no_diagonal_octic):
        bound = f_gp(no_diagonal_octic)
        assert bound.is_neg_inf
        assert bound.value is None


class TestHighDegree:
    """
    Degree 38 polynomial in four variables bounded with 2d = 40.

    The published values for M = 1 and 10 (-20.0645, -106.4946) sit about 5%
    and 4% away from the optimum of the ball program. A direct maximization of
    the Lagrangian envelope over the multiplier lands on the solver values
    -21.004271430 and -102.624867204, so those are pinned here and the
    published pair is kept as an expected failure.
    """

    @pytest.mark.integration
    def test_ball_values(self, high_degree):
        start = time.perf_counter()
        _assert_ball_values(high_degree, {100.0: -584.027})
        for M in (1.0, 10.0):
            f_gp_ball(high_degree, M)
        assert time.perf_counter() - start < 10.0

    @pytest.mark.integration
    @pytest.mark.xfail(
        strict=True,
        reason="published values for M = 1, 10 disagree with the ball program optimum",
    )
    @pytest.mark.parametrize("M, value", [(1.0, -20.0645), (10.0, -106.4946)])
    def test_published_small_radius_values(self, high_degree, M, value):
        assert f_gp_ball(high_degree, M).value == pytest.approx(value, rel=RTOL)

    @pytest.mark.integration
    @pytest.mark.parametrize("M, value", [(1.0, -21.004271430), (10.0, -102.624867204)])
    def test_small_radius_values(self, high_degree, M, value):
        bound = f_gp_ball(high_degree, M)
        assert bound.value == pytest.approx(value, rel=1e-7)
        dual = f_gp(lagrangian(high_degree, bound.lambda_star, M)).value
        assert dual <= bound.value
        assert dual == pytest.approx(bound.value, rel=1e-6)

    @pytest.mark.integration
    @pytest.mark.slow
    @pytest.mark.parametrize("M", [1.0, 10.0])
    def test_small_radius_values_match_envelope_maximum(self, high_degree, M):
        bound = f_gp_ball(high_degree, M)

        def negated_envelope(lam: float) -> float:
            return -f_gp(lagrangian(high_degree, lam, M)).value

        lam = bound.lambda_star
        result = minimize_scalar(
            negated_envelope, bounds=(lam / 2, 2 * lam), method="bounded", options={"xatol": 1e-9}
        )
        assert -result.fun <= bound.value + 1e-6
        assert -result.fun == pytest.approx(bound.value, rel=1e-6)


class TestSparseTwentyVariables:
    """Seven-term polynomial in twenty variables with 2d = 20."""

    @pytest.mark.integration
    @pytest.mark.slow
    def test_ball_values(self, sparse_twenty):
        start = time.perf_counter()
        _assert_ball_values(
            sparse_twenty, {10.0: -41.6538, 100.0: -340.6339, 1000.0: -2774.217}
        )
        assert time.perf_counter() - start < 60.0

    @pytest.mark.integration
    @pytest.mark.slow
    def test_global_value(self, sparse_twenty):
        value = f_gp(sparse_twenty).value
        assert math.isfinite(value)
        assert value == pytest.approx(-84853211002.07, rel=RTOL)
