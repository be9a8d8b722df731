"""
Pytest configuration and shared fixtures for gpbound tests.
"""

from __future__ import annotations

import pytest

from gpbound.cache import clear_all_caches
from gpbound.config import BoundConfig, set_config
from gpbound.logging import configure_logging
from gpbound.polyring import Polynomial, parse_polynomial

# Sparse degree-20 example in 20 variables (diagonal sum_i x_i^20 plus seven terms)
SPARSE_20_TERMS = [
    "x2^6*x3^3*x5*x7*x8^3*x9*x10*x11^2*x12",
    "-17*x1*x2*x3*x6*x7*x9^2*x10*x12^4*x14^4*x16*x18*x19",
    "19*x4^6*x5^4*x6^2*x9*x12*x17^2*x18*x19^2",
    "-10*x0*x1^5*x2*x8^3*x12*x15*x17*x18^2*x19^4",
    "-11*x0^2*x2*x4^3*x5*x6*x12^4*x15^4*x16*x17",
    "15*x1^2*x5^3*x6*x8*x9*x14^2*x15^4*x18^2*x19^2",
    "2*x1*x2^2*x4^3*x6*x10*x11^2*x13*x15*x17*x18*x19^3",
]


def _sum_expression(pieces: list[str]) -> str:
    text = pieces[0]
    for piece in pieces[1:]:
        text += f" - {piece[1:]}" if piece.startswith("-") else f" + {piece}"
    return text


@pytest.fixture(autouse=True)
def reset_state():
    """Fresh logger, config and caches for each test."""
    configure_logging()
    set_config(BoundConfig())
    clear_all_caches()
    yield
    set_config(BoundConfig())


@pytest.fixture
def sextic() -> Polynomial:
    """x^6 + 3x^4 - 9x^2: one non-square term, closed forms known."""
    return parse_polynomial("x^6 + 3x^4 - 9x^2")


@pytest.fixture
def quartic() -> Polynomial:
    """x^4 - 8x^3 + 8x^2 + 1 = 2x^2(x-2)^2 + (1 - x^4)."""
    return parse_polynomial("x^4 - 8x^3 + 8x^2 + 1")


@pytest.fixture
def four_var_sextic() -> Polynomial:
    return parse_polynomial(
        "w^6 + x^6 + y^6 + z^6 + 7w^4y - 10w^3xy + 5wx^3y - 3w^3y^2 - 3w^2xy^2 + 9wxy^3"
        " - 10xy^4 + 7w^4z + wx^3z - 5xyz^3 - 5z^5 + 8w^4 + 8w^2x^2 - 4wx^3 - w^3y"
        " + 2wx^2y + 3w^2y^2 - wxy^2 + wy^3 + 7w^2xz - 3y^3z + w^2z^2 + 2y^2z^2 - 2w^3"
        " + 8x^3 - 5w^2y + 8x^2z + 3xz - 3z + 5"
    )


@pytest.fixture
def weighted_sextic() -> Polynomial:
    return parse_polynomial(
        "8w^6 + 6x^6 + 4y^6 + 2z^6 - 3w^3x^2 + 8w^2xyz - 9xz^4 + 2w^2xz - 3xz^2"
    )


@pytest.fixture
def no_diagonal_octic() -> Polynomial:
    """Degree 7 polynomial taken with 2d = 8; every x_i^8 coefficient is zero."""
    return parse_polynomial("-7x^3y^4 + 13x^2y^5 + 5y^4z + 18xz^4 - 5z^2", two_d_hint=8)


@pytest.fixture
def high_degree() -> Polynomial:
    """Degree 38 polynomial taken with 2d = 40."""
    return parse_polynomial(
        "-9w^12x^9y^12z^5 + 19w^8x^2yz^20 - 3w^11x^6y^9z^4 - 3w^13x^14z - 18w^4x^12y^3",
        two_d_hint=40,
    )


@pytest.fixture
def sparse_twenty() -> Polynomial:
    diagonal = [f"x{i}^20" for i in range(20)]
    return parse_polynomial(_sum_expression(diagonal + SPARSE_20_TERMS), n_hint=20)


@pytest.fixture
def binary_quartic() -> Polynomial:
    """x1^4 + x2^4 - 6 x1^3 x2: a single non-square term of full degree."""
    return parse_polynomial("x0^4 + x1^4 - 6*x0^3*x1")
