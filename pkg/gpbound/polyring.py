"""
Sparse multivariate polynomials for gpbound.

A Polynomial is an immutable map from exponent vectors to nonzero real
coefficients, together with the variable count n and the even working
degree 2d the bounds are computed for. This module also derives the
support sets the geometric programs are built from.

Example:
    from gpbound.polyring import parse_polynomial, support_sets

    f = parse_polynomial("x0^6 + 3*x0^4 - 9*x0^2")
    s = support_sets(f)
    s.delta        # ((2,),)
    s.diagonal     # (1.0,)
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any

import numpy as np

from gpbound.validation import ensure, even_integer, positive

Exponent = tuple[int, ...]

# Points are evaluated in chunks to bound the (points x terms x n) temporary
_EVAL_CHUNK = 4096


class PolynomialParseError(ValueError):
    """Raised when an expression string cannot be parsed."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class DimensionError(ValueError):
    """Raised when a point or exponent vector has the wrong length."""

    pass


def grlex_key(alpha: Exponent) -> tuple[int, Exponent]:
    """Graded-lex sort key: total degree first, then lexicographic."""
    return (sum(alpha), alpha)


def _canonical(terms: Iterable[tuple[Sequence[int], float]], n: int) -> dict[Exponent, float]:
    merged: dict[Exponent, float] = {}
    for exps, coeff in terms:
        alpha = tuple(int(e) for e in exps)
        if len(alpha) != n:
            raise DimensionError(f"Exponent vector {alpha} has length {len(alpha)}, expected {n}")
        if any(e < 0 for e in alpha):
            raise ValueError(f"Negative exponent in {alpha}")
        merged[alpha] = merged.get(alpha, 0.0) + float(coeff)
    return {
        alpha: merged[alpha]
        for alpha in sorted(merged, key=grlex_key, reverse=True)
        if merged[alpha] != 0.0
    }


def _smallest_even_at_least(degree: int) -> int:
    return max(2, degree + (degree % 2))


@dataclass(frozen=True)
class Polynomial:
    """
    Immutable sparse polynomial in n variables with working degree two_d.

    Terms are kept in canonical form: merged, zero coefficients dropped, and
    ordered by descending graded-lex order.
    """

    n: int
    two_d: int
    terms: Mapping[Exponent, float] = field(default_factory=dict)

    def __post_init__(self):
        ensure({"n": (self.n, [positive()]), "two_d": (self.two_d, [even_integer(), positive()])})
        canonical = _canonical(self.terms.items(), self.n)
        degree = max((sum(alpha) for alpha in canonical), default=0)
        if degree > self.two_d:
            raise ValueError(f"two_d={self.two_d} is smaller than the degree {degree}")
        object.__setattr__(self, "terms", MappingProxyType(canonical))

    @classmethod
    def from_terms(
        cls,
        n: int,
        terms: Mapping[Sequence[int], float] | Iterable[tuple[Sequence[int], float]],
        two_d: int | None = None,
    ) -> Polynomial:
        """Build a polynomial, defaulting two_d to the smallest even integer >= degree."""
        items = list(terms.items()) if isinstance(terms, Mapping) else list(terms)
        canonical = _canonical(items, n)
        if two_d is None:
            two_d = _smallest_even_at_least(max((sum(a) for a in canonical), default=0))
        return cls(n=n, two_d=two_d, terms=canonical)

    @property
    def degree(self) -> int:
        return max((sum(alpha) for alpha in self.terms), default=0)

    @property
    def constant(self) -> float:
        return self.terms.get((0,) * self.n, 0.0)

    def coefficient(self, alpha: Sequence[int]) -> float:
        return self.terms.get(tuple(alpha), 0.0)

    def key(self) -> tuple[int, int, tuple[tuple[Exponent, float], ...]]:
        """Hashable canonical identity."""
        return (self.n, self.two_d, tuple(self.terms.items()))

    def __hash__(self) -> int:
        return hash(self.key())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.key() == other.key()

    def _check_compatible(self, other: Polynomial) -> None:
        if other.n != self.n:
            raise DimensionError(f"Cannot combine polynomials in {self.n} and {other.n} variables")

    def __add__(self, other: Polynomial) -> Polynomial:
        self._check_compatible(other)
        return Polynomial(
            n=self.n,
            two_d=max(self.two_d, other.two_d),
            terms=_canonical([*self.terms.items(), *other.terms.items()], self.n),
        )

    def __neg__(self) -> Polynomial:
        return self.scale(-1.0)

    def __sub__(self, other: Polynomial) -> Polynomial:
        return self + (-other)

    def scale(self, factor: float) -> Polynomial:
        return Polynomial(
            n=self.n,
            two_d=self.two_d,
            terms={alpha: factor * c for alpha, c in self.terms.items()},
        )

    def with_two_d(self, two_d: int) -> Polynomial:
        return Polynomial(n=self.n, two_d=two_d, terms=self.terms)

    def exponent_matrix(self) -> np.ndarray:
        if not self.terms:
            return np.zeros((0, self.n), dtype=float)
        return np.array(list(self.terms.keys()), dtype=float)

    def coefficient_vector(self) -> np.ndarray:
        return np.array(list(self.terms.values()), dtype=float)

    def __str__(self) -> str:
        return format_polynomial(self)

    def __repr__(self) -> str:
        return f"Polynomial(n={self.n}, two_d={self.two_d}, '{format_polynomial(self)}')"

    def to_json(self) -> dict[str, Any]:
        """Serialize to the {"n", "two_d", "terms": [{"coeff", "exp"}]} schema."""
        return {
            "n": self.n,
            "two_d": self.two_d,
            "terms": [
                {"coeff": _json_number(c), "exp": list(alpha)} for alpha, c in self.terms.items()
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> Polynomial:
        try:
            n = int(data["n"])
            terms = [(t["exp"], float(t["coeff"])) for t in data.get("terms", [])]
        except (KeyError, TypeError) as e:
            raise ValueError(f"Malformed polynomial JSON: {e}") from e
        two_d = data.get("two_d")
        return cls.from_terms(n, terms, two_d=None if two_d is None else int(two_d))


def _json_number(value: float) -> int | float:
    return int(value) if float(value).is_integer() and abs(value) < 2**53 else value


def _format_coefficient(value: float) -> str:
    if float(value).is_integer() and abs(value) < 2**53:
        return str(int(value))
    return repr(float(value))


def format_polynomial(p: Polynomial) -> str:
    """
    Print in descending graded-lex order using x0..x{n-1} names.

    The text carries neither n nor two_d: parsing it back infers the smallest
    even degree and the highest variable used, so pass n_hint and two_d_hint
    to parse_polynomial when those exceed what the terms show.
    """
    if not p.terms:
        return "0"
    pieces: list[str] = []
    for alpha, coeff in p.terms.items():
        monomial = "*".join(
            f"x{i}" if e == 1 else f"x{i}^{e}" for i, e in enumerate(alpha) if e > 0
        )
        magnitude = abs(coeff)
        if not monomial:
            body = _format_coefficient(magnitude)
        elif magnitude == 1.0:
            body = monomial
        else:
            body = f"{_format_coefficient(magnitude)}*{monomial}"
        sign = "-" if coeff < 0 else "+"
        if not pieces:
            pieces.append(body if sign == "+" else f"-{body}")
        else:
            pieces.append(f"{sign} {body}")
    return " ".join(pieces)


# =============================================================================
# Expression parsing
# =============================================================================

_TOKEN_SPEC = [
    ("NUMBER", r"(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?"),
    ("POW", r"\*\*|\^"),
    ("MUL", r"\*"),
    ("PLUS", r"\+"),
    ("MINUS", r"-"),
    ("VAR", r"[A-Za-z](?:_?\d+)?"),
    ("WS", r"\s+"),
    ("MISMATCH", r"."),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{pattern})" for name, pattern in _TOKEN_SPEC))
_INDEXED_RE = re.compile(r"x_?(\d+)")


@dataclass
class _Token:
    kind: str
    text: str
    position: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    for match in _TOKEN_RE.finditer(text):
        kind = match.lastgroup or "MISMATCH"
        if kind == "WS":
            continue
        if kind == "MISMATCH":
            raise PolynomialParseError(f"Unexpected character {match.group()!r}", match.start())
        tokens.append(_Token(kind, match.group(), match.start()))
    tokens.append(_Token("EOF", "", len(text)))
    return tokens


class _TermParser:
    """Recursive-descent parser for sums of signed monomials."""

    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.index = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.index]

    def advance(self) -> _Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def expect(self, kind: str, what: str) -> _Token:
        if self.current.kind != kind:
            found = self.current.text or "end of input"
            raise PolynomialParseError(f"Expected {what}, found {found!r}", self.current.position)
        return self.advance()

    def parse(self) -> list[tuple[float, dict[str, int]]]:
        if self.current.kind == "EOF":
            raise PolynomialParseError("Empty expression", 0)
        terms = []
        sign = 1.0
        if self.current.kind in ("PLUS", "MINUS"):
            sign = -1.0 if self.advance().kind == "MINUS" else 1.0
        terms.append(self.term(sign))
        while self.current.kind in ("PLUS", "MINUS"):
            sign = -1.0 if self.advance().kind == "MINUS" else 1.0
            terms.append(self.term(sign))
        if self.current.kind != "EOF":
            raise PolynomialParseError(
                f"Unexpected token {self.current.text!r}", self.current.position
            )
        return terms

    def term(self, sign: float) -> tuple[float, dict[str, int]]:
        coeff = sign
        powers: dict[str, int] = {}
        coeff *= self.factor(powers)
        while True:
            if self.current.kind == "MUL":
                self.advance()
            elif self.current.kind not in ("NUMBER", "VAR"):
                break
            # implicit multiplication: 7w^4y, 3x0x1
            coeff *= self.factor(powers)
        return coeff, powers

    def factor(self, powers: dict[str, int]) -> float:
        """Consume one factor; variables accumulate into powers, numbers are returned."""
        token = self.current
        if token.kind == "NUMBER":
            self.advance()
            return float(token.text) ** self.exponent()
        if token.kind == "VAR":
            self.advance()
            powers[token.text] = powers.get(token.text, 0) + self.exponent()
            return 1.0
        found = token.text or "end of input"
        raise PolynomialParseError(f"Expected a number or variable, found {found!r}", token.position)

    def exponent(self) -> int:
        if self.current.kind != "POW":
            return 1
        self.advance()
        token = self.expect("NUMBER", "an integer exponent")
        if not token.text.isdigit():
            raise PolynomialParseError("Exponents must be nonnegative integers", token.position)
        return int(token.text)


def _resolve_variables(names: set[str], n_hint: int | None) -> tuple[int, dict[str, int]]:
    indexed = {name for name in names if len(name) > 1}
    letters = names - indexed
    if indexed and letters:
        raise ValueError(
            f"Cannot mix indexed variables {sorted(indexed)} with letters {sorted(letters)}"
        )
    if indexed:
        mapping = {}
        for name in indexed:
            match = _INDEXED_RE.fullmatch(name)
            if match is None:
                raise ValueError(f"Indexed variables must be named x0, x1, ...; got {name!r}")
            mapping[name] = int(match.group(1))
        n = max(mapping.values()) + 1
    else:
        mapping = {name: i for i, name in enumerate(sorted(letters))}
        n = max(len(mapping), 1)
    if n_hint is not None:
        if n_hint < n:
            raise ValueError(f"n_hint={n_hint} is smaller than the {n} variables used")
        n = n_hint
    return n, mapping


def parse_polynomial(
    text: str,
    n_hint: int | None = None,
    two_d_hint: int | None = None,
) -> Polynomial:
    """
    Parse a sum of signed monomial terms.

    Variables are either indexed (x0, x1, ... or x_0, x_1, ...) or single
    letters, which are numbered alphabetically (w, x, y, z -> 0, 1, 2, 3).
    Multiplication may be written with '*' or by juxtaposition; powers with
    '^' or '**'.

    Args:
        text: Expression such as "x0^6 + 3*x0^4 - 9*x0^2"
        n_hint: Variable count, if larger than the highest variable used
        two_d_hint: Even working degree >= deg f; defaults to the smallest
            even integer >= deg f

    Raises:
        PolynomialParseError: syntax errors, with the offending position
        ValueError: odd or too small two_d_hint, inconsistent variable names
    """
    if n_hint is not None:
        ensure({"n_hint": (n_hint, [positive()])})
    if two_d_hint is not None:
        ensure({"two_d_hint": (two_d_hint, [even_integer(), positive()])})

    raw_terms = _TermParser(text).parse()
    names = {name for _, powers in raw_terms for name in powers}
    n, mapping = _resolve_variables(names, n_hint)

    terms = []
    for coeff, powers in raw_terms:
        alpha = [0] * n
        for name, e in powers.items():
            alpha[mapping[name]] += e
        terms.append((alpha, coeff))

    p = Polynomial.from_terms(n, terms)
    if two_d_hint is not None:
        if two_d_hint < p.degree:
            raise ValueError(f"two_d_hint={two_d_hint} is smaller than the degree {p.degree}")
        p = p.with_two_d(two_d_hint)
    return p


# =============================================================================
# Evaluation
# =============================================================================


def evaluate(p: Polynomial, x: Sequence[float] | np.ndarray) -> float:
    """Evaluate p at a single point x of length n."""
    point = np.asarray(x, dtype=float)
    if point.shape != (p.n,):
        raise DimensionError(f"Point has shape {point.shape}, expected ({p.n},)")
    if not p.terms:
        return 0.0
    monomials = np.prod(point[None, :] ** p.exponent_matrix(), axis=1)
    return float(p.coefficient_vector() @ monomials)


def evaluate_many(p: Polynomial, points: np.ndarray) -> np.ndarray:
    """Evaluate p at each row of an (m, n) array."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != p.n:
        raise DimensionError(f"Points have shape {pts.shape}, expected (m, {p.n})")
    if not p.terms:
        return np.zeros(pts.shape[0])
    exps = p.exponent_matrix()
    coeffs = p.coefficient_vector()
    out = np.empty(pts.shape[0])
    for start in range(0, pts.shape[0], _EVAL_CHUNK):
        chunk = pts[start : start + _EVAL_CHUNK]
        out[start : start + _EVAL_CHUNK] = (
            np.prod(chunk[:, None, :] ** exps[None, :, :], axis=2) @ coeffs
        )
    return out


# =============================================================================
# Support sets
# =============================================================================


def is_square_monomial(coeff: float, alpha: Sequence[int]) -> bool:
    """A monomial coeff * x^alpha is a square iff coeff > 0 and every exponent is even."""
    return coeff > 0 and all(e % 2 == 0 for e in alpha)


@dataclass(frozen=True)
class SupportSets:
    """
    Supports of f relevant to the geometric programs.

    omega:      exponents of nonzero coefficients, excluding 0 and the 2d*e_i
    delta:      members of omega whose monomial is not a square
    delta_lt:   members of delta with |alpha| < 2d
    diagonal:   coefficients of x_i^(2d), i = 0..n-1 (0 when absent)
    constant:   f(0)
    coefficients: f_alpha for alpha in omega

    The exponent collections are tuples in descending graded-lex order.
    """

    n: int
    two_d: int
    omega: tuple[Exponent, ...]
    delta: tuple[Exponent, ...]
    delta_lt: tuple[Exponent, ...]
    diagonal: tuple[float, ...]
    constant: float
    coefficients: Mapping[Exponent, float]

    def touched(self, i: int) -> bool:
        """True if some alpha in delta has alpha_i > 0."""
        return any(alpha[i] > 0 for alpha in self.delta)


def _is_diagonal(alpha: Exponent, two_d: int) -> bool:
    nonzero = [e for e in alpha if e != 0]
    return len(nonzero) == 1 and nonzero[0] == two_d


def support_sets(p: Polynomial) -> SupportSets:
    """Compute Omega(f), Delta(f), Delta(f)^{<2d}, the diagonal and f(0)."""
    zero = (0,) * p.n
    omega = tuple(
        alpha for alpha in p.terms if alpha != zero and not _is_diagonal(alpha, p.two_d)
    )
    delta = tuple(alpha for alpha in omega if not is_square_monomial(p.terms[alpha], alpha))
    delta_lt = tuple(alpha for alpha in delta if sum(alpha) < p.two_d)
    diagonal = []
    for i in range(p.n):
        unit = [0] * p.n
        unit[i] = p.two_d
        diagonal.append(p.terms.get(tuple(unit), 0.0))
    return SupportSets(
        n=p.n,
        two_d=p.two_d,
        omega=omega,
        delta=delta,
        delta_lt=delta_lt,
        diagonal=tuple(diagonal),
        constant=p.constant,
        coefficients=MappingProxyType({alpha: p.terms[alpha] for alpha in omega}),
    )


# =============================================================================
# Relabeling
# =============================================================================


def _check_permutation(perm: Sequence[int], n: int) -> list[int]:
    perm_list = [int(i) for i in perm]
    if sorted(perm_list) != list(range(n)):
        raise ValueError(f"{perm_list} is not a permutation of 0..{n - 1}")
    return perm_list


def permute_variables(p: Polynomial, perm: Sequence[int]) -> Polynomial:
    """
    Relabel variables: variable i of p becomes variable perm[i] of the result.

    For every x, evaluate(result, y) == evaluate(p, x) where y[perm[i]] = x[i].
    """
    perm_list = _check_permutation(perm, p.n)
    terms: dict[Exponent, float] = {}
    for alpha, coeff in p.terms.items():
        beta = [0] * p.n
        for i, e in enumerate(alpha):
            beta[perm_list[i]] = e
        terms[tuple(beta)] = coeff
    return Polynomial(n=p.n, two_d=p.two_d, terms=terms)


def inverse_permutation(perm: Sequence[int]) -> list[int]:
    perm_list = _check_permutation(perm, len(perm))
    inverse = [0] * len(perm_list)
    for i, target in enumerate(perm_list):
        inverse[target] = i
    return inverse


def descending_permutation(diagonal: Sequence[float]) -> list[int]:
    """
    Permutation that sorts the diagonal coefficients in descending order.

    Ties keep their original relative order.
    """
    order = sorted(range(len(diagonal)), key=lambda i: (-diagonal[i], i))
    perm = [0] * len(diagonal)
    for rank, i in enumerate(order):
        perm[i] = rank
    return perm
