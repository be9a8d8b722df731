"""
Seeded random polynomial instances.

Instances have a diagonal part sum x_i^(2d) (optionally random or absent)
plus `omega_size` distinct lower-order terms with nonzero integer
coefficients, the setup used for the timing tables.

Example:
    from gpbound.instances import InstanceSpec, random_instance

    p = random_instance(InstanceSpec(n=10, two_d=20, omega_size=10, seed=3))
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np

from gpbound.polyring import Exponent, Polynomial
from gpbound.validation import at_least, custom, ensure, even_integer, integer, one_of, positive

DIAGONAL_MODES = ["unit", "random-positive", "none"]

# exponent spaces up to this size are enumerated instead of rejection-sampled
_ENUMERATION_LIMIT = 200_000


class InstanceSpecError(ValueError):
    """The requested |Omega| cannot be reached for the given (n, 2d)."""


@dataclass(frozen=True)
class InstanceSpec:
    """
    Parameters of a random instance.

    Attributes:
        n: Number of variables
        two_d: Even degree of the diagonal part
        omega_size: Number of distinct non-diagonal, non-constant terms
        coeff_range: Inclusive integer range for coefficients (0 is never drawn)
        diagonal: "unit" (all 1), "random-positive" or "none"
        seed: Root seed
        max_degree: Largest |alpha| of the sampled terms (default 2d)
        include_constant: Add a random constant term
    """

    n: int
    two_d: int
    omega_size: int
    coeff_range: tuple[int, int] = (-10, 10)
    diagonal: str = "unit"
    seed: int = 0
    max_degree: int | None = None
    include_constant: bool = True

    def __post_init__(self):
        ensure(
            {
                "n": (self.n, [integer(), at_least(1)]),
                "two_d": (self.two_d, [even_integer(), positive()]),
                "omega_size": (self.omega_size, [integer(), at_least(0)]),
                "diagonal": (self.diagonal, [one_of(DIAGONAL_MODES)]),
                "coeff_range": (
                    self.coeff_range,
                    [
                        custom(
                            lambda r: len(r) == 2 and r[0] <= r[1] and (r[0], r[1]) != (0, 0),
                            "Must be a nonempty integer interval containing a nonzero value",
                        )
                    ],
                ),
            }
        )
        object.__setattr__(self, "coeff_range", (int(self.coeff_range[0]), int(self.coeff_range[1])))
        if self.max_degree is not None:
            ensure({"max_degree": (self.max_degree, [integer(), at_least(1)])})
            if self.max_degree > self.two_d:
                raise ValueError("max_degree: Must not exceed two_d")
        if self.omega_size > self.available_terms:
            raise InstanceSpecError(
                f"omega_size={self.omega_size} exceeds the {self.available_terms} available "
                f"exponents for n={self.n}, 2d={self.two_d}, max_degree={self.degree_cap}"
            )

    @property
    def degree_cap(self) -> int:
        return self.two_d if self.max_degree is None else self.max_degree

    @property
    def available_terms(self) -> int:
        """Exponents alpha with 1 <= |alpha| <= degree_cap other than the 2d*e_i."""
        total = math.comb(self.n + self.degree_cap, self.n) - 1
        return total - (self.n if self.degree_cap == self.two_d else 0)


def _is_excluded(alpha: Exponent, two_d: int) -> bool:
    return sum(alpha) == 0 or max(alpha) == two_d


def _all_exponents(n: int, cap: int) -> Iterator[Exponent]:
    for degree in range(1, cap + 1):
        for bars in itertools.combinations(range(degree + n - 1), n - 1):
            yield _composition(degree, n, bars)


def _composition(degree: int, n: int, bars) -> Exponent:
    edges = (-1, *bars, degree + n - 1)
    return tuple(edges[i + 1] - edges[i] - 1 for i in range(n))


def _sample_exponents(spec: InstanceSpec, rng: np.random.Generator) -> list[Exponent]:
    n, two_d, cap, count = spec.n, spec.two_d, spec.degree_cap, spec.omega_size
    if count == 0:
        return []
    available = spec.available_terms

    if available <= _ENUMERATION_LIMIT and 2 * count >= available:
        pool = [a for a in _all_exponents(n, cap) if not _is_excluded(a, two_d)]
        picks = rng.choice(len(pool), size=count, replace=False)
        return [pool[k] for k in picks]

    # degree weighted by the number of exponents of that degree, then uniform stars and bars
    degrees = np.arange(1, cap + 1)
    weights = np.array([float(math.comb(k + n - 1, n - 1)) for k in degrees])
    weights /= weights.sum()
    chosen: dict[Exponent, None] = {}
    while len(chosen) < count:
        degree = int(rng.choice(degrees, p=weights))
        bars = sorted(rng.choice(degree + n - 1, size=n - 1, replace=False)) if n > 1 else []
        alpha = _composition(degree, n, [int(b) for b in bars])
        if not _is_excluded(alpha, two_d):
            chosen.setdefault(alpha, None)
    return list(chosen)


def _nonzero_integers(spec: InstanceSpec, size: int, rng: np.random.Generator) -> list[int]:
    lo, hi = spec.coeff_range
    values = np.array([v for v in range(lo, hi + 1) if v != 0])
    return [int(v) for v in rng.choice(values, size=size)]


def random_instance(spec: InstanceSpec) -> Polynomial:
    """
    Draw a polynomial for `spec`, deterministic in spec.seed.

    Diagonal and constant terms never count toward omega_size.
    """
    rng = np.random.default_rng(spec.seed)
    n, two_d = spec.n, spec.two_d
    terms: dict[Exponent, float] = {}

    if spec.diagonal != "none":
        if spec.diagonal == "unit":
            diagonal = [1] * n
        else:
            diagonal = [int(v) for v in rng.integers(1, max(spec.coeff_range[1], 1) + 1, size=n)]
        for i, c in enumerate(diagonal):
            terms[tuple(two_d if j == i else 0 for j in range(n))] = float(c)

    exponents = _sample_exponents(spec, rng)
    for alpha, c in zip(exponents, _nonzero_integers(spec, len(exponents), rng)):
        terms[alpha] = float(c)
    if spec.include_constant:
        terms[(0,) * n] = float(_nonzero_integers(spec, 1, rng)[0])
    return Polynomial(n=n, two_d=two_d, terms=terms)
