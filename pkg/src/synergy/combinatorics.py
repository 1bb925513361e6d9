"""Exact combinatorial primitives: binomials, harmonic numbers, and
canonical subsets of {1, ..., universe}.

Schedule durations, bounds and gap ratios throughout the package are
exact `fractions.Fraction` values built on these helpers.  Floats appear
only in `epsilon`, the logarithmic-approximation error of the harmonic
number, which feeds approximate metrics and never exact accounting.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

Rational = Fraction

__all__ = [
    "Rational",
    "Subset",
    "binomial",
    "harmonic",
    "epsilon",
    "iter_subsets",
    "enumerate_subsets",
    "format_rational",
]

# Exact harmonic values stay cheap up to ~1e4 terms; past that epsilon()
# falls back to a correctly rounded float sum (fsum), good to a few ulp.
_EXACT_EPSILON_LIMIT = 10_000


def binomial(n: int, k: int) -> int:
    """n-choose-k; zero when k exceeds n."""
    if n < 0 or k < 0:
        raise ValueError("binomial arguments must be non-negative")
    return math.comb(n, k)


def _harmonic_span(lo: int, hi: int) -> tuple[int, int]:
    # Unreduced numerator/denominator of sum_{i=lo}^{hi} 1/i, by halving.
    if lo == hi:
        return 1, lo
    mid = (lo + hi) // 2
    n1, d1 = _harmonic_span(lo, mid)
    n2, d2 = _harmonic_span(mid + 1, hi)
    return n1 * d2 + n2 * d1, d1 * d2


@lru_cache(maxsize=None)
def harmonic(n: int) -> Fraction:
    """n-th harmonic number 1 + 1/2 + ... + 1/n, exact; harmonic(0) == 0."""
    if n < 0:
        raise ValueError("harmonic is defined for non-negative n")
    if n == 0:
        return Fraction(0)
    return Fraction(*_harmonic_span(1, n))


def epsilon(n: int) -> float:
    """harmonic(n) - ln(n) as a double.

    Non-increasing in n: starts at 1.0 and approaches ~0.5772.  Exact
    harmonic numbers are used while they stay small; bigger n switches to
    math.fsum, which keeps the result within a few ulp of exact.
    """
    if n < 1:
        raise ValueError("epsilon is defined for n >= 1")
    if n <= _EXACT_EPSILON_LIMIT:
        return float(harmonic(n)) - math.log(n)
    return math.fsum(1.0 / i for i in range(1, n + 1)) - math.log(n)


def format_rational(value: Fraction) -> str:
    """Render as "num/den", keeping the denominator even when it is 1."""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class Subset:
    """Sorted subset of the ground set {1, ..., universe}.

    The canonical order of all size-j subsets is lexicographic on the
    element tuples; ``rank``/``unrank`` implement that order via the
    combinatorial number system.
    """

    elements: tuple[int, ...]
    universe: int

    def __post_init__(self) -> None:
        elems = tuple(int(e) for e in self.elements)
        object.__setattr__(self, "elements", elems)
        if any(not 1 <= e <= self.universe for e in elems):
            raise ValueError(f"elements {elems} out of range for universe {self.universe}")
        if any(a >= b for a, b in zip(elems, elems[1:])):
            raise ValueError(f"elements must be strictly increasing: {elems}")

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[int]:
        return iter(self.elements)

    def __contains__(self, member: object) -> bool:
        return member in self.elements

    def index_of(self, member: int) -> int:
        """Position of a member within the sorted element tuple."""
        return self.elements.index(member)

    def without(self, member: int) -> "Subset":
        """The subset with one member removed."""
        if member not in self.elements:
            raise ValueError(f"{member} is not a member of {self.elements}")
        return Subset(tuple(e for e in self.elements if e != member), self.universe)

    def complement(self) -> tuple[int, ...]:
        """Ground-set members not in this subset, ascending."""
        inside = set(self.elements)
        return tuple(e for e in range(1, self.universe + 1) if e not in inside)

    def rank(self) -> int:
        """Lexicographic index among all subsets of this size."""
        index = 0
        size = len(self.elements)
        previous = 0
        for i, element in enumerate(self.elements):
            for skipped in range(previous + 1, element):
                index += binomial(self.universe - skipped, size - i - 1)
            previous = element
        return index

    @classmethod
    def unrank(cls, universe: int, size: int, index: int) -> "Subset":
        """Inverse of ``rank`` for the given universe and subset size."""
        total = binomial(universe, size)
        if not 0 <= index < total:
            raise ValueError(f"index {index} out of range for {total} subsets")
        elements = []
        candidate = 1
        remaining = index
        for i in range(size):
            while True:
                block = binomial(universe - candidate, size - i - 1)
                if remaining < block:
                    break
                remaining -= block
                candidate += 1
            elements.append(candidate)
            candidate += 1
        return cls(tuple(elements), universe)


def iter_subsets(universe: int, size: int) -> Iterator[Subset]:
    """All size-``size`` subsets in canonical order, lazily."""
    if not 0 <= size <= universe:
        raise ValueError(f"subset size {size} out of range for universe {universe}")
    return (Subset(combo, universe) for combo in itertools.combinations(range(1, universe + 1), size))


def enumerate_subsets(universe: int, size: int) -> list[Subset]:
    """All size-``size`` subsets in canonical order, materialized."""
    return list(iter_subsets(universe, size))
