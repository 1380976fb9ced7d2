"""Multi-indices and the graded-lex monomial order."""

from __future__ import annotations

from functools import lru_cache
from math import comb, factorial


class MultiIndex(tuple):
    """Tuple of non-negative exponents.

    Comparison follows the graded-lex order: lower total degree first, then
    larger leading exponents first, so ``(2, 0) < (1, 1) < (0, 2)``.
    """

    def __new__(cls, entries=()):
        entries = tuple(int(e) for e in entries)
        if any(e < 0 for e in entries):
            raise ValueError(f"negative exponent in {entries}")
        return super().__new__(cls, entries)

    @classmethod
    def unit(cls, nvars: int, i: int) -> "MultiIndex":
        return cls(1 if j == i else 0 for j in range(nvars))

    @classmethod
    def zero(cls, nvars: int) -> "MultiIndex":
        return cls((0,) * nvars)

    @property
    def degree(self) -> int:
        return sum(self)

    def factorial(self) -> int:
        out = 1
        for e in self:
            out *= factorial(e)
        return out

    def binomial(self, other: "MultiIndex") -> int:
        """(self choose other), zero unless other <= self componentwise."""
        out = 1
        for a, b in zip(self, other):
            if b > a:
                return 0
            out *= comb(a, b)
        return out

    def plus(self, other) -> "MultiIndex":
        return MultiIndex(a + b for a, b in zip(self, other))

    def minus(self, other) -> "MultiIndex":
        return MultiIndex(a - b for a, b in zip(self, other))

    def dominates(self, other) -> bool:
        return all(a >= b for a, b in zip(self, other))

    def sort_key(self):
        return (sum(self), tuple(-e for e in self))

    def __lt__(self, other):
        return self.sort_key() < MultiIndex(other).sort_key()

    def __le__(self, other):
        return self.sort_key() <= MultiIndex(other).sort_key()

    def __gt__(self, other):
        return self.sort_key() > MultiIndex(other).sort_key()

    def __ge__(self, other):
        return self.sort_key() >= MultiIndex(other).sort_key()

    def __repr__(self):
        return f"MultiIndex({tuple(self)})"


def _of_degree(nvars: int, d: int):
    if nvars == 0:
        if d == 0:
            yield ()
        return
    if nvars == 1:
        yield (d,)
        return
    for first in range(d, -1, -1):
        for rest in _of_degree(nvars - 1, d - first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def monomials_of_degree(nvars: int, d: int) -> tuple:
    return tuple(MultiIndex(m) for m in _of_degree(nvars, d))


@lru_cache(maxsize=None)
def graded_lex(nvars: int, max_degree: int) -> tuple:
    """All multi-indices of degree <= max_degree, in graded-lex order."""
    out = []
    for d in range(max_degree + 1):
        out.extend(monomials_of_degree(nvars, d))
    return tuple(out)


def count_monomials(nvars: int, max_degree: int) -> int:
    return comb(nvars + max_degree, nvars)


def restricted(nvars: int, max_degree: int, support) -> tuple:
    """Multi-indices of degree <= max_degree supported on the index set ``support``."""
    support = set(support)
    return tuple(m for m in graded_lex(nvars, max_degree)
                 if all(e == 0 for i, e in enumerate(m) if i not in support))
