"""Scalar fields used by the series and matrix code.

Exact mode works over the Gaussian rationals.  Purely real values are kept as
``gmpy2.mpq`` (fast, and the common case); values with a nonzero imaginary
part are promoted to :class:`GaussianRational`.  Floating mode uses Python
``complex``/``float`` together with an explicit tolerance.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Any

from gmpy2 import mpq

ExactScalar = Any  # mpq | GaussianRational


def _q(v) -> mpq:
    if isinstance(v, mpq):
        return v
    if isinstance(v, Fraction):
        return mpq(v.numerator, v.denominator)
    if isinstance(v, float):
        raise TypeError("refusing to convert a float into an exact rational")
    return mpq(v)


class GaussianRational:
    """A + B*i with A, B arbitrary-precision rationals."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _q(re)
        self.im = _q(im)

    @staticmethod
    def _split(other):
        if isinstance(other, GaussianRational):
            return other.re, other.im
        if isinstance(other, (int, mpq, Fraction, Rational)):
            return _q(other), mpq(0)
        return None

    def __add__(self, other):
        o = self._split(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o[0], self.im + o[1])

    __radd__ = __add__

    def __sub__(self, other):
        o = self._split(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o[0], self.im - o[1])

    def __rsub__(self, other):
        o = self._split(other)
        if o is None:
            return NotImplemented
        return GaussianRational(o[0] - self.re, o[1] - self.im)

    def __mul__(self, other):
        o = self._split(other)
        if o is None:
            return NotImplemented
        a, b = self.re, self.im
        c, d = o
        return GaussianRational(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._split(other)
        if o is None:
            return NotImplemented
        c, d = o
        den = c * c + d * d
        if den == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        a, b = self.re, self.im
        return GaussianRational((a * c + b * d) / den, (b * c - a * d) / den)

    def __rtruediv__(self, other):
        o = self._split(other)
        if o is None:
            return NotImplemented
        return GaussianRational(*o) / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return 1 / (self ** (-k))
        out = GaussianRational(1, 0)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        o = self._split(other)
        if o is None:
            return NotImplemented
        return self.re == o[0] and self.im == o[1]

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if self.im == 0:
            return str(self.re)
        return f"({self.re}{'+' if self.im >= 0 else '-'}{abs(self.im)}i)"


def exact(re, im=0) -> ExactScalar:
    """Exact scalar; stays an ``mpq`` unless ``im`` is nonzero."""
    if isinstance(re, GaussianRational):
        return re
    if isinstance(re, complex):
        raise TypeError("refusing to convert a complex float into an exact scalar")
    if im:
        return GaussianRational(re, im)
    return _q(re)


def is_exact(x) -> bool:
    return isinstance(x, (int, mpq, Fraction, GaussianRational))


def to_complex(x) -> complex:
    return complex(x)


@dataclass(frozen=True)
class ScalarField:
    """Arithmetic context: ``mode`` is ``"exact"`` or ``"float"``.

    ``tol`` is only consulted in float mode; exact comparisons are literal.
    """

    mode: str = "exact"
    tol: float = 0.0

    def __post_init__(self):
        if self.mode not in ("exact", "float"):
            raise ValueError(f"unknown scalar mode {self.mode!r}")

    @property
    def is_exact(self) -> bool:
        return self.mode == "exact"

    def coerce(self, v):
        if self.is_exact:
            return exact(v)
        return complex(v) if isinstance(v, (complex, GaussianRational)) else float(v)

    def is_zero(self, v) -> bool:
        if self.is_exact:
            return v == 0
        return abs(complex(v)) <= self.tol

    def zero(self):
        return mpq(0) if self.is_exact else 0.0

    def one(self):
        return mpq(1) if self.is_exact else 1.0

    def random(self, rng: random.Random):
        """Random scalar: p/q with p, q drawn from [-9, 9] (q != 0) in exact mode."""
        if self.is_exact:
            return random_rational(rng)
        return rng.uniform(-1.0, 1.0)


EXACT = ScalarField("exact", 0.0)
FLOAT = ScalarField("float", 1e-12)


def random_rational(rng: random.Random, lo: int = -9, hi: int = 9) -> mpq:
    num = rng.randint(lo, hi)
    den = 0
    while den == 0:
        den = rng.randint(lo, hi)
    return mpq(num, den)


def random_nonzero_rational(rng: random.Random, lo: int = -9, hi: int = 9) -> mpq:
    while True:
        v = random_rational(rng, lo, hi)
        if v:
            return v
