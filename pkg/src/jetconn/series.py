"""Dense truncated multivariate power series.

A :class:`TruncatedSeries` in ``nvars`` variables with order ``T`` stores every
coefficient of total degree <= T in one flat tuple, laid out in graded-lex
order.  Because the layout is graded, truncating to a lower order is a prefix
slice.  Binary operations truncate to the smaller of the two orders, so the
``order`` attribute is always the degree through which the result is valid.
"""

from __future__ import annotations

import random
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from gmpy2 import mpq

from . import linalg
from .multiindex import MultiIndex, graded_lex
from .scalars import EXACT, FLOAT, ScalarField, exact, random_rational

MAX_VARS = 4
MAX_ORDER = 16


class SeriesError(ValueError):
    pass


class _Layout:
    """Index tables for one (nvars, order) pair; shared by all series of that shape."""

    def __init__(self, nvars: int, order: int):
        self.nvars = nvars
        self.order = order
        self.monomials = graded_lex(nvars, order)
        self.size = len(self.monomials)
        self.index = {m: i for i, m in enumerate(self.monomials)}
        self.degrees = [m.degree for m in self.monomials]
        # offsets[d] = first position of degree d; offsets[order + 1] = size
        self.offsets = [0] * (order + 2)
        for d in range(order + 1):
            self.offsets[d + 1] = self.offsets[d] + sum(1 for x in self.degrees if x == d)
        self._products = {}

    def product_row(self, pa: int):
        """Positions of m_pa * m_pb for every pb with deg(pb) <= order - deg(pa)."""
        row = self._products.get(pa)
        if row is None:
            ma = self.monomials[pa]
            lim = self.offsets[self.order - self.degrees[pa] + 1]
            index = self.index
            row = [index[tuple(a + b for a, b in zip(ma, self.monomials[pb]))] for pb in range(lim)]
            self._products[pa] = row
        return row


@lru_cache(maxsize=None)
def layout(nvars: int, order: int) -> _Layout:
    return _Layout(nvars, order)


def _check_shape(nvars: int, order: int):
    if not 0 <= nvars <= MAX_VARS:
        raise SeriesError(f"number of variables must be in [0, {MAX_VARS}], got {nvars}")
    # one above the cap so that integrating an order-MAX_ORDER series still works
    if not 0 <= order <= MAX_ORDER + 1:
        raise SeriesError(f"truncation order must be in [0, {MAX_ORDER + 1}], got {order}")


class TruncatedSeries:
    __slots__ = ("nvars", "order", "coeffs")

    def __init__(self, nvars: int, order: int, coeffs: Sequence):
        _check_shape(nvars, order)
        lay = layout(nvars, order)
        coeffs = tuple(mpq(c) if type(c) is int or isinstance(c, Fraction) else c for c in coeffs)
        if len(coeffs) != lay.size:
            raise SeriesError(f"expected {lay.size} coefficients, got {len(coeffs)}")
        self.nvars = nvars
        self.order = order
        self.coeffs = coeffs

    # -- construction --------------------------------------------------------

    @classmethod
    def zero(cls, nvars: int, order: int, field: ScalarField = EXACT) -> "TruncatedSeries":
        z = field.zero()
        return cls(nvars, order, (z,) * layout(nvars, order).size)

    @classmethod
    def constant(cls, c, nvars: int, order: int, field: ScalarField = EXACT) -> "TruncatedSeries":
        z = field.zero()
        coeffs = [z] * layout(nvars, order).size
        coeffs[0] = field.coerce(c)
        return cls(nvars, order, coeffs)

    @classmethod
    def variable(cls, i: int, nvars: int, order: int, field: ScalarField = EXACT) -> "TruncatedSeries":
        if not 0 <= i < nvars:
            raise SeriesError(f"variable index {i} out of range for {nvars} variables")
        return cls.from_dict({MultiIndex.unit(nvars, i): 1}, nvars, order, field)

    @classmethod
    def from_dict(cls, terms: Mapping, nvars: int, order: int, field: ScalarField = EXACT) -> "TruncatedSeries":
        """Build from {exponent tuple: coefficient}; terms above ``order`` are dropped."""
        lay = layout(nvars, order)
        z = field.zero()
        coeffs = [z] * lay.size
        for mono, c in terms.items():
            mono = tuple(mono) if not isinstance(mono, int) else (mono,)
            if len(mono) != nvars:
                raise SeriesError(f"exponent {mono} does not have {nvars} entries")
            if sum(mono) <= order:
                coeffs[lay.index[mono]] = coeffs[lay.index[mono]] + field.coerce(c)
        return cls(nvars, order, coeffs)

    @classmethod
    def univariate(cls, coeffs: Sequence, order: int | None = None, field: ScalarField = EXACT) -> "TruncatedSeries":
        """Series in one variable from its coefficient list (c0, c1, ...)."""
        if order is None:
            order = len(coeffs) - 1
        vals = [field.coerce(c) for c in coeffs[:order + 1]]
        vals += [field.zero()] * (order + 1 - len(vals))
        return cls(1, order, vals)

    # -- inspection ----------------------------------------------------------

    @property
    def layout(self) -> _Layout:
        return layout(self.nvars, self.order)

    def __getitem__(self, mono) -> object:
        if isinstance(mono, int):
            mono = (mono,)
        mono = tuple(mono)
        if sum(mono) > self.order:
            raise SeriesError(f"coefficient {mono} lies above the truncation order {self.order}")
        return self.coeffs[self.layout.index[mono]]

    coefficient = __getitem__

    def terms(self) -> dict:
        """Nonzero coefficients as {MultiIndex: value}."""
        mons = self.layout.monomials
        return {mons[i]: c for i, c in enumerate(self.coeffs) if c != 0}

    def constant_term(self):
        return self.coeffs[0]

    def is_zero(self, through: int | None = None, tol: float = 0.0) -> bool:
        upto = self.order if through is None else min(through, self.order)
        if upto < 0:
            return True
        end = self.layout.offsets[upto + 1]
        if tol:
            return all(abs(c) <= tol for c in self.coeffs[:end])
        return not any(self.coeffs[:end])

    def max_abs(self, through: int | None = None) -> float:
        upto = self.order if through is None else min(through, self.order)
        if upto < 0:
            return 0.0
        end = self.layout.offsets[upto + 1]
        return max((abs(complex(c)) for c in self.coeffs[:end]), default=0.0)

    def agrees(self, other: "TruncatedSeries", through: int | None = None) -> bool:
        return (self - other).is_zero(through)

    def valuation(self) -> int | None:
        for i, c in enumerate(self.coeffs):
            if c != 0:
                return self.layout.degrees[i]
        return None

    def depends_on(self, var: int) -> bool:
        mons = self.layout.monomials
        return any(c != 0 and mons[i][var] > 0 for i, c in enumerate(self.coeffs))

    def is_exact(self) -> bool:
        return not any(isinstance(c, (float, complex)) for c in self.coeffs)

    # -- structural ----------------------------------------------------------

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise SeriesError(f"cannot raise the order from {self.order} to {order}")
        if order == self.order:
            return self
        return TruncatedSeries(self.nvars, order, self.coeffs[:layout(self.nvars, order).size])

    def pad(self, order: int) -> "TruncatedSeries":
        """Same coefficients viewed at a higher order (claims missing terms are zero).

        Only meaningful for polynomials whose true degree is <= self.order.
        """
        if order <= self.order:
            return self.truncate(order)
        z = self.coeffs[0] * 0
        extra = layout(self.nvars, order).size - len(self.coeffs)
        return TruncatedSeries(self.nvars, order, self.coeffs + (z,) * extra)

    def map(self, fn) -> "TruncatedSeries":
        return TruncatedSeries(self.nvars, self.order, [fn(c) for c in self.coeffs])

    def to_float(self) -> "TruncatedSeries":
        def conv(c):
            z = complex(c)
            return z.real if z.imag == 0 else z
        return self.map(conv)

    def homogeneous_part(self, d: int) -> "TruncatedSeries":
        lay = self.layout
        lo, hi = lay.offsets[d], lay.offsets[d + 1]
        z = self.coeffs[0] * 0
        return TruncatedSeries(self.nvars, self.order,
                               [c if lo <= i < hi else z for i, c in enumerate(self.coeffs)])

    def set_zero(self, variables: Iterable[int]) -> "TruncatedSeries":
        """Substitute 0 for the given variables."""
        variables = tuple(variables)
        mons = self.layout.monomials
        z = self.coeffs[0] * 0
        return TruncatedSeries(self.nvars, self.order,
                               [c if all(mons[i][v] == 0 for v in variables) else z
                                for i, c in enumerate(self.coeffs)])

    def embed(self, nvars: int, positions: Sequence[int]) -> "TruncatedSeries":
        """View as a series in ``nvars`` variables; old variable k becomes ``positions[k]``."""
        terms = {}
        for mono, c in self.terms().items():
            new = [0] * nvars
            for k, e in enumerate(mono):
                new[positions[k]] = e
            terms[tuple(new)] = c
        out = TruncatedSeries.zero(nvars, self.order)
        z = self.coeffs[0] * 0
        lay = out.layout
        coeffs = [z] * lay.size
        for mono, c in terms.items():
            coeffs[lay.index[mono]] = c
        return TruncatedSeries(nvars, self.order, coeffs)

    # -- arithmetic ----------------------------------------------------------

    def _coerce_other(self, other):
        if isinstance(other, TruncatedSeries):
            if other.nvars != self.nvars:
                raise SeriesError(f"variable-count mismatch: {self.nvars} vs {other.nvars}")
            return other
        return None

    def __add__(self, other):
        o = self._coerce_other(other)
        if o is None:
            coeffs = list(self.coeffs)
            coeffs[0] = coeffs[0] + other
            return TruncatedSeries(self.nvars, self.order, coeffs)
        t = min(self.order, o.order)
        n = layout(self.nvars, t).size
        return TruncatedSeries(self.nvars, t, [a + b for a, b in zip(self.coeffs[:n], o.coeffs[:n])])

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(self.nvars, self.order, [-c for c in self.coeffs])

    def __sub__(self, other):
        o = self._coerce_other(other)
        if o is None:
            return self + (-other)
        t = min(self.order, o.order)
        n = layout(self.nvars, t).size
        return TruncatedSeries(self.nvars, t, [a - b for a, b in zip(self.coeffs[:n], o.coeffs[:n])])

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "TruncatedSeries":
        return TruncatedSeries(self.nvars, self.order, [c * v for v in self.coeffs])

    def __mul__(self, other):
        o = self._coerce_other(other)
        if o is None:
            if isinstance(other, SeriesMatrix):
                return NotImplemented
            return self.scale(other)
        return series_mul(self, o)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, other):
        o = self._coerce_other(other)
        if o is None:
            return TruncatedSeries(self.nvars, self.order, [v / other for v in self.coeffs])
        return series_mul(self, o.reciprocal())

    def __rtruediv__(self, other):
        return self.reciprocal().scale(other)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise SeriesError("only non-negative integer powers are supported")
        out = TruncatedSeries.constant(1, self.nvars, self.order, _field_of(self))
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def reciprocal(self) -> "TruncatedSeries":
        """1/f via Newton iteration h <- h (2 - f h); needs a nonzero constant term."""
        c0 = self.coeffs[0]
        if c0 == 0:
            raise SeriesError("series with zero constant term is not invertible")
        h = TruncatedSeries.constant(0, self.nvars, self.order, _field_of(self)) + (1 / c0)
        prec = 1
        while prec <= self.order:
            h = h + h * (1 - self * h)
            prec *= 2
        return h

    def diff(self, var: int) -> "TruncatedSeries":
        return series_diff(self, var)

    def derivative(self, mono: Sequence[int]) -> "TruncatedSeries":
        out = self
        for var, times in enumerate(mono):
            for _ in range(times):
                out = out.diff(var)
        return out

    def integrate(self, var: int) -> "TruncatedSeries":
        """Antiderivative in ``var`` vanishing at ``x_var = 0``; order rises by one."""
        if not 0 <= var < self.nvars:
            raise SeriesError(f"variable index {var} out of range")
        out_order = self.order + 1
        lay_out = layout(self.nvars, out_order)
        z = self.coeffs[0] * 0
        coeffs = [z] * lay_out.size
        for i, mono in enumerate(self.layout.monomials):
            c = self.coeffs[i]
            if c != 0:
                new = list(mono)
                new[var] += 1
                coeffs[lay_out.index[tuple(new)]] = c / (new[var] if isinstance(c, (float, complex)) else mpq(new[var]))
        return TruncatedSeries(self.nvars, out_order, coeffs)

    def compose(self, gs: Sequence["TruncatedSeries"], polynomial: bool = False) -> "TruncatedSeries":
        return series_compose(self, gs, polynomial=polynomial)

    def evaluate(self, point: Sequence):
        """Sum of the stored terms at ``point`` (the truncated polynomial)."""
        if len(point) != self.nvars:
            raise SeriesError("point has the wrong number of coordinates")
        total = 0 * self.coeffs[0]
        for i, mono in enumerate(self.layout.monomials):
            c = self.coeffs[i]
            if c != 0:
                term = c
                for x, e in zip(point, mono):
                    if e:
                        term = term * x ** e
                total = total + term
        return total

    # -- comparison / display ------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, TruncatedSeries):
            return self.nvars == other.nvars and self.order == other.order and self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash((self.nvars, self.order, self.coeffs))

    def __repr__(self):
        names = ["x"] if self.nvars == 1 else [f"x{i + 1}" for i in range(self.nvars)]
        parts = []
        for mono, c in self.terms().items():
            mon = "*".join(f"{names[i]}^{e}" if e > 1 else names[i] for i, e in enumerate(mono) if e)
            parts.append(f"{c}*{mon}" if mon else f"{c}")
        body = " + ".join(parts) if parts else "0"
        return f"{body} + O({self.order + 1})"


def _field_of(s: TruncatedSeries) -> ScalarField:
    return EXACT if s.is_exact() else FLOAT


# --- the four kernel operations ---------------------------------------------

def series_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Cauchy product truncated to min(a.order, b.order)."""
    if a.nvars != b.nvars:
        raise SeriesError(f"variable-count mismatch: {a.nvars} vs {b.nvars}")
    t = min(a.order, b.order)
    lay = layout(a.nvars, t)
    n = lay.size
    ac = a.coeffs[:n]
    bnz = [(pb, cb) for pb, cb in enumerate(b.coeffs[:n]) if cb != 0]
    out = [0 * ac[0]] * n
    if not bnz:
        return TruncatedSeries(a.nvars, t, out)
    for pa, ca in enumerate(ac):
        if ca == 0:
            continue
        row = lay.product_row(pa)
        lim = len(row)
        for pb, cb in bnz:
            if pb >= lim:
                break
            k = row[pb]
            out[k] = out[k] + ca * cb
    return TruncatedSeries(a.nvars, t, out)


def series_diff(f: TruncatedSeries, var: int) -> TruncatedSeries:
    """Formal partial derivative; the result has order T - 1."""
    if not 0 <= var < f.nvars:
        raise SeriesError(f"variable index {var} out of range for {f.nvars} variables")
    if f.order == 0:
        raise SeriesError("cannot differentiate an order-0 series")
    t = f.order - 1
    lay_out = layout(f.nvars, t)
    lay_in = f.layout
    out = []
    for mono in lay_out.monomials:
        up = list(mono)
        up[var] += 1
        c = f.coeffs[lay_in.index[tuple(up)]]
        out.append(c * up[var])
    return TruncatedSeries(f.nvars, t, out)


def series_compose(f: TruncatedSeries, gs: Sequence[TruncatedSeries], polynomial: bool = False) -> TruncatedSeries:
    """f(g_1, ..., g_m).

    If every g_i has zero constant term the result is valid through
    min(f.order, g_i.order).  Otherwise ``f`` must be declared a polynomial
    (its stored terms are all of it) and the result is valid through
    min(g_i.order).
    """
    gs = tuple(gs)
    if len(gs) != f.nvars:
        raise SeriesError(f"need {f.nvars} substitutions, got {len(gs)}")
    if not gs:
        raise SeriesError("nothing to compose with")
    nv = gs[0].nvars
    if any(g.nvars != nv for g in gs):
        raise SeriesError("substituted series disagree on the number of variables")
    centred = all(g.coeffs[0] == 0 for g in gs)
    if not centred and not polynomial:
        raise SeriesError("substitution with nonzero constant term requires a polynomial outer series")
    t = min(g.order for g in gs)
    if centred and not polynomial:
        t = min(t, f.order)
    gs = tuple(g.truncate(t) for g in gs)
    field = EXACT if f.is_exact() and all(g.is_exact() for g in gs) else FLOAT
    one = TruncatedSeries.constant(1, nv, t, field)
    powers = {MultiIndex.zero(f.nvars): one}

    def power(mono):
        p = powers.get(mono)
        if p is None:
            i = next(k for k, e in enumerate(mono) if e)
            prev = list(mono)
            prev[i] -= 1
            p = power(MultiIndex(prev)) * gs[i]
            powers[mono] = p
        return p

    acc = [0 * one.coeffs[0]] * one.layout.size
    for k, mono in enumerate(f.layout.monomials):
        c = f.coeffs[k]
        if c == 0:
            continue
        if centred and mono.degree > t:
            break
        p = power(mono)
        for j, v in enumerate(p.coeffs):
            if v != 0:
                acc[j] = acc[j] + c * v
    return TruncatedSeries(nv, t, acc)


def identity_map(nvars: int, order: int, field: ScalarField = EXACT) -> tuple:
    return tuple(TruncatedSeries.variable(i, nvars, order, field) for i in range(nvars))


def linear_part(gs: Sequence[TruncatedSeries]) -> list:
    """Jacobian at the origin as a list of rows: J[i][j] = d g_i / d x_j (0)."""
    n = gs[0].nvars
    return [[g[MultiIndex.unit(n, j)] for j in range(n)] for g in gs]


def series_invert_map(gs: Sequence[TruncatedSeries]) -> tuple:
    """Compositional inverse of a map fixing the origin.

    Uses the fixed-Jacobian iteration h <- h - J0^{-1} (g o h - id); each step
    gains at least one order, so at most T steps are needed.
    """
    gs = tuple(gs)
    n = len(gs)
    if any(g.nvars != n for g in gs):
        raise SeriesError("a map of C^n must have n components in n variables")
    if any(g.coeffs[0] != 0 for g in gs):
        raise SeriesError("map does not fix the origin")
    t = min(g.order for g in gs)
    gs = tuple(g.truncate(t) for g in gs)
    j0 = linear_part(gs)
    try:
        j0inv = linalg.inverse(j0)
    except linalg.SingularMatrixError as exc:
        raise SeriesError("Jacobian at the origin is singular") from exc
    field = EXACT if all(g.is_exact() for g in gs) else FLOAT
    ident = identity_map(n, t, field)

    def apply_j0inv(vec):
        return tuple(sum((vec[k].scale(j0inv[i][k]) for k in range(n)), TruncatedSeries.zero(n, t, field))
                     for i in range(n))

    h = apply_j0inv(ident)
    for _ in range(t + 1):
        resid = tuple(series_compose(g, h) - x for g, x in zip(gs, ident))
        if field.is_exact:
            done = all(r.is_zero() for r in resid)
        else:
            done = all(r.is_zero(tol=1e-15 * (1 + g.max_abs())) for r, g in zip(resid, gs))
        if done:
            break
        step = apply_j0inv(resid)
        h = tuple(a - b for a, b in zip(h, step))
    return h


def compose_maps(fs: Sequence[TruncatedSeries], gs: Sequence[TruncatedSeries]) -> tuple:
    """(f o g) for maps given componentwise."""
    return tuple(series_compose(f, gs) for f in fs)


# --- matrices of series ------------------------------------------------------

class SeriesMatrix:
    """Rectangular matrix of series sharing ``nvars``."""

    __slots__ = ("entries",)

    def __init__(self, entries: Sequence[Sequence[TruncatedSeries]]):
        rows = tuple(tuple(r) for r in entries)
        if not rows or not rows[0]:
            raise SeriesError("empty series matrix")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise SeriesError("ragged series matrix")
        nv = rows[0][0].nvars
        if any(e.nvars != nv for r in rows for e in r):
            raise SeriesError("entries disagree on the number of variables")
        self.entries = rows

    @classmethod
    def identity(cls, n: int, nvars: int, order: int, field: ScalarField = EXACT) -> "SeriesMatrix":
        return cls([[TruncatedSeries.constant(1 if i == j else 0, nvars, order, field) for j in range(n)]
                    for i in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int, nvars: int, order: int, field: ScalarField = EXACT) -> "SeriesMatrix":
        z = TruncatedSeries.zero(nvars, order, field)
        return cls([[z] * cols for _ in range(rows)])

    @classmethod
    def constant(cls, values, nvars: int, order: int, field: ScalarField = EXACT) -> "SeriesMatrix":
        return cls([[TruncatedSeries.constant(v, nvars, order, field) for v in row] for row in values])

    @property
    def shape(self):
        return len(self.entries), len(self.entries[0])

    @property
    def nvars(self) -> int:
        return self.entries[0][0].nvars

    @property
    def order(self) -> int:
        return min(e.order for r in self.entries for e in r)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def rows(self):
        return self.entries

    def map(self, fn) -> "SeriesMatrix":
        return SeriesMatrix([[fn(e) for e in r] for r in self.entries])

    def truncate(self, order: int) -> "SeriesMatrix":
        return self.map(lambda e: e.truncate(min(order, e.order)))

    def transpose(self) -> "SeriesMatrix":
        return SeriesMatrix(list(zip(*self.entries)))

    @property
    def T(self) -> "SeriesMatrix":
        return self.transpose()

    def diff(self, var: int) -> "SeriesMatrix":
        return self.map(lambda e: e.diff(var))

    def set_zero(self, variables) -> "SeriesMatrix":
        return self.map(lambda e: e.set_zero(variables))

    def constant_matrix(self) -> list:
        return [[e.coeffs[0] for e in r] for r in self.entries]

    def trace(self) -> TruncatedSeries:
        n = min(self.shape)
        out = self.entries[0][0]
        for i in range(1, n):
            out = out + self.entries[i][i]
        return out

    def _check(self, other: "SeriesMatrix"):
        if self.shape != other.shape:
            raise SeriesError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other: "SeriesMatrix") -> "SeriesMatrix":
        self._check(other)
        return SeriesMatrix([[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)])

    def __sub__(self, other: "SeriesMatrix") -> "SeriesMatrix":
        self._check(other)
        return SeriesMatrix([[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)])

    def __neg__(self) -> "SeriesMatrix":
        return self.map(lambda e: -e)

    def scale(self, c) -> "SeriesMatrix":
        return self.map(lambda e: e * c)

    def __matmul__(self, other: "SeriesMatrix") -> "SeriesMatrix":
        r, k = self.shape
        k2, c = other.shape
        if k != k2:
            raise SeriesError(f"cannot multiply {self.shape} by {other.shape}")
        out = []
        for i in range(r):
            row = []
            for j in range(c):
                acc = None
                t = None
                for m in range(k):
                    a = self.entries[i][m]
                    b = other.entries[m][j]
                    t = min(a.order, b.order) if t is None else min(t, a.order, b.order)
                    if a.is_zero() or b.is_zero():
                        continue
                    term = a * b
                    acc = term if acc is None else acc + term
                if acc is None:
                    acc = TruncatedSeries.zero(self.nvars, t, _field_of(self.entries[i][0]))
                row.append(acc.truncate(min(t, acc.order)))
            out.append(row)
        return SeriesMatrix(out)

    def __mul__(self, other):
        if isinstance(other, SeriesMatrix):
            return self @ other
        if isinstance(other, TruncatedSeries):
            return self.map(lambda e: e * other)
        return self.scale(other)

    __rmul__ = __mul__

    def apply(self, vec: Sequence[TruncatedSeries]) -> tuple:
        r, k = self.shape
        if len(vec) != k:
            raise SeriesError("vector length does not match the matrix")
        out = []
        for i in range(r):
            acc = self.entries[i][0] * vec[0]
            for m in range(1, k):
                acc = acc + self.entries[i][m] * vec[m]
            out.append(acc)
        return tuple(out)

    def compose(self, gs, polynomial: bool = False) -> "SeriesMatrix":
        return self.map(lambda e: series_compose(e, gs, polynomial=polynomial))

    def inverse(self) -> "SeriesMatrix":
        """Matrix inverse by Newton iteration X <- X + X (I - G X)."""
        r, c = self.shape
        if r != c:
            raise SeriesError("only square matrices can be inverted")
        try:
            x0 = linalg.inverse(self.constant_matrix())
        except linalg.SingularMatrixError as exc:
            raise SeriesError("matrix is singular at the origin") from exc
        t = self.order
        field = EXACT if all(e.is_exact() for rr in self.entries for e in rr) else FLOAT
        ident = SeriesMatrix.identity(r, self.nvars, t, field)
        x = SeriesMatrix.constant(x0, self.nvars, t, field)
        prec = 1
        g = self.truncate(t)
        while prec <= t:
            x = x + x @ (ident - g @ x)
            prec *= 2
        return x

    def is_zero(self, through: int | None = None, tol: float = 0.0) -> bool:
        return all(e.is_zero(through, tol) for r in self.entries for e in r)

    def max_abs(self, through: int | None = None) -> float:
        return max(e.max_abs(through) for r in self.entries for e in r)

    def agrees(self, other: "SeriesMatrix", through: int | None = None) -> bool:
        return (self - other).is_zero(through)

    def __eq__(self, other):
        if isinstance(other, SeriesMatrix):
            return self.entries == other.entries
        return NotImplemented

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        return "SeriesMatrix([\n" + ",\n".join("  [" + ", ".join(map(repr, r)) + "]" for r in self.entries) + "\n])"


def kron(a: SeriesMatrix, b: SeriesMatrix) -> SeriesMatrix:
    ra, ca = a.shape
    rb, cb = b.shape
    return SeriesMatrix([[a[i // rb, j // cb] * b[i % rb, j % cb] for j in range(ca * cb)]
                         for i in range(ra * rb)])


# --- seeded generators ------------------------------------------------------

def random_series(rng: random.Random, nvars: int, order: int, *, max_degree: int | None = None,
                  density: float = 1.0, zero_constant: bool = False,
                  constant: object | None = None) -> TruncatedSeries:
    """Exact series with coefficients p/q, p and q drawn from [-9, 9] (q != 0)."""
    lay = layout(nvars, order)
    top = order if max_degree is None else min(order, max_degree)
    coeffs = []
    for i in range(lay.size):
        d = lay.degrees[i]
        if d > top or (d == 0 and zero_constant) or (density < 1.0 and rng.random() > density):
            coeffs.append(mpq(0))
        else:
            coeffs.append(random_rational(rng))
    if constant is not None:
        coeffs[0] = exact(constant)
    return TruncatedSeries(nvars, order, coeffs)
