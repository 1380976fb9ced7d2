"""Monic linear ODE systems in one transverse variable and the Schwarzian.

A :class:`TransverseEquation` of order k and rank r stands for

    f_l^(k) + sum_{i < k, j} a[i][j][l](x) f_j^(i) = 0,    l = 1..r,

with univariate series coefficients.  Initial data and jet vectors are
flattened with index ``j * k + i`` (function first, then derivative order).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Sequence

from gmpy2 import mpq

from .series import SeriesMatrix, TruncatedSeries


class ODEError(ValueError):
    pass


def _check_univariate(s: TruncatedSeries, what: str):
    if not isinstance(s, TruncatedSeries) or s.nvars != 1:
        raise ODEError(f"{what} must be a series in the single variable x1")


@dataclass(frozen=True)
class TransverseEquation:
    order: int
    rank: int
    coefficients: tuple  # coefficients[i][j][l]

    def __post_init__(self):
        if self.order < 1 or self.rank < 1:
            raise ODEError("order and rank must be at least 1")
        coeffs = tuple(tuple(tuple(col) for col in row) for row in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        if len(coeffs) != self.order or any(len(r) != self.rank for r in coeffs) or \
                any(len(c) != self.rank for r in coeffs for c in r):
            raise ODEError("coefficients must be indexed [i < k][j < r][l < r]")
        for r in coeffs:
            for c in r:
                for s in c:
                    _check_univariate(s, "coefficient")

    @classmethod
    def second_order(cls, a: TruncatedSeries, b: TruncatedSeries) -> "TransverseEquation":
        """f'' + a f' + b f = 0."""
        return cls(2, 1, (((b,),), ((a,),)))

    @classmethod
    def first_order_system(cls, m: Sequence[Sequence[TruncatedSeries]]) -> "TransverseEquation":
        """f' = M f, i.e. coefficient a[0][j][l] = -M[l][j]."""
        r = len(m)
        return cls(1, r, ((tuple(tuple(-m[l][j] for l in range(r)) for j in range(r))),))

    @classmethod
    def monic(cls, leading: Sequence[Sequence[TruncatedSeries]], coefficients) -> "TransverseEquation":
        """Accept an explicit leading matrix; only the identity is allowed."""
        r = len(leading)
        for i in range(r):
            for j in range(r):
                s = leading[i][j]
                want = 1 if i == j else 0
                if any(c != (want if n == 0 else 0) for n, c in enumerate(s.coeffs)):
                    raise ODEError("leading coefficient is not the identity (non-monic system)")
        return cls(len(coefficients), r, coefficients)

    @property
    def coeff_order(self) -> int:
        return min(s.order for r in self.coefficients for c in r for s in c)

    @property
    def solution_dim(self) -> int:
        return self.rank * self.order


def solve_ode(eq: TransverseEquation, jets: Sequence, order: int | None = None) -> tuple:
    """Series solution with d^i f_j / dx^i (0) = jets[j * k + i].

    Valid through ``order`` (default: the coefficients' order); the
    coefficients are only needed through order - k.
    """
    k, r = eq.order, eq.rank
    jets = list(jets)
    if len(jets) != r * k:
        raise ODEError(f"need {r * k} initial values, got {len(jets)}")
    t = eq.coeff_order if order is None else order
    if t > eq.coeff_order + k:
        raise ODEError("coefficients are not known to high enough order")
    if t > 16:
        raise ODEError("solution order above 16")
    zero = jets[0] * 0 if jets else mpq(0)
    c = [[zero] * (t + 1) for _ in range(r)]
    for j in range(r):
        for i in range(min(k, t + 1)):
            c[j][i] = jets[j * k + i] / factorial(i) if not isinstance(jets[j * k + i], int) \
                else mpq(jets[j * k + i], factorial(i))
    coeffs = eq.coefficients
    for m in range(0, t - k + 1):
        # coefficient of x^m in f_l^(k)
        for l in range(r):
            acc = zero
            for i in range(k):
                for j in range(r):
                    a = coeffs[i][j][l].coeffs
                    for s in range(m + 1):
                        if a[s] == 0:
                            continue
                        tt = m - s
                        fd = c[j][tt + i]
                        if fd != 0:
                            acc = acc + a[s] * fd * (factorial(tt + i) // factorial(tt))
            c[l][m + k] = -acc / (factorial(m + k) // factorial(m))
    return tuple(TruncatedSeries(1, t, c[l]) for l in range(r))


def fundamental_basis(eq: TransverseEquation, order: int | None = None) -> list:
    """Solutions whose initial-jet matrix is the identity, in flattened index order."""
    n = eq.solution_dim
    out = []
    for e in range(n):
        jets = [mpq(1) if idx == e else mpq(0) for idx in range(n)]
        out.append(solve_ode(eq, jets, order))
    return out


def initial_jet_matrix(solutions: Sequence[Sequence[TruncatedSeries]], k: int) -> list:
    """Rows = solutions, columns = d^i f_j(0) flattened as j * k + i."""
    rows = []
    for sol in solutions:
        row = []
        for f in sol:
            for i in range(k):
                row.append(f.coeffs[i] * factorial(i) if i <= f.order else mpq(0))
        rows.append(row)
    return rows


def jet_vector(sol: Sequence[TruncatedSeries], k: int) -> tuple:
    """(f_j^(i)) as series, flattened j * k + i; valid through order T - k + 1."""
    out = []
    for f in sol:
        g = f
        for i in range(k):
            out.append(g)
            if i < k - 1:
                g = g.diff(0)
    t = min(v.order for v in out)
    return tuple(v.truncate(t) for v in out)


@dataclass(frozen=True)
class ExtensionConnection:
    """Connection d/dx1 + M on jet vectors v = (f_j^(i)); kernel: v' + M v = 0."""
    size: int
    matrix: SeriesMatrix

    @property
    def trace(self) -> TruncatedSeries:
        return self.matrix.trace()

    def residual(self, v: Sequence[TruncatedSeries]) -> tuple:
        dv = [s.diff(0) for s in v]
        mv = self.matrix.apply(v)
        return tuple(a + b.truncate(a.order) for a, b in zip(dv, mv))


def induced_extension(eq: TransverseEquation) -> ExtensionConnection:
    """Companion-form connection whose flat sections are the jet vectors of solutions.

    For k = 2, r = 1 this is [[0, -1], [b, a]], with trace a.
    """
    k, r = eq.order, eq.rank
    m = r * k
    t = eq.coeff_order
    zero = TruncatedSeries.zero(1, t)
    minus_one = TruncatedSeries.constant(-1, 1, t)
    rows = [[zero] * m for _ in range(m)]
    for j in range(r):
        for i in range(k - 1):
            rows[j * k + i][j * k + i + 1] = minus_one
    for l in range(r):
        for j in range(r):
            for i in range(k):
                rows[l * k + k - 1][j * k + i] = eq.coefficients[i][j][l].truncate(t)
    return ExtensionConnection(m, SeriesMatrix(rows))


# --- Schwarzian calculus ----------------------------------------------------

def schwarzian(f: TruncatedSeries) -> TruncatedSeries:
    """(f' f'''/6 - (f''/2)^2) / f'^2, valid through order T - 3."""
    _check_univariate(f, "f")
    if f.order < 3:
        raise ODEError("need at least order 3 to form the Schwarzian")
    d1 = f.diff(0)
    if d1.coeffs[0] == 0:
        raise ODEError("critical germ: f'(0) = 0")
    d2 = d1.diff(0)
    d3 = d2.diff(0)
    t = d3.order
    d1, d2 = d1.truncate(t), d2.truncate(t)
    num = d1 * d3 / 6 - (d2 * d2) / 4
    return num * (d1 * d1).reciprocal()


def schwarzian_ratio(f1: TruncatedSeries, f2: TruncatedSeries) -> TruncatedSeries:
    """Schwarzian of f1/f2, or of f2/f1 when f2(0) = 0 (same value by Mobius invariance)."""
    _check_univariate(f1, "f1")
    _check_univariate(f2, "f2")
    d = f1.coeffs[0] * f2.coeffs[1] - f1.coeffs[1] * f2.coeffs[0]
    if d == 0:
        raise ODEError("the 1-jets of f1 and f2 are linearly dependent")
    t = min(f1.order, f2.order)
    f1, f2 = f1.truncate(t), f2.truncate(t)
    if f2.coeffs[0] != 0:
        return schwarzian(f1 * f2.reciprocal())
    return schwarzian(f2 * f1.reciprocal())


def cocycle_defect(f1: TruncatedSeries, f2: TruncatedSeries) -> TruncatedSeries:
    """Theta(f1 o f2) - Theta(f1) o f2 * f2'^2 - Theta(f2)."""
    _check_univariate(f1, "f1")
    _check_univariate(f2, "f2")
    if f2.coeffs[0] != 0:
        raise ODEError("inner germ must fix the origin")
    comp = f1.compose([f2])
    lhs = schwarzian(comp)
    d2 = f2.diff(0)
    mid = schwarzian(f1).compose([f2.truncate(f1.order - 3)])
    t = min(lhs.order, mid.order)
    return lhs.truncate(t) - mid.truncate(t) * (d2 * d2).truncate(t) - schwarzian(f2).truncate(t)


# --- affine / projective data -------------------------------------------------

@dataclass(frozen=True)
class ProjectiveDatum:
    a: TruncatedSeries
    c: TruncatedSeries


def _common(a: TruncatedSeries, other: TruncatedSeries):
    _check_univariate(a, "a")
    _check_univariate(other, "second coefficient")
    da = a.diff(0)
    t = min(da.order, other.order)
    return a.truncate(t), da.truncate(t), other.truncate(t)


def ode_to_projective(a: TruncatedSeries, b: TruncatedSeries) -> ProjectiveDatum:
    """c = b/3 - (a^2 + 2a')/12; valid through min(T_a - 1, T_b)."""
    a_, da, b_ = _common(a, b)
    return ProjectiveDatum(a_, b_ / 3 - (a_ * a_ + da * 2) / 12)


def projective_to_ode(a: TruncatedSeries, c: TruncatedSeries) -> TruncatedSeries:
    """b = 3c + (a^2 + 2a')/4, the inverse of :func:`ode_to_projective` at fixed a."""
    a_, da, c_ = _common(a, c)
    return c_ * 3 + (a_ * a_ + da * 2) / 4


def wronskian(f1: TruncatedSeries, f2: TruncatedSeries) -> TruncatedSeries:
    d1, d2 = f1.diff(0), f2.diff(0)
    t = d1.order
    return f1.truncate(t) * d2 - f2.truncate(t) * d1
