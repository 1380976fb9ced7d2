"""The ring of k-jets on a coordinate chart.

An element of J^k is stored as a family of coefficient functions (truncated
series in the base coordinates) indexed by multi-indices of degree <= k, in one
of two bases:

* ``"B1"``: the monomial jets d^k(x^i);
* ``"B2"``: the monomials zeta^i, where zeta_m = d^k(x_m) - x_m.

Coefficients act through the left structure, so ``sum c_i zeta^i`` really is a
polynomial in zeta with function coefficients, truncated above degree k.
Restricting the multi-indices to a subset of the variables gives the
transverse jets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from gmpy2 import mpq

from .multiindex import MultiIndex, restricted
from .series import SeriesError, SeriesMatrix, TruncatedSeries, series_invert_map, compose_maps

BASES = ("B1", "B2")


class JetError(ValueError):
    pass


@dataclass(frozen=True)
class JetRing:
    """J^k in ``nvars`` base variables; ``jet_vars`` are the directions jets are taken in."""

    nvars: int
    jet_order: int
    jet_vars: tuple = None

    def __post_init__(self):
        if self.jet_order < 0:
            raise JetError("jet order must be non-negative")
        jv = tuple(range(self.nvars)) if self.jet_vars is None else tuple(sorted(set(self.jet_vars)))
        if any(not 0 <= v < self.nvars for v in jv):
            raise JetError(f"jet variables {jv} are not a subset of the {self.nvars} base variables")
        object.__setattr__(self, "jet_vars", jv)

    @property
    def indices(self) -> tuple:
        return restricted(self.nvars, self.jet_order, self.jet_vars)

    @property
    def rank(self) -> int:
        return len(self.indices)

    def lower(self) -> "JetRing":
        if self.jet_order == 0:
            raise JetError("J^0 has no lower truncation")
        return JetRing(self.nvars, self.jet_order - 1, self.jet_vars)


def monomial(mono: Sequence[int], nvars: int, order: int) -> TruncatedSeries:
    return TruncatedSeries.from_dict({tuple(mono): 1}, nvars, order)


class JetElement:
    __slots__ = ("ring", "basis", "coeffs")

    def __init__(self, ring: JetRing, basis: str, coeffs: Sequence[TruncatedSeries]):
        if basis not in BASES:
            raise JetError(f"unknown basis tag {basis!r}")
        coeffs = tuple(coeffs)
        if len(coeffs) != ring.rank:
            raise JetError(f"{ring.rank} coefficients expected, got {len(coeffs)}")
        if any(c.nvars != ring.nvars for c in coeffs):
            raise JetError("coefficient series live in the wrong number of variables")
        self.ring = ring
        self.basis = basis
        self.coeffs = coeffs

    @classmethod
    def from_terms(cls, ring: JetRing, basis: str, terms: dict, order: int) -> "JetElement":
        zero = TruncatedSeries.zero(ring.nvars, order)
        by_index = {MultiIndex(k): v for k, v in terms.items()}
        for k in by_index:
            if k not in ring.indices:
                raise JetError(f"multi-index {tuple(k)} is not a basis index of this ring")
        return cls(ring, basis, [by_index.get(i, zero) for i in ring.indices])

    @classmethod
    def basis_element(cls, ring: JetRing, basis: str, mono, order: int) -> "JetElement":
        return cls.from_terms(ring, basis, {tuple(mono): TruncatedSeries.constant(1, ring.nvars, order)}, order)

    def coefficient(self, mono) -> TruncatedSeries:
        return self.coeffs[self.ring.indices.index(MultiIndex(mono))]

    def terms(self) -> dict:
        return {i: c for i, c in zip(self.ring.indices, self.coeffs) if not c.is_zero()}

    @property
    def order(self) -> int:
        """Base-series order through which every coefficient is valid."""
        return min(c.order for c in self.coeffs)

    def to(self, basis: str) -> "JetElement":
        return basis_change(self, basis)

    def _same_ring(self, other: "JetElement"):
        if not isinstance(other, JetElement) or other.ring != self.ring:
            raise JetError("jet elements belong to different rings")

    def __add__(self, other: "JetElement") -> "JetElement":
        self._same_ring(other)
        o = other.to(self.basis)
        return JetElement(self.ring, self.basis, [a + b for a, b in zip(self.coeffs, o.coeffs)])

    def __sub__(self, other: "JetElement") -> "JetElement":
        self._same_ring(other)
        o = other.to(self.basis)
        return JetElement(self.ring, self.basis, [a - b for a, b in zip(self.coeffs, o.coeffs)])

    def __neg__(self) -> "JetElement":
        return JetElement(self.ring, self.basis, [-c for c in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, JetElement):
            return jet_mul(self, other)
        return JetElement(self.ring, self.basis, [c * other for c in self.coeffs])

    def __rmul__(self, other):
        return JetElement(self.ring, self.basis, [c * other for c in self.coeffs])

    def is_zero(self, through: int | None = None) -> bool:
        return all(c.is_zero(through) for c in self.coeffs)

    def agrees(self, other: "JetElement", through: int | None = None) -> bool:
        self._same_ring(other)
        return (self - other).is_zero(through)

    def __repr__(self):
        sym = "d" if self.basis == "B1" else "zeta"
        parts = [f"({c})*{sym}^{tuple(i)}" for i, c in self.terms().items()]
        return f"JetElement[{self.basis}, k={self.ring.jet_order}](" + " + ".join(parts or ["0"]) + ")"


# --- the k-jet map ------------------------------------------------------------

def jet_of_function(f: TruncatedSeries, k: int, transverse_vars: Sequence[int] | None = None) -> JetElement:
    """d^k(f) in the zeta basis: the zeta^i coefficient is (1/i!) d^i f / dx^i."""
    if k < 0:
        raise JetError("jet order must be non-negative")
    ring = JetRing(f.nvars, k, None if transverse_vars is None else tuple(transverse_vars))
    if f.order < k:
        raise JetError(f"series of order {f.order} cannot carry a {k}-jet")
    coeffs = []
    cache = {MultiIndex.zero(f.nvars): f}
    for mono in ring.indices:
        d = cache.get(mono)
        if d is None:
            i = next(v for v, e in enumerate(mono) if e)
            prev = list(mono)
            prev[i] -= 1
            d = cache[MultiIndex(prev)].diff(i)
            cache[mono] = d
        coeffs.append(d / mpq(mono.factorial()) if mono.degree else d)
    return JetElement(ring, "B2", coeffs)


def d_k(f: TruncatedSeries, k: int, transverse_vars=None) -> JetElement:
    return jet_of_function(f, k, transverse_vars)


# --- change of basis ----------------------------------------------------------

def change_matrix(ring: JetRing, source: str, target: str, order: int) -> SeriesMatrix:
    """Matrix taking coefficient vectors in ``source`` to ``target``.

    B1 -> B2 uses d^k(x^i) = sum_j C(i, j) x^(i-j) zeta^j; the reverse direction
    uses zeta^i = sum_j (-1)^|i-j| C(i, j) x^(i-j) d^k(x^j).
    """
    idx = ring.indices
    n = ring.nvars
    zero = TruncatedSeries.zero(n, order)
    rows = []
    signed = (source, target) == ("B2", "B1")
    if source == target:
        return SeriesMatrix.identity(len(idx), n, order)
    if {source, target} != set(BASES):
        raise JetError(f"unknown basis pair {source!r} -> {target!r}")
    for j in idx:
        row = []
        for i in idx:
            if i.dominates(j):
                gap = i.minus(j)
                c = i.binomial(j)
                if signed and gap.degree % 2:
                    c = -c
                row.append(monomial(gap, n, order).scale(mpq(c)) if gap.degree <= order else zero)
            else:
                row.append(zero)
        rows.append(row)
    return SeriesMatrix(rows)


def basis_change(e: JetElement, target: str) -> JetElement:
    if target not in BASES:
        raise JetError(f"unknown basis tag {target!r}")
    if e.basis == target:
        return e
    idx = e.ring.indices
    n = e.ring.nvars
    signed = target == "B1"
    out = []
    for j in idx:
        acc = None
        for i, c in zip(idx, e.coeffs):
            if not i.dominates(j) or c.is_zero():
                if acc is None:
                    acc = c.scale(0)
                else:
                    acc = acc.truncate(min(acc.order, c.order))
                continue
            gap = i.minus(j)
            coef = i.binomial(j)
            if signed and gap.degree % 2:
                coef = -coef
            term = c * monomial(gap, n, c.order).scale(mpq(coef))
            acc = term if acc is None else acc + term
        out.append(acc)
    return JetElement(e.ring, target, out)


# --- ring structure -----------------------------------------------------------

def jet_mul(a: JetElement, b: JetElement) -> JetElement:
    """Product in J^k; zeta-monomials above degree k vanish."""
    a._same_ring(b)
    ring = a.ring
    x, y = a.to("B2"), b.to("B2")
    index = {m: p for p, m in enumerate(ring.indices)}
    k = ring.jet_order
    acc = [None] * ring.rank
    order = min(x.order, y.order)
    for i, ci in zip(ring.indices, x.coeffs):
        if ci.is_zero():
            continue
        for j, cj in zip(ring.indices, y.coeffs):
            if i.degree + j.degree > k or cj.is_zero():
                continue
            p = index[i.plus(j)]
            term = ci * cj
            acc[p] = term if acc[p] is None else acc[p] + term
    zero = TruncatedSeries.zero(ring.nvars, order)
    out = JetElement(ring, "B2", [c if c is not None else zero for c in acc])
    return out.to(a.basis)


def truncate_jet(e: JetElement) -> JetElement:
    """The projection J^k -> J^(k-1): drop the zeta-monomials of degree k."""
    lower = e.ring.lower()
    z = e.to("B2")
    keep = [c for i, c in zip(e.ring.indices, z.coeffs) if i.degree < e.ring.jet_order]
    return JetElement(lower, "B2", keep).to(e.basis)


def inject_symbol(forms: Sequence[Sequence[TruncatedSeries]], ring: JetRing) -> JetElement:
    """Image of the symmetric product of 1-forms omega_1 ... omega_k in J^k.

    Each form is given by its components (a_0, ..., a_{n-1}) on dx_0, ..., dx_{n-1};
    the image is prod_m (sum_i a_{m,i} zeta_i), a pure degree-k element.
    """
    k = ring.jet_order
    if len(forms) != k:
        raise JetError(f"a symbol of J^{k} is a product of exactly {k} one-forms, got {len(forms)}")
    n = ring.nvars
    for form in forms:
        if len(form) != n:
            raise JetError("one-form has the wrong number of components")
        for v, a in enumerate(form):
            if v not in ring.jet_vars and not a.is_zero():
                raise JetError(f"one-form has a component along dx_{v}, which is not a jet direction")
    order = min(a.order for form in forms for a in form)
    one = TruncatedSeries.constant(1, n, order)
    poly = {MultiIndex.zero(n): one}
    for form in forms:
        nxt = {}
        for mono, c in poly.items():
            for v in ring.jet_vars:
                a = form[v]
                if a.is_zero():
                    continue
                m2 = mono.plus(MultiIndex.unit(n, v))
                term = c * a
                nxt[m2] = nxt[m2] + term if m2 in nxt else term
        poly = nxt
    zero = TruncatedSeries.zero(n, order)
    return JetElement(ring, "B2", [poly.get(i, zero) for i in ring.indices])


def inject_differentials(fs: Sequence[TruncatedSeries], ring: JetRing) -> JetElement:
    """prod_i (d^k(f_i) - f_i), computed inside the jet ring."""
    k = ring.jet_order
    if len(fs) != k:
        raise JetError(f"need exactly {k} functions, got {len(fs)}")
    out = None
    for f in fs:
        jf = jet_of_function(f, k, ring.jet_vars)
        shifted = jf - JetElement.basis_element(ring, "B2", MultiIndex.zero(ring.nvars), f.order) * f
        out = shifted if out is None else out * shifted
    return out


def differential(f: TruncatedSeries) -> tuple:
    """Components of df on dx_0, ..., dx_{n-1}."""
    return tuple(f.diff(i) for i in range(f.nvars))


# --- first prolongation of a bundle map ----------------------------------------

@dataclass(frozen=True)
class ProlongedMapData:
    """Prolongation of the pushforward by a local diffeomorphism phi.

    Fibre coordinates (z, w) describe the 1-jet of a vector field sum f_k d/dx_k:
    z_j = f_j and w[j1][j2] = d f_j2 / d x_j1.  The prolonged map sends them to

      z'_j = sum_i J[j][i] z_i,
      w'_{j1 j2} = sum_{i1,i2} P[j1][i1] J[j2][i2] w_{i1 i2}
                   + sum_i (sum_k P[j1][k] d^2 phi_j2 / dx_k dx_i) z_i,

    where J is the Jacobian of phi and P[j1][k] = (d (phi^-1)_k / d y_j1) o phi.
    """

    base_map: tuple
    jacobian: SeriesMatrix
    inverse_jacobian: SeriesMatrix
    w_part: tuple   # w_part[j1][j2][i1][i2]
    z_part: tuple   # z_part[j1][j2][i]

    @property
    def dim(self) -> int:
        return len(self.base_map)

    def fiber_matrix(self) -> SeriesMatrix:
        """Linear action on (z, w) as one (n + n^2)-square matrix.

        Rows and columns list z_0..z_{n-1} first, then w in row-major order.
        """
        n = self.dim
        order = self.jacobian.order
        zero = TruncatedSeries.zero(self.jacobian.nvars, order)
        rows = []
        for j in range(n):
            rows.append([self.jacobian[j, i] for i in range(n)] + [zero] * (n * n))
        for j1 in range(n):
            for j2 in range(n):
                row = [self.z_part[j1][j2][i] for i in range(n)]
                row += [self.w_part[j1][j2][i1][i2] for i1 in range(n) for i2 in range(n)]
                rows.append(row)
        return SeriesMatrix(rows).truncate(order)

    def apply(self, z: Sequence, w: Sequence[Sequence]) -> tuple:
        """Image (z', w') of fibre data given as series (or scalars)."""
        n = self.dim
        zp = tuple(sum((self.jacobian[j, i] * z[i] for i in range(1, n)), self.jacobian[j, 0] * z[0])
                   for j in range(n))
        wp = []
        for j1 in range(n):
            row = []
            for j2 in range(n):
                acc = self.z_part[j1][j2][0] * z[0]
                for i in range(1, n):
                    acc = acc + self.z_part[j1][j2][i] * z[i]
                for i1 in range(n):
                    for i2 in range(n):
                        acc = acc + self.w_part[j1][j2][i1][i2] * w[i1][i2]
                row.append(acc)
            wp.append(tuple(row))
        return zp, tuple(wp)

    def transport(self, field: Sequence[TruncatedSeries]) -> tuple:
        """Apply to the 1-jet of a vector field, returning series in the source coordinates."""
        n = self.dim
        w = [[field[j2].diff(j1) for j2 in range(n)] for j1 in range(n)]
        return self.apply(tuple(field), w)

    def at_origin(self) -> tuple:
        """Constant terms (J, z_part, w_part) as nested lists of scalars."""
        n = self.dim
        J = self.jacobian.constant_matrix()
        zp = [[[self.z_part[a][b][i].coeffs[0] for i in range(n)] for b in range(n)] for a in range(n)]
        wp = [[[[self.w_part[a][b][i][j].coeffs[0] for j in range(n)] for i in range(n)]
               for b in range(n)] for a in range(n)]
        return J, zp, wp


def prolong_map_1(phi: Sequence[TruncatedSeries]) -> ProlongedMapData:
    """Prolongation data for a map of (C^n, 0) with invertible Jacobian at 0.

    The factor P is obtained by differentiating the compositional inverse of
    phi and composing back with phi.
    """
    phi = tuple(phi)
    n = len(phi)
    if n == 0 or any(p.nvars != n for p in phi):
        raise JetError("phi must be a map C^n -> C^n given by n series in n variables")
    try:
        inv = series_invert_map(phi)
    except SeriesError as exc:
        raise JetError(str(exc)) from exc
    J = SeriesMatrix([[phi[j].diff(i) for i in range(n)] for j in range(n)])
    # P[j1][k] = d(phi^-1)_k / dy_j1, pulled back along phi
    dinv = [[inv[k].diff(j1) for k in range(n)] for j1 in range(n)]
    P = SeriesMatrix([list(compose_maps(row, phi)) for row in dinv])
    hess = [[[phi[j2].diff(k).diff(i) for i in range(n)] for k in range(n)] for j2 in range(n)]
    w_part = tuple(tuple(tuple(tuple(P[j1, i1] * J[j2, i2] for i2 in range(n)) for i1 in range(n))
                         for j2 in range(n)) for j1 in range(n))
    z_part = []
    for j1 in range(n):
        per_j2 = []
        for j2 in range(n):
            per_i = []
            for i in range(n):
                acc = P[j1, 0] * hess[j2][0][i]
                for k in range(1, n):
                    acc = acc + P[j1, k] * hess[j2][k][i]
                per_i.append(acc)
            per_j2.append(tuple(per_i))
        z_part.append(tuple(per_j2))
    return ProlongedMapData(phi, J, P, w_part, tuple(z_part))
