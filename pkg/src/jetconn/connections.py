"""Flat partial connections on a foliated chart.

Variables are ordered ``x_1..x_q`` (transverse) then ``y_1..y_d`` (along the
leaves).  A rank-r patch is a list of r x r series matrices A_1..A_d, and a
section f (column of r series) is flat when

    d f / d y_k = A_k f      for every k.

Mixed partials of a flat section agree exactly when

    defect_ij = dA_i/dy_j - dA_j/dy_i - (A_j A_i - A_i A_j)

vanishes, which is what :func:`flatness_defect` returns for i < j.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from gmpy2 import mpq

from .multiindex import MultiIndex, restricted
from .series import SeriesError, SeriesMatrix, TruncatedSeries, kron


class ConnectionError_(ValueError):
    """Raised for malformed or non-flat connection data."""


ConnectionDataError = ConnectionError_


@dataclass(frozen=True)
class FoliationChart:
    q: int
    d: int

    def __post_init__(self):
        if self.q < 0:
            raise ConnectionDataError("transverse dimension must be non-negative")
        if self.d < 1:
            raise ConnectionDataError("a chart needs at least one leaf direction (d >= 1)")

    @property
    def num_vars(self) -> int:
        return self.q + self.d

    def x(self, i: int) -> int:
        return i

    def y(self, k: int) -> int:
        """Series variable index of the k-th leaf coordinate (0-based)."""
        return self.q + k

    @property
    def leaf_vars(self) -> tuple:
        return tuple(range(self.q, self.q + self.d))

    @property
    def transverse_vars(self) -> tuple:
        return tuple(range(self.q))


@dataclass(frozen=True)
class ConnectionPatch:
    chart: FoliationChart
    matrices: tuple

    def __post_init__(self):
        mats = tuple(self.matrices)
        object.__setattr__(self, "matrices", mats)
        if len(mats) != self.chart.d:
            raise ConnectionDataError(f"expected {self.chart.d} matrices, got {len(mats)}")
        r = mats[0].shape[0]
        if r == 0:
            raise ConnectionDataError("rank-0 patches are not supported")
        for a in mats:
            if a.shape != (r, r):
                raise ConnectionDataError("connection matrices must be square of a common rank")
            if a.nvars != self.chart.num_vars:
                raise ConnectionDataError("matrix entries do not live on this chart")

    @property
    def rank(self) -> int:
        return self.matrices[0].shape[0]

    @property
    def order(self) -> int:
        return min(a.order for a in self.matrices)


@dataclass(frozen=True)
class PolyVectorField:
    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise ConnectionDataError("empty vector field")
        if any(c.nvars != len(comps) for c in comps):
            raise ConnectionDataError("component count must equal the number of variables")

    @property
    def num_vars(self) -> int:
        return len(self.components)

    @property
    def order(self) -> int:
        return min(c.order for c in self.components)

    def apply(self, f: TruncatedSeries) -> TruncatedSeries:
        """Directional derivative v(f)."""
        out = None
        for i, c in enumerate(self.components):
            term = c * f.diff(i)
            out = term if out is None else out + term
        return out

    def __add__(self, other):
        return PolyVectorField(tuple(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other):
        return PolyVectorField(tuple(a - b for a, b in zip(self.components, other.components)))

    def scale(self, f) -> "PolyVectorField":
        return PolyVectorField(tuple(c * f for c in self.components))

    def is_zero(self, through=None) -> bool:
        return all(c.is_zero(through) for c in self.components)

    @classmethod
    def coordinate(cls, i: int, nvars: int, order: int) -> "PolyVectorField":
        return cls(tuple(TruncatedSeries.constant(1 if j == i else 0, nvars, order) for j in range(nvars)))


def lie_bracket(v: PolyVectorField, w: PolyVectorField) -> PolyVectorField:
    """[v, w] = v(w) - w(v) componentwise; valid through order T - 1."""
    if v.num_vars != w.num_vars:
        raise ConnectionDataError("vector fields live in different numbers of variables")
    return PolyVectorField(tuple(v.apply(wc) - w.apply(vc) for vc, wc in zip(v.components, w.components)))


def flatness_defect(p: ConnectionPatch) -> dict:
    """{(i, j): defect_ij} for 0 <= i < j < d; valid through order T - 1."""
    out = {}
    ys = p.chart.leaf_vars
    for i in range(p.chart.d):
        for j in range(i + 1, p.chart.d):
            ai, aj = p.matrices[i], p.matrices[j]
            out[(i, j)] = ai.diff(ys[j]) - aj.diff(ys[i]) - (aj @ ai - ai @ aj).truncate(ai.order - 1)
    return out


def is_flat(p: ConnectionPatch) -> bool:
    return all(m.is_zero() for m in flatness_defect(p).values())


def _require_flat(p: ConnectionPatch):
    if not is_flat(p):
        raise ConnectionDataError("connection is not flat at the working order")


def _leaf_step(a: SeriesMatrix, var: int, start: SeriesMatrix) -> SeriesMatrix:
    """Solve dF/dy = A F with F = start on {y = 0}, where ``start`` does not depend on y.

    The y-power coefficients are built one degree at a time: the part of
    A F of y-degree m fixes the y-degree m + 1 part of F.
    """
    t = min(a.order, start.order)
    r, c = start.shape
    a = a.truncate(t)
    f = start.truncate(t)
    for _ in range(t):
        rhs = a @ f
        nxt = []
        for i in range(r):
            row = []
            for j in range(c):
                row.append((f[i, j].set_zero([var]) + rhs[i, j].integrate(var).truncate(t)))
            nxt.append(row)
        new = SeriesMatrix(nxt)
        if new == f:
            break
        f = new
    return f


def _solve(p: ConnectionPatch, start: SeriesMatrix) -> SeriesMatrix:
    ys = p.chart.leaf_vars
    f = start
    for k in range(p.chart.d):
        later = ys[k + 1:]
        a = p.matrices[k].set_zero(later) if later else p.matrices[k]
        f = _leaf_step(a, ys[k], f)
    return f


def solve_pfaffian(p: ConnectionPatch, g: Sequence[TruncatedSeries]) -> tuple:
    """Unique f with df/dy_k = A_k f for all k and f(x, 0) = g(x)."""
    g = tuple(g)
    if len(g) != p.rank:
        raise ConnectionDataError(f"initial data must have {p.rank} components")
    for comp in g:
        if comp.nvars != p.chart.num_vars:
            raise ConnectionDataError("initial data lives on the wrong chart")
        if any(comp.depends_on(v) for v in p.chart.leaf_vars):
            raise ConnectionDataError("initial data must depend on the transverse variables only")
    _require_flat(p)
    col = SeriesMatrix([[c] for c in g])
    sol = _solve(p, col)
    return tuple(sol[i, 0] for i in range(p.rank))


def flat_frame(p: ConnectionPatch) -> SeriesMatrix:
    """Fundamental matrix F with dF/dy_k = A_k F and F(x, 0) = Id."""
    _require_flat(p)
    ident = SeriesMatrix.identity(p.rank, p.chart.num_vars, p.order)
    return _solve(p, ident)


def pfaffian_residual(p: ConnectionPatch, f: SeriesMatrix) -> list:
    """[dF/dy_k - A_k F for each k]; exact zero means F solves the system through T - 1."""
    out = []
    for k, y in enumerate(p.chart.leaf_vars):
        lhs = f.diff(y)
        out.append(lhs - (p.matrices[k] @ f).truncate(lhs.order))
    return out


def gauge_connection(chart: FoliationChart, g: SeriesMatrix) -> ConnectionPatch:
    """A_k = (dG/dy_k) G^-1; flat by construction, with G's columns flat sections."""
    if g.nvars != chart.num_vars:
        raise ConnectionDataError("G does not live on this chart")
    try:
        ginv = g.inverse()
    except SeriesError as exc:
        raise ConnectionDataError("G is singular at the origin") from exc
    mats = []
    for y in chart.leaf_vars:
        dg = g.diff(y)
        mats.append(dg @ ginv.truncate(dg.order))
    return ConnectionPatch(chart, tuple(mats))


def zero_patch(chart: FoliationChart, rank: int, order: int) -> ConnectionPatch:
    z = SeriesMatrix.zeros(rank, rank, chart.num_vars, order)
    return ConnectionPatch(chart, (z,) * chart.d)


# --- Bott connection ----------------------------------------------------------

def bott_bracket_matrices(chart: FoliationChart, tangent_frame: Sequence[PolyVectorField],
                          normal_frame: Sequence[PolyVectorField]) -> list:
    """C^a with [v_a, w_b] = sum_c C^a_cb w_c modulo the tangent frame.

    These are the matrices of the Bott derivative acting on the normal frame;
    :func:`bott_patch` returns -C^a, the matrices of the flat-section system.
    """
    tangent_frame = tuple(tangent_frame)
    normal_frame = tuple(normal_frame)
    n = chart.num_vars
    if len(tangent_frame) != chart.d or len(normal_frame) != chart.q:
        raise ConnectionDataError("frame sizes must match the chart dimensions")
    if chart.q == 0:
        raise ConnectionDataError("the normal bundle of a chart with q = 0 has rank 0")
    frame = normal_frame + tangent_frame
    if any(v.num_vars != n for v in frame):
        raise ConnectionDataError("frames live on the wrong chart")
    order = min(v.order for v in frame) - 1
    cols = SeriesMatrix([[frame[c].components[i].truncate(order) for c in range(n)] for i in range(n)])
    try:
        inv = cols.inverse()
    except SeriesError as exc:
        raise ConnectionDataError("frames are linearly dependent at the origin") from exc
    for a in range(chart.d):
        for b in range(a + 1, chart.d):
            coords = inv.apply(lie_bracket(tangent_frame[a], tangent_frame[b]).components)
            if any(not coords[c].is_zero() for c in range(chart.q)):
                raise ConnectionDataError("tangent frame is not involutive")
    mats = []
    for a in range(chart.d):
        rows = [[None] * chart.q for _ in range(chart.q)]
        for b in range(chart.q):
            coords = inv.apply(lie_bracket(tangent_frame[a], normal_frame[b]).components)
            for c in range(chart.q):
                rows[c][b] = coords[c]
        mats.append(SeriesMatrix(rows))
    return mats


def bott_patch(chart: FoliationChart, tangent_frame: Sequence[PolyVectorField],
               normal_frame: Sequence[PolyVectorField]) -> ConnectionPatch:
    """Bott connection on the normal bundle in the frame pi(w_1), ..., pi(w_q).

    A normal section sum f_b pi(w_b) is flat along v_a exactly when
    v_a(f) = -C^a f (see :func:`bott_bracket_matrices`), so the returned
    matrices are A_a = -C^a, measured along the given tangent frame (which is
    d/dy_a when the tangent frame is the coordinate one).
    """
    mats = bott_bracket_matrices(chart, tangent_frame, normal_frame)
    return ConnectionPatch(chart, tuple(-m for m in mats))


def frames_from_submersion(chart: FoliationChart, u: Sequence[TruncatedSeries]) -> tuple:
    """(tangent, normal) frames for the foliation by level sets of u.

    Requires du/dx invertible at the origin.  Tangent fields are
    d/dy_a - (du/dx)^-1 (du/dy_a) . d/dx, which kill u; normal fields are d/dx_i.
    """
    u = tuple(u)
    if len(u) != chart.q:
        raise ConnectionDataError("a submersion for this chart has q components")
    n = chart.num_vars
    ux = SeriesMatrix([[ui.diff(x) for x in chart.transverse_vars] for ui in u])
    try:
        uxinv = ux.inverse()
    except SeriesError as exc:
        raise ConnectionDataError("du/dx is singular at the origin") from exc
    t = ux.order
    zero = TruncatedSeries.zero(n, t)
    one = TruncatedSeries.constant(1, n, t)
    tangent = []
    for y in chart.leaf_vars:
        shift = uxinv.apply([ui.diff(y).truncate(t) for ui in u])
        comps = [-shift[i] for i in range(chart.q)] + [one if v == y else zero for v in chart.leaf_vars]
        tangent.append(PolyVectorField(tuple(comps)))
    normal = [PolyVectorField.coordinate(x, n, t) for x in chart.transverse_vars]
    return tuple(tangent), tuple(normal)


# --- connection algebra -------------------------------------------------------

def _same_chart(p: ConnectionPatch, p2: ConnectionPatch):
    if p.chart != p2.chart:
        raise ConnectionDataError("patches live on different charts")


def tensor_patch(p: ConnectionPatch, p2: ConnectionPatch) -> ConnectionPatch:
    """Matrices A (x) Id + Id (x) A'."""
    _same_chart(p, p2)
    t = min(p.order, p2.order)
    n = p.chart.num_vars
    i1 = SeriesMatrix.identity(p.rank, n, t)
    i2 = SeriesMatrix.identity(p2.rank, n, t)
    return ConnectionPatch(p.chart, tuple(kron(a, i2) + kron(i1, b) for a, b in zip(p.matrices, p2.matrices)))


def dual_patch(p: ConnectionPatch) -> ConnectionPatch:
    """Matrices -A^T."""
    return ConnectionPatch(p.chart, tuple(-a.transpose() for a in p.matrices))


def determinant_patch(p: ConnectionPatch) -> ConnectionPatch:
    """Rank-one patch with entries trace(A_k)."""
    return ConnectionPatch(p.chart, tuple(SeriesMatrix([[a.trace()]]) for a in p.matrices))


def patch_ops(p: ConnectionPatch, p2: ConnectionPatch | None = None, kind: str = "tensor") -> ConnectionPatch:
    if kind == "tensor":
        if p2 is None:
            raise ConnectionDataError("tensor product needs two patches")
        return tensor_patch(p, p2)
    if kind == "dual":
        return dual_patch(p)
    if kind == "determinant":
        return determinant_patch(p)
    raise ConnectionDataError(f"unknown patch operation {kind!r}")


# --- transverse jets of a flat connection -------------------------------------

def transverse_jet_basis(chart: FoliationChart, rank: int, k: int) -> list:
    """Labels (i, j) for the basis zeta^i d^k(e_j): transverse multi-index first, then j."""
    return [(i, j) for i in restricted(chart.num_vars, k, chart.transverse_vars) for j in range(rank)]


def transverse_jet_patch(p: ConnectionPatch, k: int) -> ConnectionPatch:
    """The induced flat partial connection on transverse k-jets.

    In the basis zeta^i d^k(e_j), a flat section s has coordinates
    (1/i!) d^i s_j / dx^i; differentiating along y_k and applying Leibniz gives
    the block lower-triangular matrices returned here, with block (i, l)
    equal to (1/(i-l)!) d^(i-l) A_k / dx^(i-l) for l <= i.
    """
    if k < 0:
        raise ConnectionDataError("jet order must be non-negative")
    _require_flat(p)
    basis = transverse_jet_basis(p.chart, p.rank, k)
    n = p.chart.num_vars
    t = p.order - k
    if t < 0:
        raise ConnectionDataError("series order too low for this jet order")
    zero = TruncatedSeries.zero(n, t)
    mats = []
    for a in p.matrices:
        cache = {}

        def block(gap):
            if gap not in cache:
                cache[gap] = a.map(lambda e: e.derivative(gap).truncate(t) / mpq(gap.factorial()))
            return cache[gap]

        rows = []
        for (i, j) in basis:
            row = []
            for (l, jj) in basis:
                if i.dominates(l):
                    row.append(block(MultiIndex(i.minus(l)))[j, jj])
                else:
                    row.append(zero)
            rows.append(row)
        mats.append(SeriesMatrix(rows))
    return ConnectionPatch(p.chart, tuple(mats))


def transverse_jet_vector(s: Sequence[TruncatedSeries], chart: FoliationChart, k: int) -> tuple:
    """Coordinates of the transverse k-jet of a section s in the basis zeta^i d^k(e_j)."""
    out = []
    for (i, j) in transverse_jet_basis(chart, len(s), k):
        out.append(s[j].derivative(i).truncate(s[j].order - k) / mpq(i.factorial()))
    return tuple(out)
