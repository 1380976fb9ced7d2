"""PSL(n+1) acting on the second prolongation of projective n-space.

A point of the prolongation is ``(y, Z, W)``: ``y`` an affine point of P^n and
``(Z, W)`` the 1-jet of a vector field at y, ``Z_j = f_j`` and
``W[j1][j2] = d f_j2 / d y_j1``.  A group element acts on the affine chart by

    y -> (m_i0 + sum_j m_ij y_j) / (m_00 + sum_j m_0j y_j)

and on jets by pushforward.  Elements fixing the origin p have ``m_i0 = 0``;
they are written with their blocks ``A = (m_ij)_{i,j>=1}`` and
``B = (m_01, ..., m_0n)``.

Exact paths work with ``mpq``/Gaussian rationals through :mod:`linalg`; the
Maurer-Cartan machinery is floating point (numpy and ``scipy.linalg.expm``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from gmpy2 import mpq
from scipy.linalg import expm

from . import linalg
from .jets import JetError, prolong_map_1
from .scalars import EXACT, FLOAT, exact, random_rational
from .series import TruncatedSeries

FLOAT_TOL = 1e-13


class PSLError(ValueError):
    pass


class ChartEscapeError(PSLError):
    """The image point leaves the affine chart (vanishing denominator)."""


class PoleLocusError(PSLError):
    """Orbit inversion degenerates: the point lies on the pole locus."""


class NotOnIncidenceError(PSLError):
    pass


def _exact_entry(v):
    return not isinstance(v, (float, complex, np.floating, np.complexfloating))


def _coerce(v):
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, np.complexfloating):
        return complex(v)
    if isinstance(v, (float, complex)):
        return v
    return exact(v)


def _is_zero(v) -> bool:
    if _exact_entry(v):
        return v == 0
    return abs(v) <= FLOAT_TOL


# --- group elements -------------------------------------------------------------

@dataclass(frozen=True)
class GroupElement:
    """Invertible (n+1)x(n+1) matrix, scaled so that m_00 = 1 whenever m_00 != 0."""

    matrix: tuple

    def __post_init__(self):
        rows = [[_coerce(v) for v in r] for r in self.matrix]
        size = len(rows)
        if size < 2 or any(len(r) != size for r in rows):
            raise PSLError("group elements are square matrices of size n+1 >= 2")
        m00 = rows[0][0]
        if not _is_zero(m00) and m00 != 1:
            rows = [[v / m00 for v in r] for r in rows]
        det = linalg.det(rows)
        if _is_zero(det):
            raise PSLError("matrix is singular")
        object.__setattr__(self, "matrix", tuple(tuple(r) for r in rows))

    @property
    def n(self) -> int:
        return len(self.matrix) - 1

    @property
    def A(self) -> list:
        return [list(r[1:]) for r in self.matrix[1:]]

    @property
    def B(self) -> list:
        return list(self.matrix[0][1:])

    @property
    def C(self) -> list:
        return [r[0] for r in self.matrix[1:]]

    @property
    def is_exact(self) -> bool:
        return all(_exact_entry(v) for r in self.matrix for v in r)

    def is_isotropy(self) -> bool:
        return all(_is_zero(c) for c in self.C)

    @classmethod
    def identity(cls, n: int, one=mpq(1)) -> "GroupElement":
        return cls(linalg.identity(n + 1, one, one * 0))

    @classmethod
    def translation(cls, y: Sequence) -> "GroupElement":
        """Moves the origin to y: m_00 = 1, m_i0 = y_i, A = Id, B = 0."""
        y = [_coerce(v) for v in y]
        one = y[0] * 0 + 1
        m = linalg.identity(len(y) + 1, one, one * 0)
        for i, v in enumerate(y):
            m[i + 1][0] = v
        return cls(m)

    @classmethod
    def isotropy(cls, A: Sequence[Sequence], B: Sequence) -> "GroupElement":
        n = len(A)
        one = _coerce(A[0][0]) * 0 + 1
        rows = [[one] + [_coerce(b) for b in B]]
        for i in range(n):
            rows.append([one * 0] + [_coerce(v) for v in A[i]])
        return cls(rows)

    @classmethod
    def from_array(cls, a) -> "GroupElement":
        return cls([[complex(v) if np.iscomplexobj(a) else float(v) for v in r] for r in np.asarray(a)])

    def to_array(self) -> np.ndarray:
        vals = [[complex(v) for v in r] for r in self.matrix]
        arr = np.array(vals)
        if np.all(arr.imag == 0):
            arr = arr.real.copy()
        return arr

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(linalg.matmul(self.matrix, other.matrix))

    def inverse(self) -> "GroupElement":
        return GroupElement(linalg.inverse(self.matrix))

    def distance(self, other: "GroupElement") -> float:
        """Max entry difference of the normalized representatives."""
        return float(np.max(np.abs(self.to_array() - other.to_array())))


# --- points of the prolongation ---------------------------------------------------

@dataclass(frozen=True)
class ProlongPoint:
    y: tuple
    Z: tuple
    W: tuple

    def __post_init__(self):
        y = tuple(_coerce(v) for v in self.y)
        z = tuple(_coerce(v) for v in self.Z)
        w = tuple(tuple(_coerce(v) for v in r) for r in self.W)
        n = len(y)
        if n < 1 or len(z) != n or len(w) != n or any(len(r) != n for r in w):
            raise PSLError("inconsistent prolongation point dimensions")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "Z", z)
        object.__setattr__(self, "W", w)

    @property
    def n(self) -> int:
        return len(self.y)

    @property
    def is_degenerate(self) -> bool:
        """On the locus Z = 0, where the isotropy is never trivial."""
        return all(_is_zero(v) for v in self.Z)

    @property
    def is_exact(self) -> bool:
        return all(_exact_entry(v) for v in self.y + self.Z + tuple(v for r in self.W for v in r))

    @classmethod
    def over_origin(cls, Z: Sequence, W: Sequence[Sequence]) -> "ProlongPoint":
        zero = _coerce(Z[0]) * 0
        return cls(tuple(zero for _ in Z), tuple(Z), tuple(tuple(r) for r in W))

    def to_vector(self) -> np.ndarray:
        vals = list(self.y) + list(self.Z) + [v for r in self.W for v in r]
        arr = np.array([complex(v) for v in vals])
        return arr.real.copy() if np.all(arr.imag == 0) else arr

    @classmethod
    def from_vector(cls, n: int, v) -> "ProlongPoint":
        v = [complex(t) if isinstance(t, complex) and t.imag else float(np.real(t)) for t in v]
        return cls(tuple(v[:n]), tuple(v[n:2 * n]), tuple(tuple(v[2 * n + i * n: 2 * n + (i + 1) * n])
                                                       for i in range(n)))

    def distance(self, other: "ProlongPoint") -> float:
        return float(np.max(np.abs(self.to_vector() - other.to_vector())))


def prolong_dim(n: int) -> int:
    return n * n + 2 * n


# --- actions ----------------------------------------------------------------------

def affine_action(g: GroupElement, y: Sequence) -> tuple:
    """Action on the affine chart; raises :class:`ChartEscapeError` at the hyperplane at infinity."""
    y = [_coerce(v) for v in y]
    n = g.n
    if len(y) != n:
        raise PSLError("dimension mismatch between group element and point")
    m = g.matrix
    den = m[0][0] + sum((m[0][j + 1] * y[j] for j in range(n)), y[0] * 0)
    if _is_zero(den) if _exact_entry(den) else abs(den) <= 1e-12:
        raise ChartEscapeError("the point is sent out of the affine chart")
    return tuple((m[i + 1][0] + sum((m[i + 1][j + 1] * y[j] for j in range(n)), y[0] * 0)) / den
                 for i in range(n))


def fiber_action(h: GroupElement, Z: Sequence, W: Sequence[Sequence]) -> tuple:
    """(Z, W) -> (A Z, A^-T W A^T - (B.Z) Id - A^-T B (A Z)^T) for an isotropy element."""
    A, B = h.A, h.B
    n = h.n
    Z = [_coerce(v) for v in Z]
    W = [[_coerce(v) for v in r] for r in W]
    try:
        ainv_t = linalg.transpose(linalg.inverse(A))
    except linalg.SingularMatrixError as exc:
        raise PSLError("isotropy block A is singular") from exc
    az = linalg.matvec(A, Z)
    conj = linalg.matmul(linalg.matmul(ainv_t, W), linalg.transpose(A))
    bz = sum((B[j] * Z[j] for j in range(n)), Z[0] * 0)
    v = linalg.matvec(ainv_t, B)
    w_new = tuple(tuple(conj[i][j] - (bz if i == j else 0) - v[i] * az[j] for j in range(n))
                  for i in range(n))
    return tuple(az), w_new


def _isotropy_part(g: GroupElement, y, y_new) -> GroupElement:
    """T_{y'}^-1 g T_y, which fixes the origin."""
    return GroupElement.translation(y_new).inverse() @ g @ GroupElement.translation(y)


def _moebius_series(g: GroupElement, y0: Sequence, order: int) -> tuple:
    """Series of x -> L_g(y0 + x) - L_g(y0) around x = 0."""
    n = g.n
    m = g.matrix
    y0 = [_coerce(v) for v in y0]
    sfield = EXACT if g.is_exact and all(_exact_entry(v) for v in y0) else FLOAT

    def lin(row):
        c = m[row][0] + sum((m[row][j + 1] * y0[j] for j in range(n)), y0[0] * 0)
        terms = {tuple([0] * n): c}
        for j in range(n):
            mono = [0] * n
            mono[j] = 1
            terms[tuple(mono)] = m[row][j + 1]
        return TruncatedSeries.from_dict(terms, n, order, sfield)

    den = lin(0)
    if _is_zero(den.coeffs[0]):
        raise ChartEscapeError("the point is sent out of the affine chart")
    inv = den.reciprocal()
    base = affine_action(g, y0)
    return tuple(lin(i + 1) * inv - base[i] for i in range(n))


def prolonged_action(g: GroupElement, pt: ProlongPoint, method: str = "fiber") -> ProlongPoint:
    """g . (y, Z, W).

    ``method="fiber"`` conjugates g into the isotropy group of the origin and
    uses :func:`fiber_action`; ``method="jet"`` prolongs the series of the
    Mobius map around y with :func:`jets.prolong_map_1`.
    """
    if g.n != pt.n:
        raise PSLError("dimension mismatch between group element and point")
    y_new = affine_action(g, pt.y)
    if method == "fiber":
        h = _isotropy_part(g, pt.y, y_new)
        z, w = fiber_action(h, pt.Z, pt.W)
        return ProlongPoint(y_new, z, w)
    if method == "jet":
        try:
            data = prolong_map_1(_moebius_series(g, pt.y, 3))
        except JetError as exc:
            raise PSLError(str(exc)) from exc
        J, zp, wp = data.at_origin()
        n = pt.n
        z = tuple(sum((J[j][i] * pt.Z[i] for i in range(n)), pt.Z[0] * 0) for j in range(n))
        w = tuple(tuple(sum((zp[a][b][i] * pt.Z[i] for i in range(n)), pt.Z[0] * 0)
                        + sum((wp[a][b][i1][i2] * pt.W[i1][i2] for i1 in range(n) for i2 in range(n)),
                              pt.Z[0] * 0)
                        for b in range(n)) for a in range(n))
        return ProlongPoint(y_new, z, w)
    raise PSLError(f"unknown method {method!r}")


# --- isotropy and incidence ---------------------------------------------------------

def isotropy_system(Z: Sequence, W: Sequence[Sequence]) -> list:
    """Rows of the linear system X Z = 0, B Z^T = W X^T - X^T W.

    Unknowns: X row-major (index a*n + b), then B (index n^2 + c).
    """
    n = len(Z)
    Z = [exact(v) for v in Z]
    W = [[exact(v) for v in r] for r in W]
    nun = n * n + n
    rows = []
    for a in range(n):
        row = [mpq(0)] * nun
        for b in range(n):
            row[a * n + b] = Z[b]
        rows.append(row)
    for i in range(n):
        for j in range(n):
            row = [mpq(0)] * nun
            row[n * n + i] = row[n * n + i] + Z[j]
            for k in range(n):
                row[j * n + k] = row[j * n + k] - W[i][k]   # -(W X^T)_ij
                row[k * n + i] = row[k * n + i] + W[k][j]   # +(X^T W)_ij
            rows.append(row)
    return rows


class IsotropyResult(NamedTuple):
    dimension: int
    basis: list


def isotropy_nullspace(q: ProlongPoint) -> IsotropyResult:
    """Exact nullspace of the linearised stabiliser system at a point over the origin."""
    if not q.is_exact:
        raise PSLError("isotropy_nullspace needs exact scalars")
    if any(v != 0 for v in q.y):
        raise PSLError("the point must lie over the origin")
    n = q.n
    basis = linalg.exact_nullspace(isotropy_system(q.Z, q.W), n * n + n)
    return IsotropyResult(len(basis), basis)


class TraceIdentity(NamedTuple):
    residual: object        # tr(W' - W) for the unsimplified fixed-point equation
    expected: object        # -(n+1) B.Z
    conjugation_defect: object  # tr(A^-T W A^T) - tr(W)


def trace_identity_residual(A, B, Z, W) -> TraceIdentity:
    h = GroupElement.isotropy(A, B)
    n = h.n
    _, w_new = fiber_action(h, Z, W)
    Wc = [[_coerce(v) for v in r] for r in W]
    res = linalg.trace([[w_new[i][j] - Wc[i][j] for j in range(n)] for i in range(n)])
    bz = sum((h.B[j] * _coerce(Z[j]) for j in range(n)), h.B[0] * 0)
    ainv_t = linalg.transpose(linalg.inverse(h.A))
    conj = linalg.matmul(linalg.matmul(ainv_t, Wc), linalg.transpose(h.A))
    return TraceIdentity(res, -(n + 1) * bz, linalg.trace(conj) - linalg.trace(Wc))


@dataclass(frozen=True)
class ExplicitFiber:
    A: tuple
    B: tuple
    Z: tuple
    particular: tuple      # W with zero diagonal
    basis: tuple           # homogeneous solutions (n x n matrices)

    @property
    def dimension(self) -> int:
        return len(self.basis)


def _fixed_point_rows(A, n):
    """Rows of W -> W A^T - A^T W as a linear map on row-major W."""
    rows = []
    for i in range(n):
        for j in range(n):
            row = [mpq(0)] * (n * n)
            for k in range(n):
                row[i * n + k] = row[i * n + k] + A[j][k]
                row[k * n + j] = row[k * n + j] - A[k][i]
            rows.append(row)
    return rows


def explicit_fiber(lambdas: Sequence, b: Sequence) -> ExplicitFiber:
    """W-solutions for A = diag(1, l_2..l_n), B = (0, b_2..b_n), Z = e_1.

    The solution set of B Z^T = W A^T - A^T W is the particular solution
    w_i1 = b_i / (1 - l_i) plus any diagonal matrix.
    """
    lambdas = [exact(v) for v in lambdas]
    b = [exact(v) for v in b]
    if len(lambdas) != len(b):
        raise PSLError("need one b_i per eigenvalue")
    if any(l == 1 or l == 0 for l in lambdas):
        raise PSLError("eigenvalues must be nonzero and differ from 1")
    if len(set((l.re, l.im) if hasattr(l, "re") else (l, 0) for l in lambdas)) != len(lambdas):
        raise PSLError("eigenvalues must be pairwise distinct")
    n = len(lambdas) + 1
    diag = [mpq(1)] + lambdas
    A = tuple(tuple(diag[i] if i == j else mpq(0) for j in range(n)) for i in range(n))
    B = tuple([mpq(0)] + b)
    Z = tuple(mpq(1) if i == 0 else mpq(0) for i in range(n))
    W = [[mpq(0)] * n for _ in range(n)]
    for i in range(1, n):
        W[i][0] = B[i] / (1 - diag[i])
    # certify the particular solution and the homogeneous part exactly
    lhs = linalg.matmul(W, linalg.transpose(A))
    rhs = linalg.matmul(linalg.transpose(A), W)
    for i in range(n):
        for j in range(n):
            if B[i] * Z[j] != lhs[i][j] - rhs[i][j]:
                raise PSLError("internal error: particular solution fails")
    ns = linalg.exact_nullspace(_fixed_point_rows(A, n), n * n)
    basis = tuple(tuple(tuple(v[i * n + j] for j in range(n)) for i in range(n)) for v in ns)
    return ExplicitFiber(A, B, Z, tuple(tuple(r) for r in W), basis)


def incidence_equations(A, B, Z, W, special_linear: bool = False, full: bool = False) -> list:
    """Values of A Z - Z and B Z^T - W A^T + A^T W (optionally det A - 1).

    With ``full=True`` the second block is the unsimplified fixed-point equation
    multiplied through by A^T, which carries the extra term -(B.Z) A^T.
    """
    n = len(Z)
    A = [[exact(v) for v in r] for r in A]
    B = [exact(v) for v in B]
    Z = [exact(v) for v in Z]
    W = [[exact(v) for v in r] for r in W]
    out = [sum((A[a][b] * Z[b] for b in range(n)), mpq(0)) - Z[a] for a in range(n)]
    wat = linalg.matmul(W, linalg.transpose(A))
    atw = linalg.matmul(linalg.transpose(A), W)
    bz = sum((B[k] * Z[k] for k in range(n)), mpq(0))
    for i in range(n):
        for j in range(n):
            v = B[i] * Z[j] - wat[i][j] + atw[i][j]
            if full:
                v = v + bz * A[j][i]
            out.append(v)
    if special_linear:
        out.append(linalg.det(A) - 1)
    return out


def incidence_jacobian(A, B, Z, W, special_linear: bool = False, full: bool = False) -> list:
    """Exact Jacobian; variables ordered A (row-major), B, Z, W (row-major)."""
    n = len(Z)
    A = [[exact(v) for v in r] for r in A]
    B = [exact(v) for v in B]
    Z = [exact(v) for v in Z]
    W = [[exact(v) for v in r] for r in W]
    ia, ib, iz, iw = 0, n * n, n * n + n, n * n + 2 * n
    nv = 2 * n * n + 2 * n
    rows = []
    for a in range(n):
        row = [mpq(0)] * nv
        for d in range(n):
            row[ia + a * n + d] += Z[d]
            row[iz + d] += A[a][d]
        row[iz + a] -= 1
        rows.append(row)
    bz = sum((B[k] * Z[k] for k in range(n)), mpq(0))
    for i in range(n):
        for j in range(n):
            row = [mpq(0)] * nv
            row[ib + i] += Z[j]
            row[iz + j] += B[i]
            for d in range(n):
                row[ia + j * n + d] -= W[i][d]      # -W_id A_jd
                row[ia + d * n + i] += W[d][j]      # +A_di W_dj
                row[iw + i * n + d] -= A[j][d]
                row[iw + d * n + j] += A[d][i]
            if full:
                row[ia + j * n + i] += bz
                for k in range(n):
                    row[ib + k] += Z[k] * A[j][i]
                    row[iz + k] += B[k] * A[j][i]
            rows.append(row)
    if special_linear:
        det = linalg.det(A)
        inv = linalg.inverse(A)
        row = [mpq(0)] * nv
        for c in range(n):
            for d in range(n):
                row[ia + c * n + d] = det * inv[d][c]
        rows.append(row)
    return rows


def incidence_tangent_dim(A, B, Z, W, special_linear: bool = False, full: bool = False) -> int:
    """Nullity of the incidence-equation Jacobian at a point of the incidence variety."""
    n = len(Z)
    if n < 2:
        raise PSLError("incidence_tangent_dim is defined for n >= 2")
    if any(v != 0 for v in incidence_equations(A, B, Z, W, special_linear, full)):
        raise NotOnIncidenceError("the point does not satisfy the incidence equations")
    jac = incidence_jacobian(A, B, Z, W, special_linear, full)
    return 2 * n * n + 2 * n - linalg.exact_rank(jac)


# --- Lie algebra and the Maurer-Cartan form -------------------------------------------

@dataclass(frozen=True)
class LieAlgValue:
    """Traceless (n+1)x(n+1) matrix."""

    matrix: np.ndarray = field(compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise PSLError("Lie algebra values are square matrices")
        scale = 1.0 + float(np.max(np.abs(m))) if m.size else 1.0
        if abs(np.trace(m)) > 1e-8 * scale:
            raise PSLError("Lie algebra values must be traceless")
        object.__setattr__(self, "matrix", m)

    def norm(self) -> float:
        return float(np.max(np.abs(self.matrix)))

    def __sub__(self, other: "LieAlgValue") -> "LieAlgValue":
        return LieAlgValue(self.matrix - other.matrix)


def sl_basis(n: int) -> list:
    """Basis of sl(n+1): off-diagonal units then E_ii - E_{i+1,i+1}."""
    size = n + 1
    out = []
    for i in range(size):
        for j in range(size):
            if i != j:
                e = np.zeros((size, size))
                e[i, j] = 1.0
                out.append(e)
    for i in range(n):
        e = np.zeros((size, size))
        e[i, i] = 1.0
        e[i + 1, i + 1] = -1.0
        out.append(e)
    return out


def sl_coordinates(x: np.ndarray) -> np.ndarray:
    """Coordinates of a traceless matrix in :func:`sl_basis`."""
    size = x.shape[0]
    n = size - 1
    offs = [x[i, j] for i in range(size) for j in range(size) if i != j]
    diag = np.diag(x)
    h = np.cumsum(diag[:n])
    return np.array(offs + list(h))


def adjoint(g: GroupElement, xi: np.ndarray) -> np.ndarray:
    m = g.to_array()
    return m @ xi @ np.linalg.inv(m)


def traceless(m: np.ndarray) -> np.ndarray:
    size = m.shape[0]
    return m - np.trace(m) / size * np.eye(size)


def fundamental_field(xi: np.ndarray, pt: ProlongPoint | np.ndarray, n: int | None = None) -> np.ndarray:
    """d/dt|0 exp(t xi) . pt, as a vector in (y, Z, W) coordinates."""
    if isinstance(pt, ProlongPoint):
        n = pt.n
        v = pt.to_vector()
    else:
        v = np.asarray(pt)
    y, z = v[:n], v[n:2 * n]
    w = v[2 * n:].reshape(n, n)
    x00, xb, xc, xa = xi[0, 0], xi[0, 1:], xi[1:, 0], xi[1:, 1:]
    s = x00 + xb @ y
    base = xc + xa @ y - s * y
    dx = xa - s * np.eye(n) - np.outer(y, xb)
    k = -np.outer(xb, z) - (xb @ z) * np.eye(n)
    dz = dx @ z
    dw = w @ dx.T - dx.T @ w + k
    return np.concatenate([base, dz, dw.reshape(-1)])


def base_field(xi: np.ndarray, y) -> np.ndarray:
    """Projection of the fundamental field to P^n at the affine point y."""
    y = np.asarray(y, dtype=float)
    x00, xb, xc, xa = xi[0, 0], xi[0, 1:], xi[1:, 0], xi[1:, 1:]
    return xc + xa @ y - (x00 + xb @ y) * y


def infinitesimal_matrix(pt: ProlongPoint | np.ndarray, n: int) -> np.ndarray:
    """Columns: fundamental fields of the sl basis at pt (square, size n^2 + 2n)."""
    return np.column_stack([fundamental_field(e, pt, n) for e in sl_basis(n)])


def _act_vec(g: GroupElement, v: np.ndarray, n: int) -> np.ndarray:
    return prolonged_action(g, ProlongPoint.from_vector(n, v)).to_vector()


def _from_sl(coords: np.ndarray, n: int) -> np.ndarray:
    return sum(c * e for c, e in zip(coords, sl_basis(n)))


def _try_act(g_arr: np.ndarray, qv: np.ndarray, n: int):
    """Image of q under the matrix g_arr, or None when it is not defined."""
    if not np.all(np.isfinite(g_arr)):
        return None
    try:
        out = _act_vec(GroupElement.from_array(g_arr), qv, n)
    except (PSLError, linalg.SingularMatrixError, ZeroDivisionError, OverflowError):
        return None
    return out if np.all(np.isfinite(out)) else None


def _polish(g, cur, qv, target, n, err, steps: int = 3):
    """A few undamped Newton steps past the stopping tolerance, kept while they help."""
    for _ in range(steps):
        try:
            eta = _from_sl(np.linalg.solve(infinitesimal_matrix(cur, n), target - cur), n)
        except np.linalg.LinAlgError:
            break
        cand = g @ expm(np.linalg.solve(g, eta @ g))
        val = _try_act(cand, qv, n)
        if val is None:
            break
        new_err = np.max(np.abs(val - target))
        if new_err >= err:
            break
        g, cur, err = cand, val, new_err
    return g


def _newton(q: ProlongPoint, x: ProlongPoint, g0: np.ndarray, tol: float, max_iter: int,
            cond_limit: float) -> np.ndarray:
    n = q.n
    qv = q.to_vector().astype(float)
    target = x.to_vector().astype(float)
    scale = 1.0 + np.max(np.abs(target))
    g = g0 / abs(np.linalg.det(g0)) ** (1.0 / (n + 1))
    cur = _try_act(g, qv, n)
    if cur is None:
        raise PoleLocusError("starting point leaves the chart")
    for _ in range(max_iter):
        r = cur - target
        err = np.max(np.abs(r))
        if err <= tol * scale:
            return _polish(g, cur, qv, target, n, err)
        jac = infinitesimal_matrix(cur, n)
        if not np.all(np.isfinite(jac)) or np.linalg.cond(jac) > cond_limit:
            raise PoleLocusError("orbit map Jacobian is singular at the current point")
        eta = _from_sl(np.linalg.solve(jac, -r), n)
        # eta acts on the left at g . q; move it to a right-multiplied step
        step = np.linalg.solve(g, eta @ g)
        size = np.max(np.abs(step))
        if size > 1.0:
            step = step / size
        alpha = 1.0
        for _ in range(40):
            cand = g @ expm(alpha * step)
            val = _try_act(cand, qv, n)
            if val is not None and np.max(np.abs(val - target)) < err:
                break
            alpha *= 0.5
        else:
            raise PoleLocusError("Newton iteration stalled")
        g, cur = cand, val
    raise PoleLocusError("Newton iteration did not converge")


def _initial_guesses(q: ProlongPoint, x: ProlongPoint) -> list:
    """Starting elements T_{y_x} h T_{y_q}^-1 with h in the isotropy group of the origin.

    h maps Z_q to Z_x (a rank-one update, or a scaled reflection; the real
    group has two components) and its B block is the least-squares fit of
    the W equation.  For n = 1 the first guess is already exact.
    """
    n = q.n
    qv, xv = np.real(q.to_vector()), np.real(x.to_vector())
    zq, zx = qv[n:2 * n], xv[n:2 * n]
    wq, wx = qv[2 * n:].reshape(n, n), xv[2 * n:].reshape(n, n)
    cands = []
    nq = zq @ zq
    rank_one = np.eye(n) + np.outer(zx - zq, zq) / nq
    if abs(np.linalg.det(rank_one)) > 1e-6:
        cands.append(rank_one)
    u = zq / np.sqrt(nq)
    v = zx / np.linalg.norm(zx)
    d = u - v
    house = np.eye(n) - 2 * np.outer(d, d) / (d @ d) if d @ d > 1e-24 else np.eye(n)
    scaled = np.linalg.norm(zx) / np.sqrt(nq) * house
    cands.append(scaled)
    cands.append(-scaled)
    out = []
    for a in cands:
        ainv_t = np.linalg.inv(a).T
        az = a @ zq
        # W_x = A^-T W_q A^T - (B.Z) Id - A^-T B (A Z)^T is affine in B
        const = ainv_t @ wq @ a.T - wx
        cols = []
        for c in range(n):
            e = np.zeros(n)
            e[c] = 1.0
            cols.append((-(e @ zq) * np.eye(n) - np.outer(ainv_t @ e, az)).reshape(-1))
        b = np.linalg.lstsq(np.column_stack(cols), -const.reshape(-1), rcond=None)[0]
        h = np.eye(n + 1)
        h[0, 1:] = b
        h[1:, 1:] = a
        ty = np.eye(n + 1)
        ty[1:, 0] = xv[:n]
        tq = np.eye(n + 1)
        tq[1:, 0] = -qv[:n]
        out.append(ty @ h @ tq)
    return out


def orbit_invert(q: ProlongPoint, x: ProlongPoint, tol: float = 1e-12, max_iter: int = 80,
                 cond_limit: float = 1e10, start: GroupElement | None = None) -> GroupElement:
    """g with g . q = x, by damped Newton along g <- g exp(alpha xi).

    The default start is the translation carrying the base point of q to that
    of x; any failure (singular Jacobian, chart escape, stalling) is reported
    as :class:`PoleLocusError`.
    """
    n = q.n
    if x.n != n:
        raise PSLError("points live over different dimensions")
    if x.is_degenerate or q.is_degenerate:
        raise PoleLocusError("Z = 0: the orbit map is not locally invertible here")
    if start is not None:
        return GroupElement.from_array(_newton(q, x, start.to_array(), tol, max_iter, cond_limit))
    last = None
    for g0 in _initial_guesses(q, x):
        try:
            return GroupElement.from_array(_newton(q, x, g0, tol, max_iter, cond_limit))
        except PoleLocusError as exc:
            last = exc
    raise last


def maurer_cartan(q: ProlongPoint, x: ProlongPoint, v, g: GroupElement | None = None,
                  cond_limit: float = 1e10) -> LieAlgValue:
    """Omega_q at x applied to the tangent vector v.

    Solves eta^#(x) = v and returns Ad(g^-1) eta, where g . q = x.
    """
    n = q.n
    v = np.asarray(v, dtype=float)
    if v.shape != (prolong_dim(n),):
        raise PSLError(f"tangent vectors have {prolong_dim(n)} components")
    if g is None:
        g = orbit_invert(q, x)
    jac = infinitesimal_matrix(x, n)
    if np.linalg.cond(jac) > cond_limit:
        raise PoleLocusError("x lies on the pole locus")
    eta = _from_sl(np.linalg.solve(jac, v), n)
    m = g.to_array()
    return LieAlgValue(np.linalg.inv(m) @ eta @ m)


def maurer_cartan_forms(q: ProlongPoint, x: ProlongPoint, g: GroupElement | None = None) -> list:
    """Omega_q(x, e_a) for every coordinate direction a."""
    n = q.n
    if g is None:
        g = orbit_invert(q, x)
    N = prolong_dim(n)
    return [maurer_cartan(q, x, np.eye(N)[a], g).matrix for a in range(N)]


def pushforward(g: GroupElement, x: ProlongPoint, v, h: float = 1e-5) -> np.ndarray:
    """Differential of the prolonged action at x applied to v (central differences)."""
    n = x.n
    base = x.to_vector().astype(float)
    v = np.asarray(v, dtype=float)
    return (_act_vec(g, base + h * v, n) - _act_vec(g, base - h * v, n)) / (2 * h)


@dataclass(frozen=True)
class FormDiagnostics:
    flatness: float
    invariance: float
    verticality: float
    equivariance: float
    step: float
    samples: int


def _newton_from(q: ProlongPoint, x: ProlongPoint, g: GroupElement) -> GroupElement:
    return orbit_invert(q, x, tol=1e-14, start=g)


def flatness_residual(q: ProlongPoint, x: ProlongPoint, h: float = 1e-4) -> float:
    """max over a < b of |d_a Omega_b - d_b Omega_a + [Omega_a, Omega_b]| at x.

    Derivatives use the fourth-order central stencil
    (-f(2h) + 8 f(h) - 8 f(-h) + f(-2h)) / 12h, warm-starting each orbit
    inversion from the one at x.
    """
    n = q.n
    N = prolong_dim(n)
    g0 = orbit_invert(q, x)
    base = x.to_vector().astype(float)
    forms = maurer_cartan_forms(q, x, g0)

    def forms_at(shift):
        pt = ProlongPoint.from_vector(n, base + shift)
        return maurer_cartan_forms(q, pt, _newton_from(q, pt, g0))

    derivs = []
    for a in range(N):
        e = np.eye(N)[a]
        f2p, f1p, f1m, f2m = (forms_at(c * h * e) for c in (2, 1, -1, -2))
        derivs.append([(-p2 + 8 * p1 - 8 * m1 + m2) / (12 * h) for p2, p1, m1, m2 in zip(f2p, f1p, f1m, f2m)])
    worst = 0.0
    for a in range(N):
        for b in range(a + 1, N):
            curv = derivs[a][b] - derivs[b][a] + forms[a] @ forms[b] - forms[b] @ forms[a]
            worst = max(worst, float(np.max(np.abs(curv))))
    return worst


def form_diagnostics(q: ProlongPoint, points: Sequence[ProlongPoint], group_elements: Sequence[GroupElement],
                     h: float = 1e-4, push_step: float = 1e-5) -> FormDiagnostics:
    """Flatness, G-invariance, Ad-equivariance and verticality residuals over sample points."""
    n = q.n
    N = prolong_dim(n)
    if not points:
        raise PSLError("need at least one sample point")
    flat = inv = vert = equi = 0.0
    for idx, x in enumerate(points):
        g = orbit_invert(q, x)
        flat = max(flat, flatness_residual(q, x, h))
        k = group_elements[idx % len(group_elements)]
        kx = prolonged_action(k, x)
        gk = orbit_invert(q, kx)
        for a in range(N):
            e = np.eye(N)[a]
            omega = maurer_cartan(q, x, e, g)
            moved = maurer_cartan(q, kx, pushforward(k, x, e, push_step), gk)
            inv = max(inv, (moved - omega).norm())
            kq = prolonged_action(k, q)
            other = maurer_cartan(kq, x, e, g @ k.inverse())
            equi = max(equi, float(np.max(np.abs(other.matrix - adjoint(k, omega.matrix)))))
            if a >= n:  # vertical directions: Z and W coordinates
                vert = max(vert, float(np.max(np.abs(base_field(omega.matrix,
                                                                 [float(np.real(t)) for t in q.y])))))
    return FormDiagnostics(flat, inv, vert, equi, h, len(points))


def verticality_residual(q: ProlongPoint, x: ProlongPoint, v) -> float:
    """|base component at y_q| of Omega_q(x, v); zero when v is vertical."""
    omega = maurer_cartan(q, x, v)
    return float(np.max(np.abs(base_field(omega.matrix, [float(np.real(t)) for t in q.y]))))


# --- prolonged structures (one transverse dimension) ------------------------------------

def moebius_compose(g: GroupElement, phi: TruncatedSeries) -> TruncatedSeries:
    """L_g o phi for a univariate series phi and a 2x2 group element."""
    if g.n != 1 or phi.nvars != 1:
        raise PSLError("moebius_compose handles n = q = 1")
    m = g.matrix
    den = phi * m[0][1] + m[0][0]
    if _is_zero(den.coeffs[0]):
        raise ChartEscapeError("chart image meets the point at infinity")
    return (phi * m[1][1] + m[1][0]) * den.reciprocal()


def _chart_derivs(phi: TruncatedSeries, x1: float) -> tuple:
    d1 = phi.diff(0)
    d2 = d1.diff(0)
    d3 = d2.diff(0)
    return tuple(complex(s.evaluate([x1])).real for s in (phi, d1, d2, d3))


def prolonged_chart(phi: TruncatedSeries, x1: float, z: float, w: float) -> tuple:
    """Image of (x1, z, w) under the prolonged chart and its 3x3 Jacobian."""
    f0, f1, f2, f3 = _chart_derivs(phi, x1)
    if abs(f1) < 1e-12:
        raise PSLError("chart is not a submersion at the sample point")
    point = ProlongPoint((f0,), (f1 * z,), ((w + f2 / f1 * z,),))
    jac = np.array([[f1, 0.0, 0.0],
                    [f2 * z, f1, 0.0],
                    [(f3 / f1 - (f2 / f1) ** 2) * z, f2 / f1, 1.0]])
    return point, jac


def chart_pullback(phi: TruncatedSeries, q: ProlongPoint, x1: float, z: float, w: float) -> list:
    """(prolonged phi)^* Omega_q at (x1, z, w), one matrix per coordinate direction."""
    point, jac = prolonged_chart(phi, x1, z, w)
    g = orbit_invert(q, point)
    return [maurer_cartan(q, point, jac[:, a], g).matrix for a in range(3)]


@dataclass(frozen=True)
class StructureReport:
    samples: int
    overlap_residual: float
    section_flatness: float | None
    leaf_kernel_residual: float | None
    transverse_min_norm: float | None
    forms: tuple


def zero_jet_section(x1: float, y1: float) -> tuple:
    """(z, w) = (1, 0): the 1-jet of d/dx1."""
    return 1.0, 0.0


def prolong_structure_pullback(charts: Sequence[tuple], q: ProlongPoint, section: Callable | None = None,
                               samples: Sequence[tuple] = (), h: float = 1e-4,
                               tol: float = 1e-8) -> StructureReport:
    """Pull Omega_q back through prolonged charts of a codimension-one foliation.

    ``charts`` is a list of ``(phi_i, g_i)`` where phi_i is a univariate series in
    the transverse coordinate x1 and ``phi_i = L_{g_i} o phi_0`` (g_0 may be None).
    ``samples`` are points ``(x1, y1, z, w)`` of the foliated chart and its
    prolongation.  With a section ``sigma(x1, y1) -> (z, w)`` the pullback to the
    foliated chart is also formed, together with its flatness residual and the
    kernel check of its component modulo the isotropy algebra of y_q.
    """
    if q.n != 1:
        raise PSLError("structure pullback is implemented for n = q = 1")
    if not charts:
        raise PSLError("need at least one chart")
    phis = [c[0] for c in charts]
    # compatibility of the atlas
    for phi, g in charts[1:]:
        if g is None:
            raise PSLError("every chart after the first needs its transition")
        for (x1, _y1, _z, _w) in samples:
            lhs = complex(phi.evaluate([x1])).real
            rhs = complex(moebius_compose(g, phis[0]).evaluate([x1])).real
            if abs(lhs - rhs) > tol * (1 + abs(lhs)):
                raise PSLError("charts are not related by the given transition")
    yq = [float(np.real(t)) for t in q.y]
    overlap = 0.0
    forms = []
    for (x1, _y1, z, w) in samples:
        per_chart = [chart_pullback(phi, q, x1, z, w) for phi in phis]
        forms.append(per_chart[0])
        for other in per_chart[1:]:
            overlap = max(overlap, max(float(np.max(np.abs(a - b))) for a, b in zip(per_chart[0], other)))
    if section is None:
        return StructureReport(len(samples), overlap, None, None, None, tuple(forms))

    phi = phis[0]

    def section_forms(x1, y1):
        z, w = section(x1, y1)
        point, jac = prolonged_chart(phi, x1, z, w)
        if point.is_degenerate:
            raise PoleLocusError("the section meets the pole locus")
        # differential of (x1, y1) -> (x1, sigma(x1, y1)) by central differences
        cols = []
        for dx, dy in ((h, 0.0), (0.0, h)):
            zp, wp = section(x1 + dx, y1 + dy)
            zm, wm = section(x1 - dx, y1 - dy)
            cols.append(np.array([dx / h, (zp - zm) / (2 * h), (wp - wm) / (2 * h)]))
        g = orbit_invert(q, point)
        return [maurer_cartan(q, point, jac @ c, g).matrix for c in cols]

    flat = kernel = 0.0
    trans = np.inf
    for (x1, y1, _z, _w) in samples:
        om = section_forms(x1, y1)
        kernel = max(kernel, float(np.max(np.abs(base_field(om[1], yq)))))
        trans = min(trans, float(np.max(np.abs(base_field(om[0], yq)))))
        px, mx = section_forms(x1 + h, y1), section_forms(x1 - h, y1)
        py, my = section_forms(x1, y1 + h), section_forms(x1, y1 - h)
        d_x_of_y = (px[1] - mx[1]) / (2 * h)
        d_y_of_x = (py[0] - my[0]) / (2 * h)
        curv = d_x_of_y - d_y_of_x + om[0] @ om[1] - om[1] @ om[0]
        flat = max(flat, float(np.max(np.abs(curv))))
    return StructureReport(len(samples), overlap, flat, kernel, trans, tuple(forms))


# --- seeded samplers ----------------------------------------------------------------------

def random_group_element(rng, n: int, exact_mode: bool = True, isotropy: bool = False,
                         spread: float = 1.0) -> GroupElement:
    """Invertible element with rational entries (exact) or uniform floats near the identity."""
    while True:
        if exact_mode:
            m = [[random_rational(rng) for _ in range(n + 1)] for _ in range(n + 1)]
        else:
            m = [[(1.0 if i == j else 0.0) + spread * rng.uniform(-0.5, 0.5) for j in range(n + 1)]
                 for i in range(n + 1)]
        if isotropy:
            for i in range(1, n + 1):
                m[i][0] = m[i][0] * 0
            m[0][0] = m[0][0] * 0 + 1
        try:
            return GroupElement(m)
        except PSLError:
            continue


def random_point(rng, n: int, exact_mode: bool = True, over_origin: bool = False,
                 nondegenerate: bool = True, height: int = 9,
                 max_condition: float | None = None) -> ProlongPoint:
    """Random point; rationals p/q with |p|, |q| <= height.

    ``max_condition`` rejects points whose infinitesimal-action matrix is
    worse conditioned than the bound, keeping samples off the pole locus.
    Small heights hit the special loci (for instance Z an eigenvector of W^T,
    where the stabiliser is positive dimensional) with visible probability;
    use a large height for generic samples.
    """
    draw = (lambda: random_rational(rng, -height, height)) if exact_mode else (lambda: rng.uniform(-1.0, 1.0))
    while True:
        y = [draw() * 0 if over_origin else draw() for _ in range(n)]
        pt = ProlongPoint(y, [draw() for _ in range(n)], [[draw() for _ in range(n)] for _ in range(n)])
        if nondegenerate and pt.is_degenerate:
            continue
        if max_condition is not None and \
                np.linalg.cond(infinitesimal_matrix(pt.to_vector().astype(float), n)) > max_condition:
            continue
        return pt
