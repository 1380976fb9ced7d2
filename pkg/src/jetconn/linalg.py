"""Small dense linear algebra over whatever field the entries live in.

``inverse``/``solve``/``det`` run a plain Gauss-Jordan elimination that works
for ``mpq``, :class:`GaussianRational`, floats and complex numbers alike;
matrices here are at most (n+1)x(n+1) with n <= 4.  Exact rank and nullspace
of the larger constraint systems go through sympy's ``DomainMatrix``.
"""

from __future__ import annotations

from typing import Sequence

from gmpy2 import mpq
from sympy.polys.domains import QQ, QQ_I
from sympy.polys.matrices import DomainMatrix

from .scalars import GaussianRational, exact


class SingularMatrixError(ArithmeticError):
    pass


def _is_float(x) -> bool:
    return isinstance(x, (float, complex))


def identity(n: int, one=1, zero=0):
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def matmul(a, b):
    inner = len(b)
    cols = len(b[0]) if inner else 0
    out = []
    for row in a:
        out.append([sum((row[k] * b[k][j] for k in range(inner)), 0 * row[0]) for j in range(cols)])
    return out


def matvec(a, v):
    return [sum((row[k] * v[k] for k in range(len(v))), 0 * row[0]) for row in a]


def transpose(a):
    return [list(r) for r in zip(*a)]


def trace(a):
    return sum((a[i][i] for i in range(len(a))), 0 * a[0][0])


def _pivot(rows, col, start):
    best, best_abs = None, -1.0
    for r in range(start, len(rows)):
        v = rows[r][col]
        if _is_float(v):
            av = abs(v)
            if av > best_abs:
                best, best_abs = r, av
        elif v != 0:
            return r
    if best is not None and best_abs > 0.0:
        return best
    return None


def solve(a: Sequence[Sequence], b: Sequence[Sequence]):
    """Solve A X = B for square A (B given as a list of rows)."""
    n = len(a)
    m = len(b[0])
    rows = [list(a[i]) + list(b[i]) for i in range(n)]
    for col in range(n):
        p = _pivot(rows, col, col)
        if p is None:
            raise SingularMatrixError("matrix is singular")
        rows[col], rows[p] = rows[p], rows[col]
        piv = rows[col][col]
        rows[col] = [v / piv for v in rows[col]]
        for r in range(n):
            if r != col:
                f = rows[r][col]
                if f != 0:
                    rows[r] = [x - f * y for x, y in zip(rows[r], rows[col])]
    return [row[n:n + m] for row in rows]


def inverse(a):
    n = len(a)
    one = a[0][0] * 0 + 1
    return solve(a, identity(n, one, one * 0))


def det(a):
    n = len(a)
    rows = [list(r) for r in a]
    out = rows[0][0] * 0 + 1
    for col in range(n):
        p = _pivot(rows, col, col)
        if p is None:
            return out * 0
        if p != col:
            rows[col], rows[p] = rows[p], rows[col]
            out = -out
        piv = rows[col][col]
        out = out * piv
        for r in range(col + 1, n):
            f = rows[r][col] / piv
            if f != 0:
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[col])]
    return out


# --- exact rank / nullspace -------------------------------------------------

def _domain_for(entries):
    return QQ_I if any(isinstance(v, GaussianRational) and v.im != 0 for v in entries) else QQ


def _to_domain(v, dom):
    v = exact(v)
    if dom is QQ:
        if isinstance(v, GaussianRational):
            return QQ(v.re)
        return QQ(v)
    if isinstance(v, GaussianRational):
        return QQ_I(QQ(v.re), QQ(v.im))
    return QQ_I(QQ(v), QQ(0))


def _from_domain(v, dom):
    if dom is QQ:
        return mpq(v)
    return exact(mpq(v.x), mpq(v.y))


def domain_matrix(rows):
    rows = [list(r) for r in rows]
    nrows = len(rows)
    ncols = len(rows[0]) if nrows else 0
    dom = _domain_for([v for r in rows for v in r])
    return DomainMatrix([[_to_domain(v, dom) for v in r] for r in rows], (nrows, ncols), dom), dom


def exact_rank(rows) -> int:
    if not rows or not rows[0]:
        return 0
    dm, _ = domain_matrix(rows)
    return dm.rank()


def exact_nullspace(rows, ncols: int | None = None) -> list:
    """Basis (list of vectors) of {v : rows . v = 0}, exact."""
    if not rows:
        if ncols is None:
            raise ValueError("ncols is required for an empty system")
        return [[mpq(1) if i == j else mpq(0) for i in range(ncols)] for j in range(ncols)]
    dm, dom = domain_matrix(rows)
    ns = dm.nullspace().to_list()
    return [[_from_domain(v, dom) for v in vec] for vec in ns]
