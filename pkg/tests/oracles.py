"""Independent sympy oracles.

Nothing here calls into jetconn except the converters at the top, which only
read coefficients.  Everything else is computed from scratch with sympy
expressions and compared against the library.
"""

from __future__ import annotations

import sympy as sp
from gmpy2 import mpq


def q(v) -> sp.Rational:
    if isinstance(v, mpq):
        return sp.Rational(int(v.numerator), int(v.denominator))
    return sp.nsimplify(v) if isinstance(v, float) else sp.Rational(v)


def series_to_expr(s, syms) -> sp.Expr:
    return sum((q(c) * sp.prod([x ** e for x, e in zip(syms, mono)]) for mono, c in s.terms().items()),
               sp.Integer(0))


def truncate(expr, syms, order) -> sp.Expr:
    poly = sp.Poly(sp.expand(expr), *syms)
    return sum((c * sp.prod([x ** e for x, e in zip(syms, m)]) for m, c in poly.terms() if sum(m) <= order),
               sp.Integer(0))


def taylor(expr, x, order) -> sp.Expr:
    return sp.series(expr, x, 0, order + 1).removeO()


def coefficients(expr, x, order) -> list:
    poly = sp.Poly(sp.expand(expr), x)
    return [poly.coeff_monomial(x ** i) for i in range(order + 1)]


# --- jets ------------------------------------------------------------------------------

def jet_coefficients(f, xs, zetas, k) -> dict:
    """{exponent: coefficient of zeta^exponent} in f(x + zeta), truncated at degree k in zeta."""
    shifted = sp.expand(f.subs({x: x + z for x, z in zip(xs, zetas)}, simultaneous=True))
    poly = sp.Poly(shifted, *zetas)
    return {m: sp.expand(c) for m, c in poly.terms() if sum(m) <= k}


# --- Schwarzian ------------------------------------------------------------------------

def schwarzian(f, x, order) -> sp.Expr:
    """Textbook Schwarzian f'''/f' - (3/2)(f''/f')^2, scaled by 1/6, as a Taylor polynomial."""
    d1, d2, d3 = (sp.diff(f, x, i) for i in (1, 2, 3))
    return taylor((d3 / d1 - sp.Rational(3, 2) * (d2 / d1) ** 2) / 6, x, order)


# --- pushforward of 1-jets of vector fields ----------------------------------------------

def pushforward_one_jet(phi, xs, base, Z, W):
    """1-jet at phi(base) of phi_* v, where v_j2(u) = Z_j2 + sum_j1 (u - base)_j1 W[j1][j2].

    Returns (Z', W') with W'[j1][j2] = d(phi_* v)_j2 / dv_j1.
    """
    n = len(xs)
    field = [Z[j2] + sum((xs[j1] - base[j1]) * W[j1][j2] for j1 in range(n)) for j2 in range(n)]
    jac = sp.Matrix([[sp.diff(phi[a], xs[b]) for b in range(n)] for a in range(n)])
    pushed = jac * sp.Matrix(field)
    at = dict(zip(xs, base))
    jinv = jac.subs(at).inv()
    z_new = [sp.simplify(pushed[j].subs(at)) for j in range(n)]
    w_new = [[sp.simplify(sum(sp.diff(pushed[j2], xs[k]).subs(at) * jinv[k, j1] for k in range(n)))
              for j2 in range(n)] for j1 in range(n)]
    return z_new, w_new


def moebius(matrix, xs):
    n = len(xs)
    den = matrix[0][0] + sum(matrix[0][j + 1] * xs[j] for j in range(n))
    return [(matrix[i + 1][0] + sum(matrix[i + 1][j + 1] * xs[j] for j in range(n))) / den for i in range(n)]


def prolonged_moebius(matrix, y, Z, W):
    n = len(y)
    xs = sp.symbols(f"u0:{n}")
    m = [[q(v) for v in row] for row in matrix]
    phi = moebius(m, xs)
    base = [q(v) for v in y]
    y_new = [sp.simplify(p.subs(dict(zip(xs, base)))) for p in phi]
    z_new, w_new = pushforward_one_jet(phi, xs, base, [q(v) for v in Z], [[q(v) for v in r] for r in W])
    return y_new, z_new, w_new


# --- stabiliser and incidence systems ------------------------------------------------------

def isotropy_dimension(Z, W) -> int:
    """Solutions (X, B) of X Z = 0 and B Z^T = W X^T - X^T W."""
    n = len(Z)
    X = sp.Matrix(n, n, sp.symbols(f"x0:{n * n}"))
    B = sp.Matrix(n, 1, sp.symbols(f"b0:{n}"))
    Zm = sp.Matrix(n, 1, [q(v) for v in Z])
    Wm = sp.Matrix(n, n, [q(v) for r in W for v in r])
    eqs = list(X * Zm) + list(B * Zm.T - Wm * X.T + X.T * Wm)
    unknowns = list(X) + list(B)
    mat, _ = sp.linear_eq_to_matrix(eqs, unknowns)
    return len(unknowns) - mat.rank()


def incidence_dimension(A, B, Z, W) -> int:
    """Nullity of the Jacobian of A Z - Z, B Z^T - W A^T + A^T W at the given point."""
    n = len(Z)
    a = sp.Matrix(n, n, sp.symbols(f"a0:{n * n}"))
    b = sp.Matrix(n, 1, sp.symbols(f"b0:{n}"))
    z = sp.Matrix(n, 1, sp.symbols(f"z0:{n}"))
    w = sp.Matrix(n, n, sp.symbols(f"w0:{n * n}"))
    eqs = list(a * z - z) + list(b * z.T - w * a.T + a.T * w)
    unknowns = list(a) + list(b) + list(z) + list(w)
    jac = sp.Matrix(eqs).jacobian(unknowns)
    values = dict(zip(list(a), [q(v) for r in A for v in r]))
    values.update(zip(list(b), [q(v) for v in B]))
    values.update(zip(list(z), [q(v) for v in Z]))
    values.update(zip(list(w), [q(v) for r in W for v in r]))
    return len(unknowns) - jac.subs(values).rank()
