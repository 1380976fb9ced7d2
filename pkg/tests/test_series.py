import random

import pytest
import sympy as sp
from gmpy2 import mpq
from hypothesis import given, strategies as st

import oracles
from jetconn import linalg
from jetconn.multiindex import MultiIndex, count_monomials, graded_lex, restricted
from jetconn.scalars import FLOAT, GaussianRational, exact
from jetconn.series import (SeriesError, SeriesMatrix, TruncatedSeries, compose_maps, identity_map,
                            random_series, series_invert_map)
from strategies import rationals, series, unipotent_matrices

X1 = sp.Symbol("x")


def uni(*coeffs, order=None):
    return TruncatedSeries.univariate([mpq(c) for c in coeffs], order=order)


# --- scalars and multi-indices ---------------------------------------------------------

def test_gaussian_rational_arithmetic():
    i = exact(0, 1)
    assert i * i == -1
    assert (1 + i) * (1 - i) == 2
    assert exact(3) / (1 + i) == GaussianRational(mpq(3, 2), mpq(-3, 2))
    assert isinstance(exact(5), mpq)


def test_exact_refuses_complex_floats():
    with pytest.raises(TypeError):
        exact(1 + 2j)


def test_graded_lex_layout():
    assert graded_lex(2, 2) == tuple(MultiIndex(m) for m in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)])
    assert count_monomials(3, 4) == 35
    assert all(m[1] == 0 for m in restricted(2, 3, (0,)))


def test_multiindex_helpers():
    i, j = MultiIndex((2, 1)), MultiIndex((1, 0))
    assert i.degree == 3 and i.factorial() == 2
    assert i.binomial(j) == 2
    assert i.dominates(j) and not j.dominates(i)
    assert i.minus(j) == MultiIndex((1, 1))


# --- series arithmetic ---------------------------------------------------------------------

def test_difference_of_squares():
    x = TruncatedSeries.variable(0, 1, 4)
    assert (1 + x) * (1 - x) == uni(1, 0, -1, 0, 0)


def test_square_of_x_plus_x2():
    x = TruncatedSeries.variable(0, 1, 4)
    assert (x + x * x) ** 2 == uni(0, 0, 1, 2, 1)


def test_partial_derivatives():
    x = TruncatedSeries.variable(0, 1, 5)
    assert (x ** 3).diff(0) == uni(0, 0, 3, 0, order=4)
    assert TruncatedSeries.constant(7, 1, 3).diff(0).is_zero()
    x1, x2 = TruncatedSeries.variable(0, 2, 4), TruncatedSeries.variable(1, 2, 4)
    assert (x1 * x2 * x2).diff(1) == (x1 * x2 * 2).truncate(3)


def test_derivative_lowers_order():
    assert TruncatedSeries.variable(0, 2, 5).diff(0).order == 4


def test_composition_examples():
    x = TruncatedSeries.variable(0, 1, 4)
    y2 = x * x
    assert y2.compose([x + x * x]) == uni(0, 0, 1, 2, 1)
    geometric = (1 - TruncatedSeries.variable(0, 1, 3)).reciprocal()
    assert geometric.compose([TruncatedSeries.variable(0, 1, 3)]) == uni(1, 1, 1, 1)


def test_inverse_map_examples():
    x = TruncatedSeries.variable(0, 1, 4)
    assert series_invert_map([x])[0] == x
    assert series_invert_map([x + x * x])[0] == uni(0, 1, -1, 2, -5)
    assert series_invert_map([x * 2])[0] == x * mpq(1, 2)


def test_inverse_map_matches_sympy_at_order_6():
    x = TruncatedSeries.variable(0, 1, 6)
    inv = series_invert_map([x + x * x])[0]
    y = sp.Symbol("y")
    root = sp.solve(sp.Eq(y, X1 + X1 ** 2), X1)
    branch = next(r for r in root if r.subs(y, 0) == 0)
    assert [oracles.q(c) for c in inv.coeffs] == oracles.coefficients(oracles.taylor(branch.subs(y, X1), X1, 6), X1, 6)


def test_inverse_map_rejects_singular_jacobian():
    x = TruncatedSeries.variable(0, 1, 4)
    with pytest.raises(SeriesError):
        series_invert_map([x * x])
    with pytest.raises(SeriesError):
        series_invert_map([x + 1])


def test_reciprocal_needs_unit():
    with pytest.raises(SeriesError):
        TruncatedSeries.variable(0, 1, 3).reciprocal()


def test_orders_do_not_exceed_the_cap():
    with pytest.raises(SeriesError):
        TruncatedSeries.zero(5, 3)
    with pytest.raises(SeriesError):
        TruncatedSeries.zero(1, 18)


def test_float_mode_series():
    x = TruncatedSeries.variable(0, 1, 5, FLOAT)
    r = (1 - x).reciprocal()
    assert all(abs(c - 1.0) < 1e-15 for c in r.coeffs)


def test_random_series_is_seeded():
    a = random_series(random.Random(3), 2, 5)
    b = random_series(random.Random(3), 2, 5)
    assert a == b


@given(series(2, 5), series(2, 5), series(2, 5))
def test_ring_axioms(f, g, h):
    assert (f * g) * h == f * (g * h)
    assert f * (g + h) == f * g + f * h
    assert f * g == g * f


@given(series(2, 5), series(2, 5))
def test_product_matches_sympy(f, g):
    syms = sp.symbols("a b")
    want = oracles.truncate(oracles.series_to_expr(f, syms) * oracles.series_to_expr(g, syms), syms, 5)
    assert sp.expand(oracles.series_to_expr(f * g, syms) - want) == 0


@given(series(2, 6), series(2, 6), st.integers(0, 1))
def test_leibniz_rule(f, g, var):
    assert (f * g).diff(var) == (f.diff(var) * g.truncate(5) + f.truncate(5) * g.diff(var))


@given(series(1, 6, constant=1))
def test_reciprocal_is_inverse(f):
    assert f * f.reciprocal() == TruncatedSeries.constant(1, 1, 6)


@given(series(2, 5))
def test_integrate_then_differentiate(f):
    assert f.integrate(1).diff(1) == f


@given(series(1, 6, zero_constant=True).filter(lambda s: s.coeffs[1] != 0))
def test_inverse_map_round_trip(g):
    (h,) = series_invert_map([g])
    x = identity_map(1, 6)
    assert compose_maps([g], [h]) == x
    assert compose_maps([h], [g]) == x


@given(series(1, 5), series(1, 5, zero_constant=True), series(1, 5, zero_constant=True))
def test_composition_is_associative(f, g, h):
    assert f.compose([g]).compose([h]) == f.compose([g.compose([h])])


# --- linear algebra ------------------------------------------------------------------------

@given(st.lists(rationals, min_size=9, max_size=9))
def test_det_and_inverse_match_sympy(entries):
    rows = [entries[0:3], entries[3:6], entries[6:9]]
    m = sp.Matrix([[oracles.q(v) for v in r] for r in rows])
    assert oracles.q(linalg.det(rows)) == m.det()
    if m.det() != 0:
        inv = linalg.inverse(rows)
        assert sp.Matrix([[oracles.q(v) for v in r] for r in inv]) == m.inv()
    else:
        with pytest.raises(linalg.SingularMatrixError):
            linalg.inverse(rows)


@given(st.lists(rationals, min_size=12, max_size=12))
def test_rank_nullity(entries):
    rows = [entries[0:4], entries[4:8], entries[8:12]]
    basis = linalg.exact_nullspace(rows, 4)
    assert linalg.exact_rank(rows) + len(basis) == 4
    for v in basis:
        assert all(sum(r[i] * v[i] for i in range(4)) == 0 for r in rows)


# --- series matrices -----------------------------------------------------------------------

@given(unipotent_matrices(2, 2, 4))
def test_series_matrix_inverse(m):
    ident = SeriesMatrix.identity(2, 2, 4)
    assert m @ m.inverse() == ident
    assert m.inverse() @ m == ident


def test_series_matrix_trace_and_transpose():
    x = TruncatedSeries.variable(0, 1, 3)
    one = TruncatedSeries.constant(1, 1, 3)
    m = SeriesMatrix([[one, x], [x * x, one + x]])
    assert m.trace() == one * 2 + x
    assert m.transpose()[0, 1] == x * x
