from math import factorial

import pytest
import sympy as sp
from gmpy2 import mpq
from hypothesis import assume, given, strategies as st

import oracles
from jetconn import transverse_ode as to
from jetconn.series import TruncatedSeries
from strategies import germs, nonzero_rationals, rationals, series

X = sp.Symbol("x")
T = 10

# Taylor coefficients of cos and of the scaled Schwarzian of x + x^2, from the sympy oracle
COS_8 = [1, 0, mpq(-1, 2), 0, mpq(1, 24), 0, mpq(-1, 720), 0, mpq(1, 40320)]
THETA_X_PLUS_X2 = [-1, 4, -12, 32, -80, 192, -448]


def uni(coeffs, order=T):
    return TruncatedSeries.univariate([mpq(c) for c in coeffs], order=order)


def zero(order=T):
    return TruncatedSeries.zero(1, order)


def const(c, order=T):
    return TruncatedSeries.constant(c, 1, order)


def harmonic():
    return to.TransverseEquation.second_order(zero(), const(1))


# --- solving --------------------------------------------------------------------------------

def test_free_particle():
    (f,) = to.solve_ode(to.TransverseEquation.second_order(zero(), zero()), [0, 1])
    assert f == uni([0, 1])


def test_cosine_series():
    (f,) = to.solve_ode(harmonic(), [1, 0], order=8)
    assert list(f.coeffs) == COS_8


def test_nilpotent_first_order_system():
    eq = to.TransverseEquation.first_order_system([[zero(), const(1)], [zero(), zero()]])
    f1, f2 = to.solve_ode(eq, [0, 1])
    assert f1 == uni([0, 1]) and f2 == const(1)


def test_fundamental_bases():
    (one,), (x,) = to.fundamental_basis(to.TransverseEquation.second_order(zero(), zero()))
    assert one == const(1) and x == uni([0, 1])
    (c,), (s,) = to.fundamental_basis(harmonic(), order=8)
    assert list(c.coeffs) == COS_8
    assert s.diff(0).agrees(c.truncate(7))
    eq = to.TransverseEquation.first_order_system([[zero(), zero()], [zero(), zero()]])
    assert to.fundamental_basis(eq) == [(const(1), const(0)), (const(0), const(1))]


def test_non_monic_is_rejected():
    with pytest.raises(to.ODEError):
        to.TransverseEquation.monic([[const(2)]], [((const(1),),)])
    eq = to.TransverseEquation.monic([[const(1)]], [((const(1),),), ((zero(),),)])
    assert eq.order == 2


def test_wrong_number_of_initial_values():
    with pytest.raises(to.ODEError):
        to.solve_ode(harmonic(), [1])


@given(series(1, 8), series(1, 8), rationals, rationals)
def test_solutions_satisfy_the_equation(a, b, f0, f1):
    (f,) = to.solve_ode(to.TransverseEquation.second_order(a, b), [f0, f1])
    fa, aa, bb = (oracles.series_to_expr(s, [X]) for s in (f, a, b))
    residual = sp.diff(fa, X, 2) + aa * sp.diff(fa, X) + bb * fa
    assert oracles.truncate(residual, [X], 6) == 0


@given(st.integers(1, 3), st.integers(1, 2), st.data())
def test_initial_jets_of_the_fundamental_basis(k, r, data):
    coeffs = [[[data.draw(series(1, 6)) for _ in range(r)] for _ in range(r)] for _ in range(k)]
    eq = to.TransverseEquation(k, r, coeffs)
    sols = to.fundamental_basis(eq)
    assert len(sols) == eq.solution_dim == r * k
    m = to.initial_jet_matrix(sols, k)
    assert all(m[i][j] == (1 if i == j else 0) for i in range(r * k) for j in range(r * k))


@given(series(1, 8), series(1, 8))
def test_abel_identity_for_the_wronskian(a, b):
    (f1,), (f2,) = to.fundamental_basis(to.TransverseEquation.second_order(a, b))
    w = to.wronskian(f1, f2)
    dw = w.diff(0)
    assert dw.agrees((-(a * w)).truncate(dw.order))


# --- induced extension -----------------------------------------------------------------------

def test_second_order_extension_matrix():
    a, b = uni([1, 2]), uni([3, 0, -1])
    conn = to.induced_extension(to.TransverseEquation.second_order(a, b))
    m = conn.matrix
    assert m[0, 0].is_zero() and m[0, 1] == const(-1)
    assert m[1, 0] == b and m[1, 1] == a
    assert conn.trace == a


def test_trivial_first_order_extension():
    conn = to.induced_extension(to.TransverseEquation(1, 1, [[[zero()]]]))
    assert conn.matrix[0, 0].is_zero()


@given(st.integers(1, 3), st.integers(1, 2), st.data())
def test_jets_of_solutions_are_flat(k, r, data):
    coeffs = [[[data.draw(series(1, 6)) for _ in range(r)] for _ in range(r)] for _ in range(k)]
    eq = to.TransverseEquation(k, r, coeffs)
    conn = to.induced_extension(eq)
    for sol in to.fundamental_basis(eq):
        assert all(v.is_zero() for v in conn.residual(to.jet_vector(sol, k)))


# --- Schwarzian --------------------------------------------------------------------------------

@pytest.mark.parametrize("abcd", [(1, 0, 0, 1), (2, 1, 1, 3), (1, -4, 5, 2), (0, 1, -1, 7)])
def test_moebius_germs_have_zero_schwarzian(abcd):
    a, b, c, d = (mpq(v) for v in abcd)
    x = TruncatedSeries.variable(0, 1, 12)
    assert to.schwarzian((x * a + b) * (x * c + d).reciprocal()).is_zero()


def test_exponential_has_constant_schwarzian():
    th = to.schwarzian(uni([mpq(1, factorial(i)) for i in range(T + 1)]))
    assert th == const(mpq(-1, 12), th.order)


def test_schwarzian_of_x_plus_x2():
    th = to.schwarzian(uni([0, 1, 1]))
    assert list(th.truncate(6).coeffs) == THETA_X_PLUS_X2


def test_schwarzian_rejects_critical_germs():
    with pytest.raises(to.ODEError):
        to.schwarzian(uni([0, 0, 1]))


def test_ratio_examples():
    assert to.schwarzian_ratio(uni([0, 1]), const(1)).is_zero()
    (c,), (s,) = to.fundamental_basis(harmonic())
    th = to.schwarzian_ratio(s, c)
    assert th == const(mpq(1, 3), th.order)
    assert to.schwarzian_ratio(c, s) == th


def test_ratio_needs_independent_jets():
    with pytest.raises(to.ODEError):
        to.schwarzian_ratio(uni([1, 2]), uni([2, 4]))


@given(series(1, 8, max_degree=5).filter(lambda s: s.coeffs[1] != 0))
def test_schwarzian_matches_sympy(f):
    th = to.schwarzian(f)
    want = oracles.schwarzian(oracles.series_to_expr(f, [X]), X, th.order)
    assert [oracles.q(c) for c in th.coeffs] == oracles.coefficients(want, X, th.order)


@given(series(1, T), series(1, T))
def test_ratio_of_solutions(a, b):
    (f1,), (f2,) = to.fundamental_basis(to.TransverseEquation.second_order(a, b))
    th = to.schwarzian_ratio(f1, f2)
    assert th.order >= T - 3
    assert th.agrees(to.ode_to_projective(a, b).c.truncate(th.order))


@given(series(1, T), series(1, T), st.tuples(rationals, rationals, rationals, rationals))
def test_ratio_of_any_independent_pair(a, b, m):
    (f1,), (f2,) = to.fundamental_basis(to.TransverseEquation.second_order(a, b))
    p, q_, r, s = m
    assume(p * s - q_ * r != 0)
    g1, g2 = f1 * p + f2 * q_, f1 * r + f2 * s
    th = to.schwarzian_ratio(g1, g2)
    assert th.agrees(to.ode_to_projective(a, b).c.truncate(th.order))


# --- affine and projective data ----------------------------------------------------------------

def test_projective_examples():
    assert to.ode_to_projective(zero(), zero()).c.is_zero()
    assert to.ode_to_projective(zero(), const(1)).c == const(mpq(1, 3), T - 1)
    x = TruncatedSeries.variable(0, 1, T)
    assert to.ode_to_projective(x * 2, x * x).c == const(mpq(-1, 3), T - 1)


def test_inverse_projective_examples():
    assert to.projective_to_ode(zero(), zero()).is_zero()
    assert to.projective_to_ode(zero(), const(mpq(1, 3))) == const(1, T - 1)


def test_ratio_formula_on_a_fixed_equation():
    # a = x, b = 1 + x^2 gives c = 1/6 + x^2/4
    x = TruncatedSeries.variable(0, 1, T)
    a, b = x, 1 + x * x
    assert to.ode_to_projective(a, b).c == uni([mpq(1, 6), 0, mpq(1, 4)], T - 1)
    (f1,), (f2,) = to.fundamental_basis(to.TransverseEquation.second_order(a, b))
    th = to.schwarzian_ratio(f1, f2)
    assert th == uni([mpq(1, 6), 0, mpq(1, 4)], th.order)


@given(series(1, T), series(1, T))
def test_bijection_round_trips(a, b):
    pd = to.ode_to_projective(a, b)
    back = to.projective_to_ode(pd.a, pd.c)
    assert back.agrees(b.truncate(back.order))
    again = to.ode_to_projective(a, to.projective_to_ode(a, b))
    assert again.c.agrees(b.truncate(again.c.order))


# --- cocycle -------------------------------------------------------------------------------------

def test_cocycle_of_identities():
    x = TruncatedSeries.variable(0, 1, T)
    assert to.cocycle_defect(x, x).is_zero()


@given(germs(T), nonzero_rationals, rationals)
def test_moebius_outer_germ(f2, a, c):
    x = TruncatedSeries.variable(0, 1, T)
    f1 = x * a * (x * c + 1).reciprocal()
    assert to.cocycle_defect(f1, f2).is_zero()
    lhs = to.schwarzian(f1.compose([f2]))
    rhs = to.schwarzian(f2)
    assert lhs.agrees(rhs.truncate(lhs.order))


@given(germs(T, constant=2), germs(T))
def test_cocycle_identity(f1, f2):
    d = to.cocycle_defect(f1, f2)
    assert d.order >= T - 5 and d.is_zero()


def test_inner_germ_must_fix_origin():
    with pytest.raises(to.ODEError):
        to.cocycle_defect(uni([0, 1]), uni([1, 1]))
