import pytest
import sympy as sp
from gmpy2 import mpq
from hypothesis import given, strategies as st

import oracles
from jetconn import jets as jt
from jetconn.multiindex import MultiIndex
from jetconn.series import SeriesMatrix, TruncatedSeries
from strategies import series


def var(i, n, t):
    return TruncatedSeries.variable(i, n, t)


def const(c, n, t):
    return TruncatedSeries.constant(c, n, t)


def test_jet_of_x_squared():
    x = var(0, 1, 4)
    j = jt.d_k(x * x, 2)
    assert j.basis == "B2"
    assert j.coefficient((0,)).agrees((x * x).truncate(j.coefficient((0,)).order))
    assert j.coefficient((1,)).agrees((x * 2).truncate(3))
    assert j.coefficient((2,)).agrees(const(1, 1, 2))


def test_jet_of_constant_has_only_zeta0():
    for k in range(4):
        j = jt.d_k(const(mpq(5, 3), 2, 5), k)
        assert set(j.terms()) == {MultiIndex((0, 0))}


def test_jet_of_geometric_series():
    x = var(0, 1, 5)
    f = (1 - x).reciprocal()
    j = jt.d_k(f, 3)
    for i in range(4):
        c = j.coefficient((i,))
        want = (1 - x) ** 0
        for _ in range(i + 1):
            want = want * f
        assert c.agrees(want.truncate(c.order))


def test_d1_of_x_in_zeta_basis():
    x = var(0, 1, 3)
    j = jt.d_k(x, 1)
    assert j.coefficient((0,)).agrees(x.truncate(j.coefficient((0,)).order))
    assert j.coefficient((1,)).agrees(const(1, 1, 2))


def test_zeta_squared_in_monomial_basis():
    ring = jt.JetRing(1, 2)
    x = var(0, 1, 4)
    z2 = jt.JetElement.basis_element(ring, "B2", (2,), 4).to("B1")
    assert z2.coefficient((0,)) == x * x
    assert z2.coefficient((1,)) == x * -2
    assert z2.coefficient((2,)) == const(1, 1, 4)


def test_zeta_times_top_power_vanishes():
    for k in (1, 2, 3):
        ring = jt.JetRing(1, k)
        z = jt.JetElement.basis_element(ring, "B2", (1,), 4)
        top = jt.JetElement.basis_element(ring, "B2", (k,), 4)
        assert (z * top).is_zero()


def test_square_of_x_plus_zeta_at_k1():
    ring = jt.JetRing(1, 1)
    x = var(0, 1, 4)
    e = jt.JetElement.from_terms(ring, "B2", {(0,): x, (1,): const(1, 1, 4)}, 4)
    sq = e * e
    assert sq.coefficient((0,)) == x * x
    assert sq.coefficient((1,)) == x * 2


def test_exact_sequence_examples():
    x = var(0, 1, 4)
    ring1, ring2 = jt.JetRing(1, 1), jt.JetRing(1, 2)
    dx = jt.differential(x)
    iota = jt.inject_symbol([dx], ring1)
    assert iota.coefficient((1,)) == const(1, 1, 3) and iota.coefficient((0,)).is_zero()
    assert jt.truncate_jet(jt.inject_symbol([dx, dx], ring2)).is_zero()


def test_symbol_requires_k_forms():
    with pytest.raises(jt.JetError):
        jt.inject_symbol([jt.differential(var(0, 1, 3))], jt.JetRing(1, 2))


def test_unknown_basis_tag():
    ring = jt.JetRing(1, 1)
    with pytest.raises(jt.JetError):
        jt.JetElement(ring, "B3", [const(0, 1, 2)] * 2)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("k", [0, 1, 2, 3, 4, 5])
def test_change_matrices_are_mutual_inverses(n, k):
    ring = jt.JetRing(n, k)
    a = jt.change_matrix(ring, "B1", "B2", k)
    b = jt.change_matrix(ring, "B2", "B1", k)
    ident = SeriesMatrix.identity(ring.rank, n, k)
    assert a @ b == ident and b @ a == ident


@given(series(2, 6, max_degree=4), st.integers(0, 3))
def test_jet_coefficients_match_taylor_shift(f, k):
    xs, zs = sp.symbols("x0:2"), sp.symbols("z0:2")
    want = oracles.jet_coefficients(oracles.series_to_expr(f, xs), xs, zs, k)
    got = jt.d_k(f, k)
    for mono, c in zip(got.ring.indices, got.coeffs):
        expected = oracles.truncate(want.get(tuple(mono), sp.Integer(0)), xs, c.order)
        assert sp.expand(oracles.series_to_expr(c, xs) - expected) == 0


@given(series(2, 6, max_degree=4), series(2, 6, max_degree=4), st.integers(1, 3))
def test_jet_map_is_multiplicative(f, g, k):
    assert jt.d_k(f * g, k).agrees(jt.d_k(f, k) * jt.d_k(g, k))


@given(series(2, 6), st.integers(1, 3))
def test_truncation_is_compatible(f, k):
    assert jt.truncate_jet(jt.d_k(f, k)).agrees(jt.d_k(f, k - 1))


@given(series(2, 5), st.sampled_from(["B1", "B2"]))
def test_basis_round_trip(f, start):
    j = jt.d_k(f, 2).to(start)
    assert j.to("B1").to("B2").to(start).agrees(j)


@given(series(2, 6, max_degree=3), series(2, 6, max_degree=3))
def test_products_of_shifted_jets_are_symbols(f, g):
    ring = jt.JetRing(2, 2)
    via_jets = jt.inject_differentials([f, g], ring)
    assert via_jets.agrees(jt.inject_symbol([jt.differential(f), jt.differential(g)], ring))
    assert jt.truncate_jet(via_jets).is_zero()


def test_transverse_jets_only_use_transverse_indices():
    ring = jt.JetRing(3, 2, (0,))
    assert ring.indices == (MultiIndex((0, 0, 0)), MultiIndex((1, 0, 0)), MultiIndex((2, 0, 0)))
    with pytest.raises(jt.JetError):
        jt.JetRing(2, 1, (2,))


# --- prolongation of maps ---------------------------------------------------------------------

def test_prolongation_of_identity():
    data = jt.prolong_map_1([var(0, 2, 4), var(1, 2, 4)])
    J, zp, wp = data.at_origin()
    assert J == [[1, 0], [0, 1]]
    assert all(v == 0 for a in zp for b in a for v in b)
    assert all(wp[a][b][i][j] == (1 if (a, b) == (i, j) else 0)
               for a in range(2) for b in range(2) for i in range(2) for j in range(2))


def test_prolongation_of_doubling():
    data = jt.prolong_map_1([var(0, 1, 4) * 2])
    z, w = data.apply([mpq(3)], [[mpq(7)]])
    assert z[0].constant_term() == 6
    assert w[0][0].constant_term() == 7


def test_prolongation_matches_pushforward_oracle():
    xs = sp.symbols("u0:2")
    x0, x1 = var(0, 2, 5), var(1, 2, 5)
    phi = [x0 * 2 + x1 + x0 * x1 - x1 * x1 * mpq(1, 3), x1 * -1 + x0 * x0 * 3 + x0 * x1 * x1]
    Z, W = [mpq(2), mpq(-1, 2)], [[mpq(1), mpq(4)], [mpq(-3), mpq(5, 7)]]
    J, zp, wp = jt.prolong_map_1(phi).at_origin()
    z_new = [sum(J[j][i] * Z[i] for i in range(2)) for j in range(2)]
    w_new = [[sum(zp[a][b][i] * Z[i] for i in range(2)) + sum(wp[a][b][i][j] * W[i][j]
                                                             for i in range(2) for j in range(2))
              for b in range(2)] for a in range(2)]
    want_z, want_w = oracles.pushforward_one_jet([oracles.series_to_expr(p, xs) for p in phi], xs, [0, 0],
                                                 [oracles.q(v) for v in Z], [[oracles.q(v) for v in r] for r in W])
    assert [oracles.q(v) for v in z_new] == want_z
    assert [[oracles.q(v) for v in r] for r in w_new] == want_w


def test_prolongation_rejects_critical_maps():
    with pytest.raises(jt.JetError):
        jt.prolong_map_1([var(0, 1, 4) * var(0, 1, 4)])
