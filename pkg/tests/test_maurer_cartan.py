"""Floating-point orbit inversion, Maurer-Cartan forms and structure pullbacks."""

import random

import numpy as np
import pytest
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from jetconn import psl
from jetconn.harness import Scenario, structure_fixture
from jetconn.series import TruncatedSeries

seeds = st.integers(0, 2 ** 32)


def sample(seed, n, cond=100):
    rng = random.Random(seed)
    q = psl.random_point(rng, n, False, over_origin=True, max_condition=cond)
    g = psl.random_group_element(rng, n, False, spread=0.6)
    return rng, q, g


def image(g, q):
    try:
        return psl.prolonged_action(g, q)
    except psl.ChartEscapeError:
        pytest.skip("sampled element moves the base point to infinity")


# --- Lie algebra helpers ------------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3])
def test_sl_coordinates_invert_the_basis(n):
    rng = np.random.default_rng(n)
    coords = rng.normal(size=len(psl.sl_basis(n)))
    m = sum(c * e for c, e in zip(coords, psl.sl_basis(n)))
    assert np.allclose(psl.sl_coordinates(m), coords)
    assert len(coords) == psl.prolong_dim(n)


def test_lie_values_are_traceless():
    with pytest.raises(psl.PSLError):
        psl.LieAlgValue(np.eye(2))
    assert psl.LieAlgValue(np.array([[1.0, 2.0], [3.0, -1.0]])).norm() == 3.0


@pytest.mark.parametrize("n", [1, 2])
def test_fundamental_field_matches_finite_differences(n):
    rng = random.Random(n)
    pt = psl.random_point(rng, n, False)
    xi = psl.traceless(np.array([[rng.uniform(-1, 1) for _ in range(n + 1)] for _ in range(n + 1)]))
    h = 1e-5

    def moved(t):
        return psl.prolonged_action(psl.GroupElement.from_array(expm(t * xi)), pt).to_vector()

    fd = (moved(h) - moved(-h)) / (2 * h)
    assert np.max(np.abs(fd - psl.fundamental_field(xi, pt))) < 1e-8


# --- orbit inversion ---------------------------------------------------------------------------

def test_inverting_at_the_base_point_gives_the_identity():
    q = psl.ProlongPoint.over_origin([0.7], [[-0.3]])
    g = psl.orbit_invert(q, q)
    assert g.distance(psl.GroupElement.identity(1, 1.0)) < 1e-12


@settings(max_examples=30)
@given(seeds, st.sampled_from([1, 2]))
def test_orbit_invert_round_trip(seed, n):
    _, q, g = sample(seed, n)
    x = image(g, q)
    assert g.distance(psl.orbit_invert(q, x)) < 1e-8


def test_degenerate_fibers_are_on_the_pole_locus():
    q = psl.ProlongPoint.over_origin([0.5], [[0.25]])
    with pytest.raises(psl.PoleLocusError):
        psl.orbit_invert(q, psl.ProlongPoint((0.1,), (0.0,), ((1.0,),)))


# --- Maurer-Cartan form ---------------------------------------------------------------------

@settings(max_examples=15)
@given(seeds, st.sampled_from([1, 2]))
def test_form_recovers_the_generator(seed, n):
    rng, q, g = sample(seed, n)
    x = image(g, q)
    xi = psl.traceless(np.array([[rng.uniform(-1, 1) for _ in range(n + 1)] for _ in range(n + 1)]))
    h = 1e-5
    gm = g.to_array()

    def moved(t):
        return psl.prolonged_action(psl.GroupElement.from_array(gm @ expm(t * xi)), q).to_vector()

    v = (moved(h) - moved(-h)) / (2 * h)
    omega = psl.maurer_cartan(q, x, v, g)
    assert np.max(np.abs(omega.matrix - xi)) < 1e-8


@settings(max_examples=15)
@given(seeds, st.sampled_from([1, 2]))
def test_vertical_vectors_land_in_the_isotropy_algebra(seed, n):
    rng, q, g = sample(seed, n)
    x = image(g, q)
    v = np.zeros(psl.prolong_dim(n))
    v[n:] = [rng.uniform(-1, 1) for _ in range(len(v) - n)]
    assert psl.verticality_residual(q, x, v) < 1e-8


@settings(max_examples=15)
@given(seeds, st.sampled_from([1, 2]))
def test_changing_the_base_point_conjugates_the_form(seed, n):
    rng, q, g = sample(seed, n)
    x = image(g, q)
    k = psl.random_group_element(rng, n, False, spread=0.5)
    kq = image(k, q)
    e = np.array([rng.uniform(-1, 1) for _ in range(psl.prolong_dim(n))])
    omega = psl.maurer_cartan(q, x, e, g)
    other = psl.maurer_cartan(kq, x, e, g @ k.inverse())
    assert np.max(np.abs(other.matrix - psl.adjoint(k, omega.matrix))) < 1e-8


def test_form_is_linear_in_the_tangent_vector():
    rng, q, g = sample(11, 2)
    x = image(g, q)
    v1, v2 = (np.array([rng.uniform(-1, 1) for _ in range(8)]) for _ in range(2))
    lhs = psl.maurer_cartan(q, x, 2.5 * v1 - v2, g).matrix
    rhs = 2.5 * psl.maurer_cartan(q, x, v1, g).matrix - psl.maurer_cartan(q, x, v2, g).matrix
    assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_tangent_vectors_must_have_the_right_size():
    _, q, g = sample(3, 1)
    with pytest.raises(psl.PSLError):
        psl.maurer_cartan(q, image(g, q), np.zeros(5), g)


def test_flatness_and_invariance_diagnostics():
    rng = random.Random(5)
    q = psl.random_point(rng, 1, False, over_origin=True, max_condition=50)
    pts = [psl.random_point(rng, 1, False, max_condition=50) for _ in range(3)]
    ks = [psl.random_group_element(rng, 1, False, spread=0.5) for _ in range(2)]
    d = psl.form_diagnostics(q, pts, ks, h=1e-4)
    assert d.samples == 3
    assert d.flatness < 1e-4
    assert d.invariance < 1e-8 and d.equivariance < 1e-8 and d.verticality < 1e-8


# --- prolonged charts and structures --------------------------------------------------------------

def test_prolonged_chart_jacobian():
    phi = TruncatedSeries.univariate([0, 1, mpq(1, 4), mpq(-1, 8)], order=10)
    args = np.array([0.05, 0.8, -0.3])
    _, jac = psl.prolonged_chart(phi, *args)
    h = 1e-6
    for a in range(3):
        e = np.eye(3)[a] * h
        plus = psl.prolonged_chart(phi, *(args + e))[0].to_vector()
        minus = psl.prolonged_chart(phi, *(args - e))[0].to_vector()
        assert np.max(np.abs((plus - minus) / (2 * h) - jac[:, a])) < 1e-7


def test_product_foliation_section():
    rng = random.Random(2)
    q = psl.random_point(rng, 1, False, over_origin=True, max_condition=50)
    phi = TruncatedSeries.variable(0, 1, 8)
    samples = [(rng.uniform(-0.1, 0.1), rng.uniform(-1, 1), 1.0, 0.0) for _ in range(5)]
    rep = psl.prolong_structure_pullback([(phi, None)], q, psl.zero_jet_section, samples)
    assert rep.leaf_kernel_residual < 1e-8
    assert rep.transverse_min_norm > 1e-3
    assert rep.section_flatness < 1e-4


def test_identity_transition_gives_identical_forms():
    rng = random.Random(4)
    q = psl.random_point(rng, 1, False, over_origin=True, max_condition=50)
    phi = TruncatedSeries.univariate([0, 1, mpq(1, 8)], order=10)
    samples = [(rng.uniform(-0.1, 0.1), 0.0, rng.uniform(0.5, 1.5), rng.uniform(-1, 1)) for _ in range(4)]
    rep = psl.prolong_structure_pullback([(phi, None), (phi, psl.GroupElement.identity(1))], q, None, samples)
    assert rep.overlap_residual < 1e-12
    assert rep.section_flatness is None


def test_moebius_related_charts_agree():
    q, charts, samples = structure_fixture(Scenario("prolong-structure", 9))
    rep = psl.prolong_structure_pullback(charts, q, psl.zero_jet_section, samples)
    assert rep.samples == 20
    assert rep.overlap_residual < 1e-8
    assert rep.leaf_kernel_residual < 1e-8


def test_inconsistent_transition_is_rejected():
    q = psl.ProlongPoint.over_origin([0.8], [[0.1]])
    phi = TruncatedSeries.variable(0, 1, 6)
    wrong = psl.GroupElement([[1, 0], [1, 1]])
    with pytest.raises(psl.PSLError):
        psl.prolong_structure_pullback([(phi, None), (phi, wrong)], q, None, [(0.05, 0.0, 1.0, 0.0)])
