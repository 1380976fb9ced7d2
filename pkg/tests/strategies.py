"""Hypothesis strategies for exact series data."""

from gmpy2 import mpq
from hypothesis import strategies as st

from jetconn.multiindex import count_monomials
from jetconn.series import SeriesMatrix, TruncatedSeries

small_ints = st.integers(-9, 9)
rationals = st.builds(lambda p, d: mpq(p, d), small_ints, st.integers(1, 9))
nonzero_rationals = rationals.filter(lambda v: v != 0)


@st.composite
def series(draw, nvars=1, order=6, zero_constant=False, constant=None, max_degree=None):
    size = count_monomials(nvars, order)
    coeffs = draw(st.lists(rationals, min_size=size, max_size=size))
    s = TruncatedSeries(nvars, order, coeffs)
    if max_degree is not None:
        s = s.truncate(max_degree).pad(order)
    if zero_constant:
        coeffs = list(s.coeffs)
        coeffs[0] = mpq(0)
        s = TruncatedSeries(nvars, order, coeffs)
    if constant is not None:
        coeffs = list(s.coeffs)
        coeffs[0] = mpq(constant)
        s = TruncatedSeries(nvars, order, coeffs)
    return s


@st.composite
def germs(draw, order=8, constant=0):
    """Univariate germs with an invertible linear part."""
    f = draw(series(1, order, max_degree=4, constant=constant))
    c = list(f.coeffs)
    c[1] = draw(nonzero_rationals)
    return TruncatedSeries(1, order, c)


@st.composite
def unipotent_matrices(draw, rank, nvars, order):
    """Series matrices with the identity as constant term."""
    rows = []
    for i in range(rank):
        rows.append([draw(series(nvars, order, max_degree=3, constant=int(i == j))) for j in range(rank)])
    return SeriesMatrix(rows)
