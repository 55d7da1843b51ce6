"""Hypothesis strategies and small independent oracles shared by the tests."""

from fractions import Fraction

from hypothesis import strategies as st

from nvlab.group_algebra import GroupRingElement, LocalizedElement
from nvlab.linalg import RingMatrix


def group_elems(h_rank, theta=(-2, 3), h=(-2, 2)):
    return st.tuples(st.integers(*theta), *[st.integers(*h) for _ in range(h_rank)])


def elements(h_rank=1, max_terms=4, theta=(-2, 3), coeffs=(-3, 3), rational=False):
    coeff = st.integers(*coeffs).filter(bool)
    if rational:
        coeff = st.fractions(min_value=-3, max_value=3, max_denominator=4).filter(bool)
    terms = st.dictionaries(group_elems(h_rank, theta), coeff, max_size=max_terms)
    return terms.map(lambda t: GroupRingElement(t, h_rank, rational))


def dens(h_rank=1, max_terms=3):
    """Denominators ``1 + mu`` with ``mu`` divisible by t."""
    return elements(h_rank, max_terms, theta=(1, 3)).map(lambda mu: mu.one() + mu)


def localized(h_rank=1):
    return st.builds(LocalizedElement, elements(h_rank, theta=(0, 3)), dens(h_rank))


def zh_matrices(n, h_rank=1, monomial=True):
    if monomial:
        entry = st.tuples(st.sampled_from([-1, 0, 1]), *[st.integers(-1, 1) for _ in range(h_rank)]).map(
            lambda x: GroupRingElement({(0, *x[1:]): x[0]}, h_rank))
    else:
        entry = elements(h_rank, 2, theta=(0, 0))
    zero = GroupRingElement(h_rank=h_rank)
    return st.lists(st.lists(entry, min_size=n, max_size=n), min_size=n, max_size=n).map(
        lambda rows: RingMatrix(rows, zero, (n, n)))


def naive_mul(a, b):
    """Term-by-term convolution, independent of the library product."""
    out = {}
    for ga, ca in a.items():
        for gb, cb in b.items():
            g = tuple(x + y for x, y in zip(ga, gb))
            out[g] = out.get(g, 0) + ca * cb
    return {g: c for g, c in out.items() if c}


def leibniz_det(rows):
    """Determinant by the permutation sum over plain Python numbers."""
    from itertools import permutations
    n = len(rows)
    total = 0
    for p in permutations(range(n)):
        sign = 1
        for i in range(n):
            for j in range(i + 1, n):
                if p[i] > p[j]:
                    sign = -sign
        prod = 1
        for i in range(n):
            prod *= rows[i][p[i]]
        total += sign * prod
    return total


def series_coeffs(x, order):
    """Coefficients of t^0..t^order of an h_rank 0 element or series as Fractions."""
    poly = getattr(x, "poly", x)
    return [Fraction(poly.coefficient((k,))) for k in range(order + 1)]
