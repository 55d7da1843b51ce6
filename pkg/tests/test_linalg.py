import random
from math import gcd

import pytest
from hypothesis import given, strategies as st

from nvlab.group_algebra import GroupRingElement, LocalizedElement, expand, parse_element
from nvlab.linalg import (
    RingMatrix,
    ShapeError,
    _bareiss_det,
    adjugate_and_det,
    berkowitz,
    det,
    det_cofactor,
    eliminate,
    expand_matrix,
    modular_pivots,
    rank,
    rank_lower_bound,
    resolvent_rational,
    resolvent_series,
    snf,
    to_localized,
)
from nvlab.random_data import random_integer_matrix, random_matrix, random_monomial_matrix
from strategies import leibniz_det, zh_matrices

Z0 = GroupRingElement()


def P(text, h_rank=0):
    return parse_element(text, h_rank=h_rank)


def M(rows, h_rank=0):
    z = GroupRingElement(h_rank=h_rank)
    return RingMatrix([[P(x, h_rank) if isinstance(x, str) else z.like(x) for x in r] for r in rows], z)


def IM(rows):
    return M(rows)


# -- shape handling -------------------------------------------------------------

def test_shape_errors():
    with pytest.raises(ShapeError):
        RingMatrix([[Z0], [Z0, Z0]], Z0)
    with pytest.raises(ShapeError):
        det(RingMatrix.zeros(2, 3, Z0))
    with pytest.raises(ShapeError):
        RingMatrix.zeros(2, 3, Z0) @ RingMatrix.zeros(2, 3, Z0)
    with pytest.raises(ShapeError):
        resolvent_series(RingMatrix.zeros(1, 2, Z0), 3)


def test_empty_blocks_multiply():
    a = RingMatrix.zeros(2, 0, Z0)
    b = RingMatrix.zeros(0, 3, Z0)
    assert (a @ b) == RingMatrix.zeros(2, 3, Z0)
    assert det(RingMatrix.zeros(0, 0, Z0)) == Z0.one()


# -- determinants -----------------------------------------------------------------

def test_det_identity():
    assert det(RingMatrix.identity(3, Z0)) == Z0.one()


def test_det_two_by_two():
    assert det(M([["1 - t", "-t"], ["-t", "1"]])) == P("1 - t - t^2")


def test_det_block_upper_triangular():
    rng = random.Random(7)
    for _ in range(10):
        A = random_matrix(rng, 2, 2, 1)
        B = random_matrix(rng, 2, 2, 1)
        X = random_matrix(rng, 2, 2, 1)
        z = GroupRingElement(h_rank=1)
        T = RingMatrix.block([[A, X], [None, B]], [2, 2], [2, 2], z)
        assert det(T) == det(A) * det(B)
        assert det(T) == det_cofactor(T)


@given(st.integers(1, 4).flatmap(lambda n: zh_matrices(n, h_rank=1, monomial=False)))
def test_determinant_paths_agree(A):
    c = det_cofactor(A)
    assert _bareiss_det(A) == c
    assert det(A) == c
    cp = berkowitz(A)
    # constant term of det(x I - A) is (-1)^n det A, trace sits next to the leading 1
    assert cp[0] == A.zero.one()
    assert cp[-1] == c * (-1) ** A.rows
    assert cp[1] == -sum((A[i, i] for i in range(A.rows)), A.zero)


@given(st.integers(1, 4).flatmap(lambda n: st.tuples(zh_matrices(n, 1), zh_matrices(n, 1))))
def test_det_multiplicative(pair):
    A, B = pair
    assert det(A @ B) == det(A) * det(B)


def test_det_integer_matches_leibniz():
    rng = random.Random(3)
    for n in range(1, 5):
        rows = random_integer_matrix(rng, n, n)
        assert det(IM(rows)) == Z0.like(leibniz_det(rows))


def test_det_over_localized_ring():
    a = LocalizedElement(P("1"), P("1 - t"))
    b = LocalizedElement(P("t"))
    lz = LocalizedElement(Z0)
    m = RingMatrix([[a, b], [b, a]], lz)
    assert det(m) == a * a - b * b


def test_adjugate():
    rng = random.Random(11)
    for n in range(1, 4):
        A = random_matrix(rng, n, n, 1)
        adj, d = adjugate_and_det(A)
        z = GroupRingElement(h_rank=1)
        assert A @ adj == RingMatrix.identity(n, z).scale(d)


# -- ranks and pivots ---------------------------------------------------------------

def test_rank_examples():
    assert rank(M([["1 - t", "1 - t"], ["1", "1"]])) == 1
    assert rank(M([["1 - t", "0"], ["0", "t"]])) == 2
    assert rank(RingMatrix.zeros(2, 3, Z0)) == 0


def test_modular_rank_is_a_lower_bound():
    rng = random.Random(5)
    for _ in range(30):
        r, c = rng.randint(1, 4), rng.randint(1, 4)
        A = random_matrix(rng, r, c, 1, density=0.4)
        k = rng.randint(0, min(r, c))
        B = random_matrix(rng, r, k, 1) @ random_matrix(rng, k, c, 1)
        for X in (A, B):
            assert rank_lower_bound(X) <= rank(X)
            rows, cols = eliminate(X, random.Random(1))
            assert len(rows) == rank(X)


def test_pivot_minors_nonsingular():
    rng = random.Random(9)
    for _ in range(20):
        A = random_matrix(rng, 3, 3, 1, density=0.5)
        for pick in (modular_pivots(A), eliminate(A, rng)):
            rows, cols = pick
            if rows:
                assert det(A.submatrix(rows, cols))


# -- Smith normal form -------------------------------------------------------------

def _minors_gcd(rows, k):
    from itertools import combinations
    g = 0
    for rs in combinations(range(len(rows)), k):
        for cs in combinations(range(len(rows[0])), k):
            g = gcd(g, leibniz_det([[rows[i][j] for j in cs] for i in rs]))
    return g


def test_snf_examples():
    assert snf(IM([[2, 0], [0, 3]])) == ([1, 6], 2)
    assert snf(IM([[0, 0], [0, 0]]))[1] == 0
    diag, r = snf(IM([[1, 1], [1, 1]]))
    assert r == 1 and diag[0] == 1


@given(st.integers(1, 3), st.integers(1, 3), st.randoms(use_true_random=False))
def test_snf_matches_determinantal_divisors(r, c, rnd):
    rows = random_integer_matrix(rnd, r, c, bound=6)
    diag, rk = snf(IM(rows))
    nz = [d for d in diag if d]
    assert len(nz) == rk
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    prod = 1
    for k, d in enumerate(nz, 1):
        prod *= d
        assert prod == _minors_gcd(rows, k)


@given(st.integers(1, 4), st.randoms(use_true_random=False))
def test_snf_preserves_abs_det(n, rnd):
    rows = random_integer_matrix(rnd, n, n)
    d = leibniz_det(rows)
    diag, rk = snf(IM(rows))
    if d:
        prod = 1
        for x in diag:
            prod *= x
        assert abs(prod) == abs(d) and rk == n


# -- resolvent ------------------------------------------------------------------------

FIB = [[1, 1], [1, 0]]


def test_resolvent_series_zero_matrix():
    R = resolvent_series(RingMatrix.zeros(2, 2, Z0), 5)
    for i in range(2):
        for j in range(2):
            assert R[i, j].poly == (Z0.one() if i == j else Z0)


def test_resolvent_series_fibonacci_entry():
    R = resolvent_series(IM(FIB), 4)
    assert R[0, 0].poly == P("1 + t + 2*t^2 + 3*t^3 + 5*t^4")


def test_resolvent_series_scalar():
    R = resolvent_series(IM([[3]]), 4)
    assert R[0, 0].poly == P(" + ".join(f"{3 ** k}*t^{k}" for k in range(5)))


def test_resolvent_rational_fibonacci():
    R = resolvent_rational(IM(FIB))
    assert R[0, 0] == LocalizedElement(P("1"), P("1 - t - t^2"))
    for i in range(2):
        for j in range(2):
            assert R[i, j].den == P("1 - t - t^2")
    # the first-coordinate functional applied to A^k e_1 is Fibonacci
    fib = [1, 1]
    while len(fib) < 13:
        fib.append(fib[-1] + fib[-2])
    assert expand(R[0, 0], 12).poly == P(" + ".join(f"{c}*t^{k}" for k, c in enumerate(fib)))
    assert R[0, 0] != LocalizedElement(P("1"), P("1 + t"))


def test_resolvent_rational_zero_matrix():
    R = resolvent_rational(RingMatrix.zeros(2, 2, Z0))
    assert R == to_localized(RingMatrix.identity(2, Z0))


def _one_minus_at(A):
    z = A.zero
    t = GroupRingElement.theta(z.h_rank)
    return to_localized(RingMatrix.identity(A.rows, z) - A.scale(t))


@given(st.integers(1, 4).flatmap(lambda n: st.sampled_from([0, 1, 2]).flatmap(
    lambda h: zh_matrices(n, h))))
def test_resolvent_is_inverse(A):
    R = resolvent_rational(A)
    assert _one_minus_at(A) @ R == to_localized(RingMatrix.identity(A.rows, A.zero))


@given(st.integers(1, 3), st.integers(0, 2), st.integers(0, 25), st.randoms(use_true_random=False))
def test_resolvent_paths_agree(n, h_rank, order, rnd):
    A = random_monomial_matrix(rnd, n, h_rank)
    assert expand_matrix(resolvent_rational(A), order) == resolvent_series(A, order)


@given(st.integers(1, 3).flatmap(lambda n: st.sampled_from([0, 1]).flatmap(
    lambda h: zh_matrices(n, h, monomial=False))), st.integers(0, 6))
def test_resolvent_series_matches_plain_powers(A, order):
    t = GroupRingElement.theta(A.zero.h_rank)
    total = RingMatrix.identity(A.rows, A.zero)
    power = total
    for _ in range(order):
        power = A.scale(t) @ power
        total = total + power
    got = resolvent_series(A, order)
    for i in range(A.rows):
        for j in range(A.rows):
            assert got[i, j].poly == total[i, j]
