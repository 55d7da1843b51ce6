"""Random generators for tests and the acceptance suite.

Everything is driven by an explicit :class:`random.Random`, so instances
are reproducible from a seed.
"""

from __future__ import annotations

import random
from typing import Dict, List, Optional, Sequence, Tuple

from .chain import BasedComplex
from .group_algebra import GroupRingElement, LocalizedElement
from .linalg import RingMatrix, to_localized
from .novikov import CyclicCobordismDatum
from .torsion import ConeLikeDatum


def random_monomial(rng: random.Random, h_rank: int, theta: Tuple[int, int] = (0, 0),
                    h_range: int = 1, coeffs: Sequence[int] = (-1, 1)) -> GroupRingElement:
    g = (rng.randint(*theta), *(rng.randint(-h_range, h_range) for _ in range(h_rank)))
    return GroupRingElement.monomial(g, rng.choice(coeffs), h_rank)


def random_element(rng: random.Random, h_rank: int, terms: int = 2, theta: Tuple[int, int] = (0, 1),
                   h_range: int = 1, coeffs: Sequence[int] = (-2, -1, 1, 2)) -> GroupRingElement:
    x = GroupRingElement(h_rank=h_rank)
    for _ in range(terms):
        x = x + random_monomial(rng, h_rank, theta, h_range, coeffs)
    return x


def random_matrix(rng: random.Random, rows: int, cols: int, h_rank: int, density: float = 0.6,
                  **kw) -> RingMatrix:
    zero = GroupRingElement(h_rank=h_rank)
    return RingMatrix.from_function(
        rows, cols, lambda i, j: random_element(rng, h_rank, **kw) if rng.random() < density else zero, zero)


def random_monomial_matrix(rng: random.Random, n: int, h_rank: int) -> RingMatrix:
    """Square matrix over ZH with entries in ``{-1, 0, 1} * h``."""
    zero = GroupRingElement(h_rank=h_rank)
    return RingMatrix.from_function(
        n, n, lambda i, j: random_monomial(rng, h_rank, coeffs=(-1, 0, 1)), zero)


def random_unimodular(rng: random.Random, n: int, h_rank: int, steps: int = 3,
                      theta: Tuple[int, int] = (0, 0)) -> Tuple[RingMatrix, RingMatrix]:
    """``(U, U^-1)`` as products of elementary matrices and signed monomial scalings."""
    zero = GroupRingElement(h_rank=h_rank)
    U = RingMatrix.identity(n, zero)
    Ui = RingMatrix.identity(n, zero)
    if n == 0:
        return U, Ui
    for _ in range(steps):
        if n > 1 and rng.random() < 0.75:
            i, j = rng.sample(range(n), 2)
            c = random_monomial(rng, h_rank, theta)
            E = RingMatrix.from_function(n, n, lambda a, b: c if (a, b) == (i, j) else
                                         (zero.one() if a == b else zero), zero)
            Ei = RingMatrix.from_function(n, n, lambda a, b: -c if (a, b) == (i, j) else
                                          (zero.one() if a == b else zero), zero)
        else:
            i = rng.randrange(n)
            c = random_monomial(rng, h_rank, theta)
            E = RingMatrix.from_function(n, n, lambda a, b: (c if a == i else zero.one()) if a == b else zero, zero)
            Ei = RingMatrix.from_function(n, n, lambda a, b: (c.monomial_inverse() if a == i else zero.one())
                                          if a == b else zero, zero)
        U = U @ E
        Ui = Ei @ Ui
    return U, Ui


def random_unit(rng: random.Random, h_rank: int) -> GroupRingElement:
    """A unit of the localized ring: ``+-g`` or ``+-g * (1 + c * h * t^b)``."""
    g = random_monomial(rng, h_rank, theta=(-1, 1))
    if rng.random() < 0.3:
        return g
    mu = random_monomial(rng, h_rank, theta=(1, 2), coeffs=(-2, -1, 1, 2))
    return g * (g.one() + mu)


def _loc_inverse_unit(u: GroupRingElement) -> LocalizedElement:
    m = u.as_monomial()
    if m is not None:
        return LocalizedElement(u.monomial_inverse())
    x = LocalizedElement(u)
    return x.inverse()


def random_cone_like(rng: random.Random, max_rank: int = 3, max_top: int = 2,
                     h_rank: Optional[int] = None) -> ConeLikeDatum:
    """Cone-like datum over the localized ring with all ``A_k`` invertible there."""
    h_rank = rng.randint(0, 1) if h_rank is None else h_rank
    top = rng.randint(0, max_top)
    ranks = [rng.randint(1, max_rank) for _ in range(top + 1)]
    zero = GroupRingElement(h_rank=h_rank)
    lz = LocalizedElement(zero)
    # d_k = U_{k-1} J_k U_k^-1 with J_k killing the image of J_{k+1}
    j = [0] * (top + 2)
    for k in range(top, 0, -1):
        j[k] = rng.randint(0, max(0, min(ranks[k] - j[k + 1], ranks[k - 1])))
    Us = [random_unimodular(rng, r, h_rank, theta=(-1, 1)) for r in ranks]
    d = {}
    for k in range(1, top + 1):
        J = [[zero] * ranks[k] for _ in range(ranks[k - 1])]
        for i in range(j[k]):
            J[i][j[k + 1] + i] = random_element(rng, h_rank, terms=rng.randint(1, 2))
        Jm = RingMatrix(J, zero, (ranks[k - 1], ranks[k]))
        d[k] = Us[k - 1][0] @ Jm @ Us[k][1]
    A, A_inv = {}, {}
    for k, r in enumerate(ranks):
        units = [random_unit(rng, h_rank) for _ in range(r)]
        L, Li = random_unimodular(rng, r, h_rank, theta=(-1, 1))
        Rm, Ri = random_unimodular(rng, r, h_rank, theta=(-1, 1))
        D = RingMatrix.from_function(r, r, lambda a, b: units[a] if a == b else zero, zero)
        Dinv = RingMatrix.from_function(r, r, lambda a, b: _loc_inverse_unit(units[a]) if a == b else lz, lz)
        A[k] = to_localized(L @ D @ Rm)
        A_inv[k] = to_localized(Ri) @ Dinv @ to_localized(Li)
    dl = {k: to_localized(m) for k, m in d.items()}
    dp = {k: -(A_inv[k - 1] @ dl[k] @ A[k]) for k in range(1, top + 1)}
    C = BasedComplex(ranks, dl, lz)
    return ConeLikeDatum(C, A, dp)


def random_valid_datum(rng: random.Random, max_top: int = 2, h_rank: Optional[int] = None,
                       conjugate: bool = True) -> CyclicCobordismDatum:
    """A datum that satisfies ``D o D = 0`` by construction.

    The level complex is free generators ``F`` plus cancelling pairs
    ``e -> f``; ``h`` is a chain map of that complex.  The ``v`` complex is
    ``A + B`` with boundary ``B -> A``; ``N`` lands in ``A`` and kills ``f``,
    ``P`` reads ``B`` and lands in ``F + f``.  A random unimodular change of
    basis then hides the split.
    """
    h_rank = rng.randint(0, 1) if h_rank is None else h_rank
    top = rng.randint(1, max_top)
    zero = GroupRingElement(h_rank=h_rank)
    theta = GroupRingElement.theta(h_rank)
    F = [rng.randint(0, 2) for _ in range(top + 1)]
    pairs = [0] + [rng.randint(0, 1) for _ in range(top)]     # e_k for k >= 1
    e = pairs
    f = [pairs[k + 1] if k + 1 <= top else 0 for k in range(top + 1)]
    A = [rng.randint(0, 2) for _ in range(top + 1)]
    B = [rng.randint(0, 2) if k >= 1 else 0 for k in range(top + 1)]
    B[rng.randint(1, top)] = max(1, B[1])
    ru = [F[k] + e[k] + f[k] for k in range(top + 1)]
    rv = [A[k] + B[k] for k in range(top + 1)]

    def mat(rows, cols, fill):
        return RingMatrix.from_function(rows, cols, fill, zero)

    def rnd(**kw):
        return random_element(rng, h_rank, terms=rng.randint(1, 2), **kw) if rng.random() < 0.7 else zero

    He = {k: random_matrix(rng, e[k], e[k], h_rank, theta=(0, 0)) for k in range(1, top + 1)}
    h = {}
    for k in range(top + 1):
        HF = random_matrix(rng, F[k], F[k], h_rank, theta=(0, 0))
        Hek = He.get(k, mat(0, 0, None))
        Hf = He.get(k + 1, mat(0, 0, None))
        Z = random_matrix(rng, F[k], e[k], h_rank, theta=(0, 0))
        X = random_matrix(rng, f[k], F[k], h_rank, theta=(0, 0))
        Y = random_matrix(rng, f[k], e[k], h_rank, theta=(0, 0))
        h[k] = RingMatrix.block([[HF, Z, None], [None, Hek, None], [X, Y, Hf]],
                                [F[k], e[k], f[k]], [F[k], e[k], f[k]], zero)
    bdry1, bdryv, P, N = {}, {}, {}, {}
    for k in range(1, top + 1):
        # e_k -> f_{k-1} is the identity
        bdry1[k] = mat(ru[k - 1], ru[k], lambda i, j, k=k: zero.one()
                       if i >= F[k - 1] + e[k - 1] and j - F[k] == i - F[k - 1] - e[k - 1]
                       and F[k] <= j < F[k] + e[k] else zero)
        bdryv[k] = mat(rv[k - 1], rv[k], lambda i, j, k=k: rnd() if i < A[k - 1] and j >= A[k] else zero)
        P[k] = mat(ru[k - 1], rv[k], lambda i, j, k=k: rnd(theta=(0, 1)) * theta
                   if j >= A[k] and not (F[k - 1] <= i < F[k - 1] + e[k - 1]) else zero)
    for k in range(top + 1):
        N[k] = mat(rv[k], ru[k], lambda i, j, k=k: rnd() if i < A[k] and j < F[k] + e[k] else zero)
    if conjugate:
        U = [random_unimodular(rng, r, h_rank) for r in ru]
        V = [random_unimodular(rng, r, h_rank) for r in rv]
        bdry1 = {k: U[k - 1][1] @ m @ U[k][0] for k, m in bdry1.items()}
        bdryv = {k: V[k - 1][1] @ m @ V[k][0] for k, m in bdryv.items()}
        P = {k: U[k - 1][1] @ m @ V[k][0] for k, m in P.items()}
        N = {k: V[k][1] @ m @ U[k][0] for k, m in N.items()}
        h = {k: U[k][1] @ m @ U[k][0] for k, m in h.items()}
    return CyclicCobordismDatum(h_rank, ru, rv, bdry1=bdry1, bdryv=bdryv, P=P, N=N, h=h)


def random_chain_complex(rng: random.Random, max_rank: int = 3, max_top: int = 2,
                         h_rank: int = 0) -> BasedComplex:
    """Random valid complex over ZG built as ``U J U^-1``."""
    top = rng.randint(0, max_top)
    ranks = [rng.randint(0, max_rank) for _ in range(top + 1)]
    zero = GroupRingElement(h_rank=h_rank)
    j = [0] * (top + 2)
    for k in range(top, 0, -1):
        j[k] = rng.randint(0, max(0, min(ranks[k] - j[k + 1], ranks[k - 1])))
    Us = [random_unimodular(rng, r, h_rank, theta=(-1, 1)) for r in ranks]
    d = {}
    for k in range(1, top + 1):
        J = [[zero] * ranks[k] for _ in range(ranks[k - 1])]
        for i in range(j[k]):
            J[i][j[k + 1] + i] = random_element(rng, h_rank, terms=rng.randint(1, 2))
        d[k] = Us[k - 1][0] @ RingMatrix(J, zero, (ranks[k - 1], ranks[k])) @ Us[k][1]
    return BasedComplex(ranks, d, zero)


def random_integer_matrix(rng: random.Random, rows: int, cols: int, bound: int = 5) -> List[List[int]]:
    return [[rng.randint(-bound, bound) for _ in range(cols)] for _ in range(rows)]


def integer_datum_h(rng: random.Random, ranks: Sequence[int], bound: int = 2) -> Dict[int, RingMatrix]:
    zero = GroupRingElement()
    return {k: RingMatrix.from_function(r, r, lambda i, j: zero.like(rng.randint(-bound, bound)), zero)
            for k, r in enumerate(ranks)}
