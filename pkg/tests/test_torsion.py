import random

import pytest
from hypothesis import given, settings, strategies as st

from nvlab.chain import BasedComplex, InvalidComplex, ChainMap, direct_sum, identity_map, mapping_cone
from nvlab.group_algebra import GroupRingElement, K1Class, LocalizedElement, k1_eq, parse_element, parse_value
from nvlab.linalg import RingMatrix, to_localized
from nvlab.random_data import random_chain_complex, random_cone_like, random_unimodular
from nvlab.torsion import (
    ConeLikeDatum,
    NotAcyclic,
    TorsionError,
    cone_torsion_closed_form,
    torsion_acyclic,
    torsion_of_map,
)

Z0 = GroupRingElement()
L0 = LocalizedElement(Z0)


def P(text):
    return parse_element(text)


def cls(text):
    return K1Class.of(parse_value(text))


def one_by_one(x):
    return RingMatrix([[x]], Z0)


def test_single_unit_differential():
    C = BasedComplex([1, 1], {1: one_by_one(P("1 - t"))}, Z0)
    assert k1_eq(torsion_acyclic(C), cls("1 - t").inverse())


def test_convention_in_higher_degree():
    C = BasedComplex([0, 1, 1], {2: one_by_one(P("1 - t"))}, Z0)
    assert k1_eq(torsion_acyclic(C), cls("1 - t"))


def test_monomial_differential_is_trivial():
    C = BasedComplex([1, 1], {1: one_by_one(P("-t^3"))}, Z0)
    assert torsion_acyclic(C).is_identity()


def test_not_acyclic():
    with pytest.raises(NotAcyclic):
        torsion_acyclic(BasedComplex([1], {}, Z0))
    with pytest.raises(NotAcyclic):
        torsion_acyclic(BasedComplex([2, 1], {1: RingMatrix([[P("1")], [P("t")]], Z0)}, Z0))


def test_cone_of_identity():
    C = random_chain_complex(random.Random(4), h_rank=1)
    assert torsion_of_map(identity_map(C)).is_identity()


def test_torsion_of_unit_multiplication():
    C = BasedComplex([1], {}, Z0)
    f = ChainMap(C, C, {0: one_by_one(P("1 - 2*t"))})
    assert k1_eq(torsion_of_map(f), cls("1 - 2*t").inverse())


# -- cone-like data -------------------------------------------------------------------

def _trivial_cone(ranks, A):
    C = BasedComplex(ranks, {}, L0)
    return ConeLikeDatum(C, {k: to_localized(m) for k, m in A.items()},
                         {k: RingMatrix.zeros(ranks[k - 1], ranks[k], L0) for k in range(1, len(ranks))})


def test_identity_isomorphisms():
    D = _trivial_cone([2, 1], {})
    assert cone_torsion_closed_form(D).is_identity()
    assert torsion_acyclic(D.assemble()).is_identity()


def test_single_degree_pair():
    D = _trivial_cone([1], {0: one_by_one(P("1 - t"))})
    assert k1_eq(cone_torsion_closed_form(D), cls("1 - t").inverse())
    assert k1_eq(torsion_acyclic(D.assemble()), cls("1 - t").inverse())


def test_doubling_mapping_torus_shape():
    D = _trivial_cone([1, 1], {0: one_by_one(P("1 - t")), 1: one_by_one(P("1 - 2*t"))})
    expect = cls("(1 - 2*t)/(1 - t)")
    assert k1_eq(cone_torsion_closed_form(D), expect)
    assert k1_eq(torsion_acyclic(D.assemble()), expect)


def test_cone_like_check_rejects_bad_data():
    C = BasedComplex([1, 1], {1: to_localized(one_by_one(P("1")))}, L0)
    D = ConeLikeDatum(C, {}, {1: to_localized(one_by_one(P("1")))})
    with pytest.raises(InvalidComplex):
        D.check()


def test_singular_isomorphism_rejected():
    D = _trivial_cone([1], {0: one_by_one(Z0)})
    with pytest.raises(TorsionError):
        cone_torsion_closed_form(D)


@settings(max_examples=40)
@given(st.randoms(use_true_random=False))
def test_cone_closed_form_oracle(rnd):
    D = random_cone_like(rnd)
    E = D.assemble()
    assert k1_eq(torsion_acyclic(E), cone_torsion_closed_form(D))


@settings(max_examples=25)
@given(st.randoms(use_true_random=False), st.integers(0, 2 ** 32))
def test_pivot_choice_irrelevant(rnd, seed):
    E = random_cone_like(rnd).assemble()
    assert k1_eq(torsion_acyclic(E), torsion_acyclic(E, random.Random(seed)))


@settings(max_examples=20)
@given(st.randoms(use_true_random=False))
def test_multiplicative_on_direct_sums(rnd):
    A = random_cone_like(rnd, h_rank=1).assemble()
    B = random_cone_like(rnd, h_rank=1).assemble()
    assert k1_eq(torsion_acyclic(direct_sum(A, B)), torsion_acyclic(A) * torsion_acyclic(B))


@settings(max_examples=20)
@given(st.randoms(use_true_random=False))
def test_invariant_under_unimodular_base_change(rnd):
    """Unimodular matrices built from elementary and monomial factors have trivial class."""
    D = random_cone_like(rnd, h_rank=1)
    E = D.assemble()
    U = [random_unimodular(rnd, r, 1, theta=(-1, 1)) for r in E.ranks]
    bd = {k: to_localized(U[k - 1][1]) @ E.d(k) @ to_localized(U[k][0]) for k in range(1, E.top + 1)}
    F = BasedComplex(E.ranks, bd, E.zero)
    assert k1_eq(torsion_acyclic(F), torsion_acyclic(E))


def test_cone_of_map_between_cones():
    rng = random.Random(12)
    E = random_cone_like(rng, h_rank=0).assemble()
    K = mapping_cone(identity_map(E))
    assert torsion_acyclic(K).is_identity()
