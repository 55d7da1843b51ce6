import random

import pytest
from hypothesis import given, settings, strategies as st

from nvlab.chain import novikov_betti, validate
from nvlab.group_algebra import GroupRingElement, K1Class, LocalizedElement, expand, k1_eq, parse_element, parse_value
from nvlab.linalg import RingMatrix, det
from nvlab.novikov import (
    CyclicCobordismDatum,
    InvalidDatum,
    assemble_E,
    change_of_base,
    datum_violations,
    determinant_product,
    inclusion_cone_torsion,
    incidence_series,
    incidence_table_series,
    mapping_torus_datum,
    novikov_complex,
    novikov_differential,
    quotient_complex,
    torsion_of_inclusion,
)
from nvlab.random_data import random_valid_datum
from nvlab.scenario import bundled_names, parse_scenario

Z0 = GroupRingElement()


def P(text, h_rank=0):
    return parse_element(text, h_rank=h_rank)


def M(rows, h_rank=0):
    z = GroupRingElement(h_rank=h_rank)
    return RingMatrix([[P(x, h_rank) if isinstance(x, str) else z.like(x) for x in r] for r in rows], z)


def cls(text):
    return K1Class.of(parse_value(text))


def circle():
    return parse_scenario("circle_two_crit").datum


def doubling():
    return mapping_torus_datum({0: M([[1]]), 1: M([[2]])})


# -- assembly -------------------------------------------------------------------------

def test_empty_datum():
    d = CyclicCobordismDatum(0, [0], [0])
    E = assemble_E(d)
    assert E.ranks == (0, 0)
    assert validate(E).ok


def test_mapping_torus_blocks():
    d = doubling()
    E = assemble_E(d)
    assert E.ranks == (1, 2, 1)
    assert E.d(1) == M([[0, "1 - t"]])
    assert E.d(2) == M([["1 - 2*t"], [0]])


def test_circle_assembles():
    E = assemble_E(circle())
    assert validate(E).ok
    assert E.top == 2


def test_mapping_torus_rejects_non_chain_map():
    with pytest.raises(InvalidDatum) as exc:
        mapping_torus_datum({0: M([[1]]), 1: M([[2]])}, {1: M([[1]])})
    assert exc.value.block == (1, 3)


def test_identity_mapping_torus():
    d = mapping_torus_datum({0: M([[1]]), 1: M([[1]])})
    assert not datum_violations(d)


def test_corrupted_datum_reports_block():
    with pytest.raises(InvalidDatum) as exc:
        CyclicCobordismDatum(0, [1, 1], [1, 1], bdryv={1: M([[1]])}, N={1: M([[1]])})
    assert exc.value.block == (2, 3)
    assert exc.value.degree == 1


def test_ring_membership_enforced():
    with pytest.raises(InvalidDatum):
        CyclicCobordismDatum(0, [1, 0], [0, 1], P={1: M([[1]])})
    with pytest.raises(InvalidDatum):
        CyclicCobordismDatum(0, [1], [0], h={0: M([["t^-1"]])})


def test_shape_mismatch():
    with pytest.raises(InvalidDatum):
        CyclicCobordismDatum(0, [1, 1], [1, 1], bdryv={1: M([[1, 1]])})


# -- change of base --------------------------------------------------------------------

def test_zero_p_gives_identity_base_change():
    d = mapping_torus_datum({0: M([[1]]), 1: M([[1]])})
    cob = change_of_base(d)
    for k, T in cob.T.items():
        assert T == RingMatrix.identity(T.rows, T.zero)


def test_circle_base_change_pattern():
    cob = change_of_base(circle())
    assert not cob.violations()
    T = cob.T[1]
    # the new basis vector of q picks up -(1 - t h)^-1 P = -t on the suspended a
    assert T[1, 0] == LocalizedElement(P("-t"))


@settings(max_examples=30)
@given(st.randoms(use_true_random=False))
def test_base_change_block_pattern_and_determinant(rnd):
    d = random_valid_datum(rnd)
    cob = change_of_base(d)
    assert not cob.violations()
    for T in cob.T.values():
        if T.rows:
            assert K1Class.of(det(T)).is_identity()
            assert det(T) == LocalizedElement(d.zero.one())


# -- Novikov complex and incidences --------------------------------------------------------

def test_circle_incidence():
    nov = novikov_complex(circle())
    assert nov.incidence[("q", "p")] == LocalizedElement(P("1 - t"))
    assert nov.betti() == [0, 0]


def test_mapping_torus_novikov_complex_is_zero():
    nov = novikov_complex(doubling())
    assert nov.complex.ranks == (0, 0)
    assert nov.incidence == {}


def test_h_zero_gives_polynomial_delta():
    d = circle()
    delta = novikov_differential(d)
    expect = d.bdryv[1] - d.N[0] @ d.P[1]
    assert delta[1][0, 0] == LocalizedElement(expect[0, 0])
    s = incidence_series(d, "q", "p", 10)
    assert all(g[0] <= 1 for g, _ in s.poly.items())


def test_circle_series_matches_expansion():
    d = circle()
    s = incidence_series(d, "q", "p", 10)
    assert s.poly == expand(novikov_complex(d).incidence[("q", "p")], 10).poly


def test_incidence_series_label_errors():
    d = circle()
    with pytest.raises(KeyError):
        incidence_series(d, "q", "zz", 3)
    with pytest.raises(KeyError):
        incidence_series(d, "p", "q", 3)


def test_wrong_sign_is_detectable():
    d = parse_scenario("drift_interval").datum
    right = novikov_differential(d, sign=-1)
    wrong = novikov_differential(d, sign=+1)
    s = incidence_series(d, *next(iter(incidence_table_series(d, 1))), 8)
    assert expand(right[1][0, 0], 8).poly == s.poly
    assert expand(wrong[1][0, 0], 8).poly != s.poly


@settings(max_examples=30)
@given(st.randoms(use_true_random=False), st.integers(0, 25))
def test_two_path_incidences(rnd, order):
    d = random_valid_datum(rnd)
    nov = novikov_complex(d)
    assert validate(nov.complex).ok
    for pair, s in incidence_table_series(d, order).items():
        assert s.poly == expand(nov.incidence[pair], order).poly
    assert nov.complex.euler_characteristic() == d.euler_characteristic_v()


# -- torsion of the inclusion -----------------------------------------------------------------

def test_doubling_torsion():
    t = torsion_of_inclusion(doubling())
    expect = cls("(1 - 2*t)/(1 - t)")
    assert k1_eq(t.path_b, expect)
    assert k1_eq(t.path_a, expect)


def test_zero_h_gives_identity():
    t = torsion_of_inclusion(circle())
    assert t.path_a.is_identity() and t.path_b.is_identity()


@pytest.mark.parametrize("name", bundled_names())
def test_bundled_paths_agree(name):
    sc = parse_scenario(name)
    if sc.datum is None:
        pytest.skip("no datum")
    t = torsion_of_inclusion(sc.datum)
    assert t.agree()
    assert not any(novikov_betti(quotient_complex(sc.datum)))


@settings(max_examples=25)
@given(st.randoms(use_true_random=False), st.integers(0, 2 ** 32))
def test_random_paths_agree(rnd, seed):
    d = random_valid_datum(rnd)
    t = torsion_of_inclusion(d, random.Random(seed))
    assert k1_eq(t.path_a, t.path_b)
    assert k1_eq(t.path_b, determinant_product(d))


@settings(max_examples=10)
@given(st.randoms(use_true_random=False))
def test_cone_route_agrees(rnd):
    d = random_valid_datum(rnd)
    assert k1_eq(inclusion_cone_torsion(d), torsion_of_inclusion(d).path_a)
