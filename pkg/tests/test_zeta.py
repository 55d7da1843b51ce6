from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from nvlab.group_algebra import GroupRingElement, LocalizedElement, NovikovSeries, expand, parse_element
from nvlab.linalg import RingMatrix
from nvlab.scenario import bundled_names, parse_scenario
from nvlab.zeta import (
    ClosedOrbit,
    GraphSelfMap,
    InvalidOrbit,
    Piece,
    Unsupported,
    ZetaError,
    enumerate_gfixed,
    eta_from_orbits,
    eta_from_traces,
    nu_from_gfixed,
    orbit_census,
    prime_orbit_counts,
    zeta_from_eta,
    zeta_paths,
    zeta_rational,
)
from strategies import series_coeffs

Z0 = GroupRingElement()


def P(text, h_rank=0):
    return parse_element(text, h_rank=h_rank)


def M(rows, h_rank=0):
    z = GroupRingElement(h_rank=h_rank)
    return RingMatrix([[P(x, h_rank) if isinstance(x, str) else z.like(x) for x in r] for r in rows], z)


def mobius(n):
    out, p, m = 1, 2, n
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            out = -out
        p += 1
    return -out if m > 1 else out


def necklaces(alphabet, n):
    """Primitive necklaces of length ``n`` over ``alphabet`` letters."""
    return sum(mobius(d) * alphabet ** (n // d) for d in range(1, n + 1) if n % d == 0) // n


def doubling_model():
    return GraphSelfMap(0, {0: ["v"], 1: ["e"]}, [Piece("v", "v", 1), Piece("e", "e", 2)])


def doubling_eta(order):
    return [Fraction(0)] + [Fraction(1 - 2 ** k, k) for k in range(1, order + 1)]


# -- orbits and eta ---------------------------------------------------------------------

def test_empty_orbit_list():
    assert eta_from_orbits([], 5).poly == Z0.to_rational()


def test_prime_orbit_with_iterates():
    orbits = [ClosedOrbit((m,), 1, m) for m in range(1, 7)]
    assert series_coeffs(eta_from_orbits(orbits, 6), 6) == [0] + [Fraction(1, m) for m in range(1, 7)]


def test_orbit_validation():
    with pytest.raises(InvalidOrbit):
        ClosedOrbit((0,), 1)
    with pytest.raises(InvalidOrbit):
        ClosedOrbit((1,), 2)
    with pytest.raises(InvalidOrbit):
        eta_from_orbits([ClosedOrbit((1, 0), 1)], 3, h_rank=0)


def test_zeta_of_zero_and_geometric():
    assert zeta_from_eta(NovikovSeries(Z0.to_rational(), 5)).poly == P("1").to_rational()
    eta = NovikovSeries(GroupRingElement({(k,): Fraction(1, k) for k in range(1, 9)}, 0, True), 8)
    assert zeta_from_eta(eta).poly == expand(LocalizedElement(P("1"), P("1 - t")), 8).poly.to_rational()


def test_doubling_census_eta():
    orbits = orbit_census(doubling_model(), 6)
    assert series_coeffs(eta_from_orbits(orbits, 6), 6) == doubling_eta(6)


def test_doubling_zeta():
    z = zeta_from_eta(eta_from_orbits(orbit_census(doubling_model(), 8), 8))
    assert z.poly == expand(LocalizedElement(P("1 - 2*t"), P("1 - t")), 8).poly.to_rational()


# -- traces and determinants -----------------------------------------------------------------

def test_zero_h():
    assert not eta_from_traces({0: M([[0]])}, 6).poly
    assert zeta_rational({0: M([[0]]), 1: M([[0]])}) == LocalizedElement(P("1"))


def test_doubling_traces():
    eta = eta_from_traces({0: M([[1]]), 1: M([[2]])}, 10)
    assert series_coeffs(eta, 10) == doubling_eta(10)


def test_doubling_rational():
    assert zeta_rational({0: M([[1]]), 1: M([[2]])}) == LocalizedElement(P("1 - 2*t"), P("1 - t"))


def test_fibonacci_rational():
    z = zeta_rational({0: M([[1]]), 1: M([[1, 1], [1, 0]])})
    assert z == LocalizedElement(P("1 - t - t^2"), P("1 - t"))


def test_fibonacci_traces_match_lucas_numbers():
    # Tr A^k of the Fibonacci matrix is the Lucas number L_k
    lucas = [2, 1]
    while len(lucas) < 12:
        lucas.append(lucas[-1] + lucas[-2])
    eta = eta_from_traces({1: M([[1, 1], [1, 0]])}, 11)
    assert series_coeffs(eta, 11)[1:] == [Fraction(-lucas[k], k) for k in range(1, 12)]


# -- fixed points --------------------------------------------------------------------------------

def test_identity_point():
    m = GraphSelfMap(0, {0: ["v"]}, [Piece("v", "v", 1)])
    fp = enumerate_gfixed(m, 1)
    assert [(a.g, a.index, a.mult) for a in fp] == [((1,), 1, 1)]
    orbits = orbit_census(m, 5)
    assert [(o.g, o.multiplicity) for o in orbits] == [((k,), k) for k in range(1, 6)]


def test_empty_map():
    m = GraphSelfMap(0, {}, [])
    assert orbit_census(m, 4) == []


def test_doubling_third_iterate():
    fp = enumerate_gfixed(doubling_model(), 3)
    # one point on the vertex and one per closed sheet chain of the circle cell
    assert len(fp) == 1 + 2 ** 3
    assert sum(a.index for a in fp) == 1 - 2 ** 3


def test_doubling_prime_counts_against_necklaces():
    counts = prime_orbit_counts(orbit_census(doubling_model(), 8), 8)
    vertex = [1] + [0] * 7
    assert counts == [v + necklaces(2, n) for n, v in zip(range(1, 9), vertex)]
    # periods 2..4 carry only circle-cell orbits
    assert counts[1:4] == [1, 2, 3]


def test_reversed_circle_indices():
    # z -> z^-2: degree -2, indices alternate with the parity of the iterate
    m = GraphSelfMap(0, {1: ["e"]}, [Piece("e", "e", -2)])
    for k in range(1, 6):
        assert sum(a.index for a in enumerate_gfixed(m, k)) == -((-2) ** k)


def _random_model(rnd, h_rank):
    cells = {s: [f"c{s}_{i}" for i in range(rnd.randint(1, 2))] for s in range(rnd.randint(1, 2))}
    pieces = []
    for s, cs in cells.items():
        for a in cs:
            for b in cs:
                if rnd.random() < 0.6:
                    deg = rnd.choice([-2, -1, 1, 2])
                    pieces.append(Piece(a, b, deg, tuple(rnd.randint(-1, 1) for _ in range(h_rank))))
    return GraphSelfMap(h_rank, cells, pieces)


@settings(max_examples=25)
@given(st.randoms(use_true_random=False), st.integers(0, 1))
def test_lefschetz_per_degree(rnd, h_rank):
    m = _random_model(rnd, h_rank)
    h = m.induced_matrices()
    theta = GroupRingElement.theta(h_rank)
    for s, hs in h.items():
        step = hs.scale(theta)
        power = RingMatrix.identity(hs.rows, hs.zero)
        for k in range(1, 6):
            power = step @ power
            tr = sum((power[i, i] for i in range(hs.rows)), hs.zero)
            got = {}
            for a in enumerate_gfixed(m, k):
                if a.degree == s:
                    got[a.g] = got.get(a.g, 0) + a.index
            assert GroupRingElement({g: c for g, c in got.items() if c}, h_rank) == tr * (-1) ** s


@settings(max_examples=25)
@given(st.randoms(use_true_random=False), st.integers(0, 1))
def test_three_paths_and_integrality(rnd, h_rank):
    m = _random_model(rnd, h_rank)
    order = 6
    paths = zeta_paths(m.induced_matrices(), order, m, h_rank)
    assert paths["rational"] == paths["traces"] == paths["orbits"]
    assert paths["orbits"].is_integral()
    census = eta_from_orbits(orbit_census(m, order), order, h_rank)
    assert census == nu_from_gfixed(m, order)


def test_model_validation():
    with pytest.raises(ZetaError):
        GraphSelfMap(0, {0: ["v"]}, [Piece("v", "w", 1)])
    with pytest.raises(ZetaError):
        GraphSelfMap(0, {0: ["v"]}, [Piece("v", "v", 0)])
    with pytest.raises(ZetaError):
        GraphSelfMap(1, {0: ["v"]}, [Piece("v", "v", 1, (1, 2))])


def test_unsupported_models():
    m = GraphSelfMap(0, {0: ["v"], 1: ["e"]}, [Piece("e", "v", 1)])
    with pytest.raises(Unsupported):
        enumerate_gfixed(m, 1)
    big = GraphSelfMap(0, {1: ["e"]}, [Piece("e", "e", 9)])
    with pytest.raises(Unsupported):
        enumerate_gfixed(big, 4, cap=1000)


@pytest.mark.parametrize("name", bundled_names())
def test_bundled_models(name):
    sc = parse_scenario(name)
    if sc.orbit_model is None:
        pytest.skip("no orbit model")
    h = sc.orbit_model.induced_matrices()
    paths = zeta_paths(h, 8, sc.orbit_model)
    assert paths["rational"] == paths["traces"] == paths["orbits"]
    assert paths["orbits"].is_integral()
    if sc.datum is not None:
        assert zeta_rational(sc.datum.h, sc.h_rank) == zeta_rational(h, sc.h_rank)
