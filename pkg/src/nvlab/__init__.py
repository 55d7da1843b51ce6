"""Exact Novikov complexes, Lefschetz zeta functions and torsion over group rings."""

from .chain import (
    BasedComplex,
    ChainMap,
    InvalidComplex,
    extend_ring,
    homology_int,
    mapping_cone,
    novikov_betti,
    validate,
)
from .group_algebra import (
    GradedGroup,
    GroupRingElement,
    K1Class,
    LocalizedElement,
    NovikovSeries,
    expand,
    gr_arith,
    k1_eq,
    k1_mul,
    k1_of_unit,
    loc_normalize,
    parse_element,
    parse_value,
    render_element,
    series_exp_log,
)
from .linalg import RingMatrix, det, resolvent_rational, resolvent_series, snf
from .novikov import (
    CyclicCobordismDatum,
    InvalidDatum,
    assemble_E,
    change_of_base,
    incidence_series,
    mapping_torus_datum,
    novikov_complex,
    torsion_of_inclusion,
)
from .torsion import ConeLikeDatum, NotAcyclic, PivotFailure, cone_torsion_closed_form, torsion_acyclic, torsion_of_map
from .zeta import (
    ClosedOrbit,
    GraphSelfMap,
    Piece,
    Unsupported,
    enumerate_gfixed,
    eta_from_orbits,
    eta_from_traces,
    nu_from_gfixed,
    orbit_census,
    zeta_from_eta,
    zeta_rational,
)

__all__ = [
    "assemble_E",
    "BasedComplex",
    "ChainMap",
    "change_of_base",
    "ClosedOrbit",
    "cone_torsion_closed_form",
    "ConeLikeDatum",
    "CyclicCobordismDatum",
    "det",
    "enumerate_gfixed",
    "eta_from_orbits",
    "eta_from_traces",
    "expand",
    "extend_ring",
    "gr_arith",
    "GradedGroup",
    "GraphSelfMap",
    "GroupRingElement",
    "homology_int",
    "incidence_series",
    "InvalidComplex",
    "InvalidDatum",
    "k1_eq",
    "k1_mul",
    "k1_of_unit",
    "K1Class",
    "loc_normalize",
    "LocalizedElement",
    "mapping_cone",
    "mapping_torus_datum",
    "NotAcyclic",
    "novikov_betti",
    "novikov_complex",
    "NovikovSeries",
    "nu_from_gfixed",
    "orbit_census",
    "parse_element",
    "parse_value",
    "Piece",
    "PivotFailure",
    "render_element",
    "resolvent_rational",
    "resolvent_series",
    "RingMatrix",
    "series_exp_log",
    "snf",
    "torsion_acyclic",
    "torsion_of_inclusion",
    "torsion_of_map",
    "Unsupported",
    "validate",
    "zeta_from_eta",
    "zeta_rational",
]

__version__ = "0.1.0"
