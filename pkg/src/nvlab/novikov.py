"""Novikov complex of a cyclic cobordism datum.

A datum consists of per-degree matrices over ``ZH[t]``:

* ``bdry1[k]`` the level-set Morse boundary on ``u`` generators,
* ``bdryv[k]`` the Morse boundary of the cut-open cobordism on ``v`` generators,
* ``P[k] : v_k -> u_{k-1}`` (entries divisible by ``t``),
* ``N[k] : u_k -> v_k``,
* ``h[k] : u_k -> u_k`` the homological gradient descent.

They are assembled into ``E_k = u_k + v_k + u_{k-1}`` with boundary::

    [[bdry1_k, P_k,     1 - t h_{k-1}],
     [0,       bdryv_k, N_{k-1}      ],
     [0,       0,       -bdry1_{k-1} ]]

and the base change ``r -> r - R P r`` with ``R = (1 - t h)^{-1}`` splits
off the Novikov complex with differential ``delta = bdryv - N R P``.  The
minus sign is forced: it is the only choice for which the changed-base
boundary has vanishing ``(1,2)`` block.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .chain import BasedComplex, ChainMap, InvalidComplex
from .group_algebra import GroupRingElement, K1Class, LocalizedElement, NovikovSeries
from .linalg import RingMatrix, det, resolvent_rational, to_localized
from .torsion import _class_of, torsion_acyclic, torsion_of_map

class InvalidDatum(ValueError):
    """Raised when a datum fails a shape, ring or ``D o D = 0`` check.

    ``degree`` and ``block`` (1-based ``(row, col)`` of the 3x3 block grid)
    locate the first failure; ``violations`` lists all of them.
    """

    def __init__(self, message: str, degree: Optional[int] = None,
                 block: Optional[Tuple[int, int]] = None, violations=()):
        super().__init__(message)
        self.degree = degree
        self.block = block
        self.violations = list(violations)


def _zero(h_rank: int) -> GroupRingElement:
    return GroupRingElement(h_rank=h_rank)


class CyclicCobordismDatum:
    """Matrices of a cyclic cobordism; see the module docstring.

    Missing matrices are zero.  ``P[k]`` and ``bdryv[k]`` exist for
    ``k = 1..n``; ``N[k]`` and ``h[k]`` for ``k = 0..n``.
    """

    def __init__(self, h_rank: int, rank_u: Sequence[int], rank_v: Sequence[int],
                 bdry1: Optional[Mapping[int, RingMatrix]] = None,
                 bdryv: Optional[Mapping[int, RingMatrix]] = None,
                 P: Optional[Mapping[int, RingMatrix]] = None,
                 N: Optional[Mapping[int, RingMatrix]] = None,
                 h: Optional[Mapping[int, RingMatrix]] = None,
                 labels_u: Optional[Sequence[Sequence[str]]] = None,
                 labels_v: Optional[Sequence[Sequence[str]]] = None,
                 check: bool = True):
        if len(rank_u) != len(rank_v):
            raise InvalidDatum(f"rank_u has {len(rank_u)} degrees but rank_v has {len(rank_v)}")
        if not rank_u:
            raise InvalidDatum("a datum needs at least degree 0")
        self.h_rank = int(h_rank)
        self.zero = _zero(self.h_rank)
        self.rank_u = tuple(int(r) for r in rank_u)
        self.rank_v = tuple(int(r) for r in rank_v)
        self.top = len(self.rank_u) - 1
        if labels_u is None:
            labels_u = [[f"p{k}_{i}" for i in range(r)] for k, r in enumerate(self.rank_u)]
        if labels_v is None:
            labels_v = [[f"r{k}_{i}" for i in range(r)] for k, r in enumerate(self.rank_v)]
        self.labels_u = tuple(tuple(map(str, ls)) for ls in labels_u)
        self.labels_v = tuple(tuple(map(str, ls)) for ls in labels_v)
        for name, labels, ranks in (("labels_u", self.labels_u, self.rank_u),
                                    ("labels_v", self.labels_v, self.rank_v)):
            if len(labels) != len(ranks) or any(len(l) != r for l, r in zip(labels, ranks)):
                raise InvalidDatum(f"{name} does not match the ranks")
        names = [x for ls in self.labels_u + self.labels_v for x in ls]
        if len(set(names)) != len(names):
            raise InvalidDatum("basis labels must be distinct")

        n = self.top
        self.bdry1 = self._fill("bdry1", bdry1, range(1, n + 1), lambda k: (self.ru(k - 1), self.ru(k)))
        self.bdryv = self._fill("bdryv", bdryv, range(1, n + 1), lambda k: (self.rv(k - 1), self.rv(k)))
        self.P = self._fill("P", P, range(1, n + 1), lambda k: (self.ru(k - 1), self.rv(k)))
        self.N = self._fill("N", N, range(0, n + 1), lambda k: (self.rv(k), self.ru(k)))
        self.h = self._fill("h", h, range(0, n + 1), lambda k: (self.ru(k), self.ru(k)))
        self._check_rings()
        if check:
            bad = datum_violations(self)
            if bad:
                k, blk = bad[0]
                raise InvalidDatum(
                    f"D_{k} o D_{k + 1} != 0 in block (row{blk[0]},col{blk[1]})", k, blk, bad)

    def ru(self, k: int) -> int:
        return self.rank_u[k] if 0 <= k <= self.top else 0

    def rv(self, k: int) -> int:
        return self.rank_v[k] if 0 <= k <= self.top else 0

    def _fill(self, name, given, degrees, shape) -> Dict[int, RingMatrix]:
        given = dict(given or {})
        out = {}
        for k in degrees:
            m = given.pop(k, None)
            if m is None:
                m = RingMatrix.zeros(*shape(k), self.zero)
            if m.shape != shape(k):
                raise InvalidDatum(f"{name}[{k}] has shape {m.shape}, expected {shape(k)}", k)
            out[k] = m
        for k, m in given.items():
            if m.rows and m.cols:
                raise InvalidDatum(f"{name}[{k}] is outside the admissible degrees", k)
        return out

    def _check_rings(self) -> None:
        for name in ("bdry1", "bdryv", "P", "N", "h"):
            low = 1 if name == "P" else 0
            for k, m in getattr(self, name).items():
                for x in (x for r in m.entries for x in r):
                    if not isinstance(x, GroupRingElement) or x.h_rank != self.h_rank or x.rational:
                        raise InvalidDatum(f"{name}[{k}] has an entry outside Z[G] with h_rank {self.h_rank}", k)
                    if x and x.min_theta() < low:
                        raise InvalidDatum(f"{name}[{k}] entry {x} has t-exponent below {low}", k)

    def euler_characteristic_v(self) -> int:
        return sum((-1) ** k * r for k, r in enumerate(self.rank_v))

    def __repr__(self) -> str:
        return f"CyclicCobordismDatum(h_rank={self.h_rank}, rank_u={list(self.rank_u)}, rank_v={list(self.rank_v)})"


def _theta(d: CyclicCobordismDatum) -> GroupRingElement:
    return GroupRingElement.theta(d.h_rank)


def _one_minus_th(d: CyclicCobordismDatum, k: int) -> RingMatrix:
    n = d.ru(k)
    if n == 0:
        return RingMatrix.zeros(0, 0, d.zero)
    return RingMatrix.identity(n, d.zero) - d.h[k].scale(_theta(d))


def _get(mats: Mapping[int, RingMatrix], k: int, shape, zero) -> RingMatrix:
    m = mats.get(k)
    return m if m is not None else RingMatrix.zeros(*shape, zero)


def _blocks(d: CyclicCobordismDatum, k: int) -> List[List[RingMatrix]]:
    """The 3x3 blocks of ``D_k : E_k -> E_{k-1}``."""
    z = d.zero
    ru, rv = d.ru, d.rv
    b1 = lambda j: _get(d.bdry1, j, (ru(j - 1), ru(j)), z)
    return [
        [b1(k), _get(d.P, k, (ru(k - 1), rv(k)), z), _one_minus_th(d, k - 1)],
        [RingMatrix.zeros(rv(k - 1), ru(k), z), _get(d.bdryv, k, (rv(k - 1), rv(k)), z),
         _get(d.N, k - 1, (rv(k - 1), ru(k - 1)), z)],
        [RingMatrix.zeros(ru(k - 2), ru(k), z), RingMatrix.zeros(ru(k - 2), rv(k), z), -b1(k - 1)],
    ]


def _e_sizes(d: CyclicCobordismDatum, k: int) -> List[int]:
    return [d.ru(k), d.rv(k), d.ru(k - 1)]


def square_block(d: CyclicCobordismDatum, k: int, row: int, col: int) -> RingMatrix:
    """Block ``(row, col)`` (1-based) of ``D_k o D_{k+1}``."""
    lo, hi = _blocks(d, k), _blocks(d, k + 1)
    acc = None
    for m in range(3):
        term = lo[row - 1][m] @ hi[m][col - 1]
        acc = term if acc is None else acc + term
    return acc


def datum_violations(d: CyclicCobordismDatum) -> List[Tuple[int, Tuple[int, int]]]:
    """``(k, (row, col))`` for every nonzero block of ``D_k o D_{k+1}``."""
    return [(k, (i, j)) for k in range(1, d.top + 1) for i in (1, 2, 3) for j in (1, 2, 3)
            if not square_block(d, k, i, j).is_zero()]


def assemble_E(d: CyclicCobordismDatum, check: bool = True) -> BasedComplex:
    """The filtration complex ``E`` over ``ZH[t]`` in degrees ``0..n+1``."""
    top = d.top + 1
    ranks = [sum(_e_sizes(d, k)) for k in range(top + 1)]
    bd = {}
    for k in range(1, top + 1):
        bd[k] = RingMatrix.block(_blocks(d, k), _e_sizes(d, k - 1), _e_sizes(d, k), d.zero)
    labels = [list(_e_labels(d, k)) for k in range(top + 1)]
    return BasedComplex(ranks, bd, d.zero, labels, check=check)


def _e_labels(d: CyclicCobordismDatum, k: int) -> List[str]:
    lu = lambda j: d.labels_u[j] if 0 <= j <= d.top else ()
    lv = d.labels_v[k] if 0 <= k <= d.top else ()
    return [*lu(k), *lv, *(f"s({x})" for x in lu(k - 1))]


def mapping_torus_datum(h: Mapping[int, RingMatrix], bdry1: Optional[Mapping[int, RingMatrix]] = None,
                        h_rank: Optional[int] = None, labels_u=None) -> CyclicCobordismDatum:
    """Datum with no ``v`` generators: only a self-map ``h`` of the level complex."""
    if not h:
        raise InvalidDatum("mapping torus datum needs at least h[0]")
    top = max(h)
    ranks = []
    for k in range(top + 1):
        m = h.get(k)
        if m is None:
            raise InvalidDatum(f"h[{k}] is missing", k)
        if not m.is_square():
            raise InvalidDatum(f"h[{k}] is not square", k)
        ranks.append(m.rows)
    if h_rank is None:
        h_rank = next(iter(h.values())).zero.h_rank
    bdry1 = dict(bdry1 or {})
    for k, b in bdry1.items():
        if 1 <= k <= top and b.shape != (ranks[k - 1], ranks[k]):
            raise InvalidDatum(f"bdry1[{k}] has shape {b.shape}", k)
    for k in range(1, top + 1):
        if k in bdry1 and bdry1[k] @ h[k] != h[k - 1] @ bdry1[k]:
            raise InvalidDatum(f"h is not a chain map in degree {k}", k, (1, 3))
    return CyclicCobordismDatum(h_rank, ranks, [0] * (top + 1), bdry1=bdry1, h=h, labels_u=labels_u)


# ---------------------------------------------------------------------------
# change of base


def _loc(M: RingMatrix) -> RingMatrix:
    return to_localized(M)


@dataclass
class ChangeOfBase:
    """Per-degree ``T_k`` (columns: new basis in the old one), its inverse,
    the resolvents ``R_k = (1 - t h_k)^{-1}`` and the transformed blocks."""

    T: Dict[int, RingMatrix]
    T_inv: Dict[int, RingMatrix]
    R: Dict[int, RingMatrix]
    blocks: Dict[int, List[List[RingMatrix]]]
    delta: Dict[int, RingMatrix]

    def violations(self) -> List[Tuple[int, Tuple[int, int]]]:
        """Blocks ``(1,2), (2,1), (3,1), (3,2)`` of ``T^-1 D T`` that fail to vanish."""
        bad = []
        for k, b in sorted(self.blocks.items()):
            for i, j in ((0, 1), (1, 0), (2, 0), (2, 1)):
                if not b[i][j].is_zero():
                    bad.append((k, (i + 1, j + 1)))
        return bad


def _resolvents(d: CyclicCobordismDatum) -> Dict[int, RingMatrix]:
    out = {}
    lz = LocalizedElement(d.zero)
    for k in range(d.top + 1):
        if d.ru(k):
            out[k] = resolvent_rational(d.h[k])
        else:
            out[k] = RingMatrix.zeros(0, 0, lz)
    return out


def _r(R: Mapping[int, RingMatrix], k: int, lz) -> RingMatrix:
    return R.get(k, RingMatrix.zeros(0, 0, lz))


def change_of_base(d: CyclicCobordismDatum) -> ChangeOfBase:
    lz = LocalizedElement(d.zero)
    R = _resolvents(d)
    T, T_inv = {}, {}
    for k in range(d.top + 2):
        ru, rv, rs = _e_sizes(d, k)
        RP = _r(R, k - 1, lz) @ _loc(_get(d.P, k, (rs, rv), d.zero)) if rs else RingMatrix.zeros(0, rv, lz)
        I = lambda n: RingMatrix.identity(n, lz)
        T[k] = RingMatrix.block([[I(ru), None, None], [None, I(rv), None], [None, -RP, I(rs)]],
                                [ru, rv, rs], [ru, rv, rs], lz)
        T_inv[k] = RingMatrix.block([[I(ru), None, None], [None, I(rv), None], [None, RP, I(rs)]],
                                    [ru, rv, rs], [ru, rv, rs], lz)
    blocks, delta = {}, {}
    for k in range(1, d.top + 2):
        D = RingMatrix.block([[_loc(b) for b in row] for row in _blocks(d, k)],
                             _e_sizes(d, k - 1), _e_sizes(d, k), lz)
        Dp = T_inv[k - 1] @ D @ T[k]
        rows = _cuts(_e_sizes(d, k - 1))
        cols = _cuts(_e_sizes(d, k))
        blocks[k] = [[Dp.slice(rows[i], rows[i + 1], cols[j], cols[j + 1]) for j in range(3)]
                     for i in range(3)]
        delta[k] = blocks[k][1][1]
    return ChangeOfBase(T, T_inv, R, blocks, delta)


def _cuts(sizes: Sequence[int]) -> List[int]:
    out = [0]
    for s in sizes:
        out.append(out[-1] + s)
    return out


def novikov_differential(d: CyclicCobordismDatum, sign: int = -1,
                         R: Optional[Mapping[int, RingMatrix]] = None) -> Dict[int, RingMatrix]:
    """``bdryv_k + sign * N_{k-1} R_{k-1} P_k``; ``sign = -1`` is the correct one."""
    lz = LocalizedElement(d.zero)
    R = _resolvents(d) if R is None else R
    out = {}
    for k in range(1, d.top + 1):
        corr = _loc(d.N[k - 1]) @ _r(R, k - 1, lz) @ _loc(d.P[k]) if d.ru(k - 1) else None
        base = _loc(d.bdryv[k])
        out[k] = base if corr is None else (base - corr if sign < 0 else base + corr)
    return out


@dataclass
class NovikovComplexResult:
    complex: BasedComplex
    incidence: Dict[Tuple[str, str], LocalizedElement]
    delta: Dict[int, RingMatrix] = field(default_factory=dict)

    def betti(self) -> List[int]:
        from .chain import novikov_betti
        return novikov_betti(self.complex)


def novikov_complex(d: CyclicCobordismDatum, check: bool = True) -> NovikovComplexResult:
    """Novikov complex over the localized ring, basis labelled by ``v`` generators.

    ``incidence[(r, s)]`` is the coefficient of ``s`` in ``delta(r)`` for
    ``r`` of degree ``k`` and ``s`` of degree ``k - 1``.
    """
    delta = novikov_differential(d)
    lz = LocalizedElement(d.zero)
    C = BasedComplex(d.rank_v, delta, lz, d.labels_v, check=False)
    if check:
        from .chain import validate
        rep = validate(C)
        if not rep.ok:
            raise InvalidComplex("Novikov differential does not square to zero", rep.violations)
    inc = {}
    for k, m in delta.items():
        for j, r in enumerate(d.labels_v[k]):
            for i, s in enumerate(d.labels_v[k - 1]):
                inc[(r, s)] = m[i, j]
    return NovikovComplexResult(C, inc, delta)


def _locate_v(d: CyclicCobordismDatum, label: str) -> Tuple[int, int]:
    for k, ls in enumerate(d.labels_v):
        if label in ls:
            return k, ls.index(label)
    raise KeyError(f"no v generator labelled {label!r}")


def incidence_series(d: CyclicCobordismDatum, r: str, s: str, order: int) -> NovikovSeries:
    """``bdryv(r, s) - sum_j <N (t h)^j P r, s>`` by direct iteration, exact through ``t^order``."""
    k, j = _locate_v(d, r)
    k2, i = _locate_v(d, s)
    if k2 != k - 1:
        raise KeyError(f"{r!r} has degree {k} and {s!r} has degree {k2}; they are not adjacent")
    theta = _theta(d)
    acc = d.bdryv[k][i, j]
    vec = list(d.P[k].col(j))
    h, Nrow = d.h[k - 1], d.N[k - 1].row(i)
    while any(vec):
        acc = acc - sum((a * b for a, b in zip(Nrow, vec) if a and b), d.zero)
        nxt = []
        for row in h.entries:
            x = sum((a * b for a, b in zip(row, vec) if a and b), d.zero) * theta
            nxt.append(NovikovSeries(x, order).poly)
        vec = nxt
    return NovikovSeries(acc, order)


def incidence_table_series(d: CyclicCobordismDatum, order: int) -> Dict[Tuple[str, str], NovikovSeries]:
    out = {}
    for k in range(1, d.top + 1):
        for r in d.labels_v[k]:
            for s in d.labels_v[k - 1]:
                out[(r, s)] = incidence_series(d, r, s, order)
    return out


# ---------------------------------------------------------------------------
# torsion of the inclusion of the Novikov complex


@dataclass
class InclusionTorsion:
    path_a: K1Class
    path_b: K1Class

    def agree(self) -> bool:
        return self.path_a == self.path_b


def quotient_complex(d: CyclicCobordismDatum, cob: Optional[ChangeOfBase] = None) -> BasedComplex:
    """``Q_k = u_k + u_{k-1}`` with boundary ``[[bdry1, 1 - t h], [0, Delta]]`` over the localized ring."""
    cob = change_of_base(d) if cob is None else cob
    lz = LocalizedElement(d.zero)
    top = d.top + 1
    ranks = [d.ru(k) + d.ru(k - 1) for k in range(top + 1)]
    bd = {}
    for k in range(1, top + 1):
        b = cob.blocks[k]
        bd[k] = RingMatrix.block([[b[0][0], b[0][2]], [b[2][0], b[2][2]]],
                                 [d.ru(k - 1), d.ru(k - 2)], [d.ru(k), d.ru(k - 1)], lz)
    lu = lambda j: d.labels_u[j] if 0 <= j <= d.top else ()
    labels = [[*lu(k), *(f"s({x})" for x in lu(k - 1))] for k in range(top + 1)]
    return BasedComplex(ranks, bd, lz, labels, check=False)


def determinant_product(d: CyclicCobordismDatum) -> K1Class:
    """``prod_k [det(1 - t h_k)] ** (-1)**(k+1)``."""
    tau = K1Class(d.zero.one())
    for k in range(d.top + 1):
        if not d.ru(k):
            continue
        cls = _class_of(det(_one_minus_th(d, k)))
        tau = tau * (cls if k % 2 == 1 else cls.inverse())
    return tau


def torsion_of_inclusion(d: CyclicCobordismDatum, rng: Optional[random.Random] = None) -> InclusionTorsion:
    """Torsion of the inclusion of the Novikov complex into ``E``, computed twice.

    ``path_a`` runs the general torsion algorithm on the quotient complex;
    ``path_b`` is the determinant product.
    """
    a = torsion_acyclic(quotient_complex(d), rng)
    return InclusionTorsion(a, determinant_product(d))


def inclusion_map(d: CyclicCobordismDatum, nov: Optional[NovikovComplexResult] = None,
                  cob: Optional[ChangeOfBase] = None) -> ChainMap:
    """Inclusion of the Novikov complex into ``E`` over the localized ring."""
    nov = novikov_complex(d) if nov is None else nov
    cob = change_of_base(d) if cob is None else cob
    E = assemble_E(d)
    lz = LocalizedElement(d.zero)
    E_loc = BasedComplex(E.ranks, {k: _loc(m) for k, m in E.boundaries.items()}, lz, E.labels, check=False)
    maps = {}
    for k in range(E.top + 1):
        ru, rv, rs = _e_sizes(d, k)
        maps[k] = cob.T[k].slice(0, ru + rv + rs, ru, ru + rv)
    src = BasedComplex([nov.complex.rank(k) for k in range(E.top + 1)],
                       nov.complex.boundaries, lz,
                       [list(nov.complex.labels[k]) if k <= nov.complex.top else [] for k in range(E.top + 1)],
                       check=False)
    return ChainMap(src, E_loc, maps)


def inclusion_cone_torsion(d: CyclicCobordismDatum, rng: Optional[random.Random] = None) -> K1Class:
    """Torsion of the mapping cone of the inclusion, in the original basis of ``E``."""
    return torsion_of_map(inclusion_map(d), rng)
