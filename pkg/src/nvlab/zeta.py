"""Lefschetz eta and zeta functions of a flow, by three independent routes.

1. closed-orbit census of a combinatorial orbit model (:class:`GraphSelfMap`),
2. traces of powers of ``t h_s``,
3. the determinant product ``prod_s det(1 - t h_s) ** (-1)**(s+1)``.

Orbit models are wedge models: each cell of degree ``s`` stands for an
``s``-sphere, and the return map is described by *pieces*
``(source, target, degree, label)``.  A piece of degree ``d`` covers the
target cell ``|d|`` times with orientation ``sign(d)`` and shifts by the
group element ``label`` of H.  Every covering sheet is an expanding
branch, so each closed chain of ``k`` sheets carries exactly one fixed
point of the ``k``-th iterate, of index ``(-1)**s`` times the product of
the sheet signs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .group_algebra import GroupElem, GroupRingElement, LocalizedElement, NovikovSeries, series_exp_log
from .linalg import RingMatrix, det


class ZetaError(ValueError):
    pass


class InvalidOrbit(ZetaError):
    pass


class Unsupported(ZetaError):
    """The orbit model is outside the class that can be enumerated."""


@dataclass(frozen=True)
class ClosedOrbit:
    """A closed orbit with homology class ``g``, index ``+-1`` and multiplicity."""

    g: GroupElem
    index: int
    multiplicity: int = 1

    def __post_init__(self):
        if self.g[0] < 1:
            raise InvalidOrbit(f"closed orbit class {self.g} must have t-exponent >= 1")
        if self.index not in (1, -1):
            raise InvalidOrbit(f"index must be +1 or -1, got {self.index}")
        if self.multiplicity < 1:
            raise InvalidOrbit(f"multiplicity must be positive, got {self.multiplicity}")

    @property
    def period(self) -> int:
        return self.g[0]


@dataclass(frozen=True)
class Piece:
    source: str
    target: str
    degree: int
    label: Tuple[int, ...] = ()


@dataclass(frozen=True)
class Sheet:
    source: int
    target: int
    sign: int
    label: Tuple[int, ...]


@dataclass(frozen=True)
class GFixedPoint:
    """Fixed point of the ``k``-th iterate, up to the deck group.

    ``word`` is the closed chain of sheet indices it follows and ``mult``
    is ``k`` divided by the primitive period of that chain.
    """

    g: GroupElem
    index: int
    mult: int
    degree: int
    word: Tuple[int, ...]


class GraphSelfMap:
    """Cellular self-map of a wedge model, one cell list per degree."""

    def __init__(self, h_rank: int, cells: Mapping[int, Sequence[str]], pieces: Iterable[Piece]):
        self.h_rank = int(h_rank)
        self.cells: Dict[int, Tuple[str, ...]] = {int(s): tuple(cs) for s, cs in cells.items()}
        self._where: Dict[str, Tuple[int, int]] = {}
        for s, cs in self.cells.items():
            if s < 0:
                raise ZetaError(f"negative cell degree {s}")
            for i, c in enumerate(cs):
                if c in self._where:
                    raise ZetaError(f"duplicate cell name {c!r}")
                self._where[c] = (s, i)
        self._gfixed: Dict[Tuple[int, int], Tuple[GFixedPoint, ...]] = {}
        # an empty label means the identity of H
        self.pieces: Tuple[Piece, ...] = tuple(
            Piece(p.source, p.target, p.degree, tuple(p.label) or (0,) * self.h_rank) for p in pieces)
        for p in self.pieces:
            for c in (p.source, p.target):
                if c not in self._where:
                    raise ZetaError(f"piece refers to unknown cell {c!r}")
            if not isinstance(p.degree, int) or p.degree == 0:
                raise ZetaError(f"piece {p.source}->{p.target} needs a nonzero integer degree")
            if len(p.label) != self.h_rank:
                raise ZetaError(f"label {p.label} does not have length {self.h_rank}")

    @property
    def top(self) -> int:
        return max(self.cells, default=-1)

    def degree_of(self, cell: str) -> int:
        return self._where[cell][0]

    def cross_degree_pieces(self) -> List[Piece]:
        return [p for p in self.pieces if self.degree_of(p.source) != self.degree_of(p.target)]

    def induced_matrices(self) -> Dict[int, RingMatrix]:
        """``h_s[target, source] = sum of degree * label`` over pieces in degree ``s``."""
        zero = GroupRingElement(h_rank=self.h_rank)
        out = {}
        for s in range(self.top + 1):
            n = len(self.cells.get(s, ()))
            rows = [[zero] * n for _ in range(n)]
            for p in self.pieces:
                (ss, i), (st, j) = self._where[p.source], self._where[p.target]
                if ss == s and st == s:
                    rows[j][i] = rows[j][i] + GroupRingElement.monomial((0, *p.label), p.degree, self.h_rank)
            out[s] = RingMatrix(rows, zero, (n, n))
        return out

    def sheets(self, s: int) -> List[Sheet]:
        out = []
        for p in self.pieces:
            (ss, i), (st, j) = self._where[p.source], self._where[p.target]
            if ss == s and st == s:
                sign = 1 if p.degree > 0 else -1
                out.extend(Sheet(i, j, sign, tuple(p.label)) for _ in range(abs(p.degree)))
        return out


def _primitive_period(word: Tuple[int, ...]) -> int:
    k = len(word)
    for p in range(1, k + 1):
        if k % p == 0 and word[p:] + word[:p] == word:
            return p
    return k


def _closed_walk_count(sheets: Sequence[Sheet], n: int, k: int) -> int:
    a = [[0] * n for _ in range(n)]
    for sh in sheets:
        a[sh.source][sh.target] += 1
    power = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(k):
        power = [[sum(power[i][m] * a[m][j] for m in range(n)) for j in range(n)] for i in range(n)]
    return sum(power[i][i] for i in range(n))


def enumerate_gfixed(m: GraphSelfMap, k: int, cap: int = 200_000) -> List[GFixedPoint]:
    """All G-fixed points of the ``k``-th iterate, one per closed chain of sheets."""
    if k < 1:
        raise ValueError("iterate must be at least 1")
    if m.cross_degree_pieces():
        raise Unsupported("pieces between cells of different degrees cannot be enumerated")
    cached = m._gfixed.get((k, cap))
    if cached is not None:
        return list(cached)
    out: List[GFixedPoint] = []
    for s in sorted(m.cells):
        n = len(m.cells[s])
        sheets = m.sheets(s)
        if not sheets:
            continue
        if _closed_walk_count(sheets, n, k) > cap:
            raise Unsupported(f"more than {cap} fixed points of iterate {k} in degree {s}")
        by_source: Dict[int, List[int]] = {}
        for idx, sh in enumerate(sheets):
            by_source.setdefault(sh.source, []).append(idx)
        word: List[int] = []

        def walk(start: int, cell: int, sign: int, label: Tuple[int, ...]) -> None:
            if len(word) == k:
                if cell == start:
                    w = tuple(word)
                    out.append(GFixedPoint((k, *label), sign, k // _primitive_period(w), s, w))
                return
            for idx in by_source.get(cell, ()):
                sh = sheets[idx]
                word.append(idx)
                walk(start, sh.target, sign * sh.sign, tuple(a + b for a, b in zip(label, sh.label)))
                word.pop()

        for start in range(n):
            walk(start, start, (-1) ** s, (0,) * m.h_rank)
    m._gfixed[(k, cap)] = tuple(out)
    return out


def _canonical_rotation(word: Tuple[int, ...]) -> Tuple[int, ...]:
    return min(word[i:] + word[:i] for i in range(len(word)))


def orbit_census(m: GraphSelfMap, order: int) -> List[ClosedOrbit]:
    """One closed orbit per quasiorbit of G-fixed points, periods ``1..order``."""
    orbits = []
    for k in range(1, order + 1):
        seen = set()
        for a in enumerate_gfixed(m, k):
            key = (a.degree, _canonical_rotation(a.word))
            if key in seen:
                continue
            seen.add(key)
            orbits.append(ClosedOrbit(a.g, a.index, a.mult))
    return orbits


def prime_orbit_counts(orbits: Iterable[ClosedOrbit], order: int) -> List[int]:
    counts = [0] * order
    for o in orbits:
        if o.multiplicity == 1 and o.period <= order:
            counts[o.period - 1] += 1
    return counts


def _rational_zero(h_rank: int) -> GroupRingElement:
    return GroupRingElement(h_rank=h_rank, rational=True)


def eta_from_orbits(orbits: Iterable[ClosedOrbit], order: int, h_rank: int = 0) -> NovikovSeries:
    """``sum index / multiplicity * g`` over the orbits, exact through ``t^order``."""
    terms: Dict[GroupElem, Fraction] = {}
    for o in orbits:
        if len(o.g) != h_rank + 1:
            raise InvalidOrbit(f"orbit class {o.g} does not match h_rank {h_rank}")
        if o.period > order:
            continue
        terms[o.g] = terms.get(o.g, Fraction(0)) + Fraction(o.index, o.multiplicity)
    return NovikovSeries(GroupRingElement(terms, h_rank, rational=True), order)


def nu_from_gfixed(m: GraphSelfMap, order: int) -> NovikovSeries:
    """``sum_k 1/k sum_a ind(a) g(a)`` over G-fixed points of the iterates."""
    terms: Dict[GroupElem, Fraction] = {}
    for k in range(1, order + 1):
        for a in enumerate_gfixed(m, k):
            terms[a.g] = terms.get(a.g, Fraction(0)) + Fraction(a.index, k)
    return NovikovSeries(GroupRingElement(terms, m.h_rank, rational=True), order)


def _trace(M: RingMatrix):
    acc = M.zero
    for i in range(M.rows):
        acc = acc + M[i, i]
    return acc


def _h_rank_of(h: Mapping[int, RingMatrix], default: int = 0) -> int:
    for m in h.values():
        return m.zero.h_rank
    return default


def eta_from_traces(h: Mapping[int, RingMatrix], order: int, h_rank: Optional[int] = None) -> NovikovSeries:
    """``sum_s (-1)**s sum_{k=1..order} Tr((t h_s)**k) / k``."""
    h_rank = _h_rank_of(h) if h_rank is None else h_rank
    acc = _rational_zero(h_rank)
    theta = GroupRingElement.theta(h_rank)
    for s, hs in h.items():
        if not hs.rows:
            continue
        step = hs.scale(theta)
        power = step
        for k in range(1, order + 1):
            tr = NovikovSeries(_trace(power), order).poly
            if tr:
                acc = acc + tr.to_rational() * Fraction((-1) ** s, k)
            if k < order:
                power = (step @ power).map(lambda x: NovikovSeries(x, order).poly)
    return NovikovSeries(acc, order)


def zeta_from_eta(eta: NovikovSeries) -> NovikovSeries:
    return series_exp_log(eta.to_rational(), "exp")


def zeta_rational(h: Mapping[int, RingMatrix], h_rank: Optional[int] = None) -> LocalizedElement:
    """``prod_s det(1 - t h_s) ** (-1)**(s+1)`` as an exact fraction."""
    h_rank = _h_rank_of(h) if h_rank is None else h_rank
    one = GroupRingElement.constant(1, h_rank)
    num, den = one, one
    theta = GroupRingElement.theta(h_rank)
    for s, hs in h.items():
        if not hs.rows:
            continue
        d = det(RingMatrix.identity(hs.rows, hs.zero) - hs.scale(theta))
        if s % 2:
            num = num * d
        else:
            den = den * d
    return LocalizedElement(num, den)


def zeta_paths(h: Mapping[int, RingMatrix], order: int, model: Optional[GraphSelfMap] = None,
               h_rank: Optional[int] = None) -> Dict[str, NovikovSeries]:
    """Zeta series by every available route, all exact through ``t^order``."""
    h_rank = _h_rank_of(h, model.h_rank if model else 0) if h_rank is None else h_rank
    out = {
        "rational": zeta_rational(h, h_rank).expand(order).to_rational(),
        "traces": zeta_from_eta(eta_from_traces(h, order, h_rank)),
    }
    if model is not None:
        out["orbits"] = zeta_from_eta(eta_from_orbits(orbit_census(model, order), order, model.h_rank))
    return out
