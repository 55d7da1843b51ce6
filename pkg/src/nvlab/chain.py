"""Based free chain complexes, chain maps, homology and mapping cones."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .group_algebra import GroupRingElement, LocalizedElement
from .linalg import RingMatrix, ShapeError, rank, rank_lower_bound, snf, to_localized


class ComplexError(ValueError):
    pass


class InvalidComplex(ComplexError):
    def __init__(self, message: str, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class UnsupportedExtension(ComplexError):
    pass


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: List[Tuple[int, int, int]] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


class BasedComplex:
    """``0 -> C_n -> ... -> C_0 -> 0`` with a chosen ordered basis in each degree.

    ``boundaries[k]`` is the matrix of ``d_k : C_k -> C_{k-1}`` acting on
    column vectors (rows indexed by the basis of ``C_{k-1}``).  Missing
    boundaries are zero.
    """

    def __init__(self, ranks: Sequence[int], boundaries: Mapping[int, RingMatrix], zero,
                 labels: Optional[Sequence[Sequence[str]]] = None, check: bool = True):
        self.ranks = tuple(int(r) for r in ranks)
        self.zero = zero
        n = len(self.ranks) - 1
        self.top = n
        if labels is None:
            labels = [[f"e{k}_{i}" for i in range(r)] for k, r in enumerate(self.ranks)]
        self.labels = tuple(tuple(str(x) for x in ls) for ls in labels)
        if len(self.labels) != len(self.ranks) or any(
                len(l) != r for l, r in zip(self.labels, self.ranks)):
            raise ShapeError("labels do not match ranks")
        self._d: Dict[int, RingMatrix] = {}
        for k in range(1, n + 1):
            m = boundaries.get(k)
            if m is None:
                m = RingMatrix.zeros(self.ranks[k - 1], self.ranks[k], zero)
            if m.shape != (self.ranks[k - 1], self.ranks[k]):
                raise ShapeError(f"d_{k} has shape {m.shape}, expected {(self.ranks[k - 1], self.ranks[k])}")
            self._d[k] = m
        extra = set(boundaries) - set(range(1, n + 1))
        if any(boundaries[k].rows and boundaries[k].cols for k in extra):
            raise ShapeError(f"boundaries given outside degrees 1..{n}: {sorted(extra)}")
        if check:
            rep = validate(self)
            if not rep.ok:
                k, i, j = rep.violations[0]
                raise InvalidComplex(f"d_{k} o d_{k + 1} != 0 at entry ({i},{j})", rep.violations)

    def rank(self, k: int) -> int:
        return self.ranks[k] if 0 <= k <= self.top else 0

    def d(self, k: int) -> RingMatrix:
        if k in self._d:
            return self._d[k]
        return RingMatrix.zeros(self.rank(k - 1), self.rank(k), self.zero)

    @property
    def boundaries(self) -> Dict[int, RingMatrix]:
        return dict(self._d)

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * r for k, r in enumerate(self.ranks))

    def map_entries(self, f, zero) -> "BasedComplex":
        return BasedComplex(self.ranks, {k: m.map(f, zero=zero) for k, m in self._d.items()}, zero,
                            self.labels, check=False)

    def __repr__(self) -> str:
        return f"BasedComplex(ranks={list(self.ranks)})"


def validate(C: BasedComplex) -> ValidationReport:
    """Every entry ``(k, row, col)`` where ``d_k o d_{k+1}`` is nonzero."""
    bad = []
    for k in range(1, C.top):
        prod = C.d(k) @ C.d(k + 1)
        bad.extend((k, i, j) for i, j in prod.nonzero_positions())
    return ValidationReport(not bad, bad)


class ChainMap:
    """Per-degree matrices ``f_k : S_k -> T_k`` with ``d^T f = f d^S``."""

    def __init__(self, source: BasedComplex, target: BasedComplex, maps: Mapping[int, RingMatrix],
                 check: bool = True):
        self.source, self.target = source, target
        top = max(source.top, target.top)
        self.top = top
        self._f: Dict[int, RingMatrix] = {}
        for k in range(0, top + 1):
            m = maps.get(k)
            if m is None:
                m = RingMatrix.zeros(target.rank(k), source.rank(k), target.zero)
            if m.shape != (target.rank(k), source.rank(k)):
                raise ShapeError(f"f_{k} has shape {m.shape}, expected {(target.rank(k), source.rank(k))}")
            self._f[k] = m
        if check:
            for k in range(1, top + 1):
                if target.d(k) @ self.f(k) != self.f(k - 1) @ source.d(k):
                    raise InvalidComplex(f"not a chain map: d f != f d in degree {k}")

    def f(self, k: int) -> RingMatrix:
        if k in self._f:
            return self._f[k]
        return RingMatrix.zeros(self.target.rank(k), self.source.rank(k), self.target.zero)


def identity_map(C: BasedComplex) -> ChainMap:
    return ChainMap(C, C, {k: RingMatrix.identity(r, C.zero) for k, r in enumerate(C.ranks)})


def homology_int(C: BasedComplex) -> List[Tuple[int, List[int]]]:
    """``[(betti_k, torsion coefficients of H_k)]`` for an integer complex."""
    diag = {}
    ranks = {}
    for k in range(1, C.top + 2):
        m = C.d(k)
        if m.rows and m.cols:
            diag[k], ranks[k] = snf(m)
        else:
            diag[k], ranks[k] = [], 0
    out = []
    for k in range(C.top + 1):
        betti = C.rank(k) - ranks.get(k, 0) - ranks.get(k + 1, 0)
        torsion = [d for d in diag.get(k + 1, []) if d > 1]
        out.append((betti, torsion))
    return out


def _betti(C: BasedComplex, rk: Mapping[int, int]) -> List[int]:
    return [C.rank(k) - rk.get(k, 0) - rk.get(k + 1, 0) for k in range(C.top + 1)]


def novikov_betti(C: BasedComplex) -> List[int]:
    """Ranks of homology over the field of fractions of the entry ring."""
    # specialized ranks are lower bounds, so zero specialized betti numbers are exact
    lower = _betti(C, {k: rank_lower_bound(C.d(k)) for k in range(1, C.top + 1)})
    if not any(lower):
        return lower
    return _betti(C, {k: rank(C.d(k)) for k in range(1, C.top + 1)})


def direct_sum(A: BasedComplex, B: BasedComplex) -> BasedComplex:
    top = max(A.top, B.top)
    ranks = [A.rank(k) + B.rank(k) for k in range(top + 1)]
    bd = {}
    for k in range(1, top + 1):
        bd[k] = RingMatrix.block([[A.d(k), None], [None, B.d(k)]],
                                 [A.rank(k - 1), B.rank(k - 1)], [A.rank(k), B.rank(k)], A.zero)
    labels = [[*(A.labels[k] if k <= A.top else ()), *(B.labels[k] if k <= B.top else ())]
              for k in range(top + 1)]
    return BasedComplex(ranks, bd, A.zero, labels, check=False)


def mapping_cone(f: ChainMap) -> BasedComplex:
    """``Cone_k = T_k + S_{k-1}`` with boundary ``[[d^T, f], [0, -d^S]]``."""
    S, T = f.source, f.target
    top = max(T.top, S.top + 1)
    ranks = [T.rank(k) + S.rank(k - 1) for k in range(top + 1)]
    bd = {}
    for k in range(1, top + 1):
        bd[k] = RingMatrix.block(
            [[T.d(k), f.f(k - 1)], [None, -S.d(k - 1)]],
            [T.rank(k - 1), S.rank(k - 2)], [T.rank(k), S.rank(k - 1)], T.zero)
    labels = []
    for k in range(top + 1):
        tl = T.labels[k] if k <= T.top else ()
        sl = S.labels[k - 1] if 0 <= k - 1 <= S.top else ()
        labels.append([*tl, *(f"s({x})" for x in sl)])
    return BasedComplex(ranks, bd, T.zero, labels, check=False)


RING_TOWER = ("ZH", "ZH[t]", "ZG", "localized")


def ring_of(C: BasedComplex) -> str:
    """Smallest ring of the tower ``ZH < ZH[t] < ZG < localized`` holding the entries."""
    if isinstance(C.zero, LocalizedElement):
        return "localized"
    entries = [x for m in C.boundaries.values() for r in m.entries for x in r]
    if all(x.in_zh() for x in entries):
        return "ZH"
    if all(x.in_zh_theta() for x in entries):
        return "ZH[t]"
    return "ZG"


def extend_ring(C: BasedComplex, target: str) -> BasedComplex:
    """Tensor up along an inclusion of the tower; bases and matrices are kept."""
    if target not in RING_TOWER:
        raise UnsupportedExtension(f"unknown ring {target!r}; expected one of {RING_TOWER}")
    src = ring_of(C)
    if RING_TOWER.index(src) > RING_TOWER.index(target):
        raise UnsupportedExtension(f"cannot extend a complex over {src} to {target}")
    if target != "localized" or src == "localized":
        return BasedComplex(C.ranks, C.boundaries, C.zero, C.labels, check=False)
    bd = {k: to_localized(m) for k, m in C.boundaries.items()}
    z = LocalizedElement(C.zero, C.zero.one())
    return BasedComplex(C.ranks, bd, z, C.labels, check=False)


def is_integer_complex(C: BasedComplex) -> bool:
    if not isinstance(C.zero, GroupRingElement):
        return False
    return all(not x or (x.as_monomial() is not None and not any(x.as_monomial()[1]))
               for m in C.boundaries.values() for r in m.entries for x in r)
