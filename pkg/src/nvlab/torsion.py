"""Torsion of acyclic based complexes and of chain homotopy equivalences.

Classes live in the multiplicative group of fractions modulo ``+-G``
(:class:`~nvlab.group_algebra.K1Class`); only the determinant part of K1 is
computed.

Convention: for an acyclic complex the torsion is the alternating product
``prod_k det(M_k) ** (-1)**k`` where ``M_k`` is a nonsingular square minor of
``d_k`` chosen compatibly across degrees.  With this choice a cone-like
complex with isomorphisms ``A_i`` has torsion ``prod_i det(A_i) ** (-1)**(i+1)``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, Mapping, Optional

from .chain import BasedComplex, ChainMap, InvalidComplex, mapping_cone, novikov_betti
from .group_algebra import GroupRingElement, K1Class, LocalizedElement
from .linalg import RingMatrix, as_group_ring_matrix, det, eliminate, modular_pivots


class TorsionError(ValueError):
    pass


class NotAcyclic(TorsionError):
    pass


class PivotFailure(TorsionError):
    """No nonsingular minor was found although the complex is acyclic."""


def _class_of(x) -> K1Class:
    if isinstance(x, LocalizedElement):
        return K1Class(x.num, x.den)
    if isinstance(x, GroupRingElement):
        return K1Class(x)
    raise TypeError(f"no K1 class for {type(x).__name__}")


def _identity_class(zero) -> K1Class:
    base = zero.num if isinstance(zero, LocalizedElement) else zero
    return K1Class(base.one())


def torsion_acyclic(C: BasedComplex, rng: Optional[random.Random] = None,
                    check_acyclic: bool = True) -> K1Class:
    """Torsion of a complex acyclic over the field of fractions of its entries.

    Works down from the top degree: the columns of ``d_k`` not already used
    as rows of ``d_{k+1}`` are matched with a set of rows giving a
    nonsingular minor.  ``rng`` randomizes the pivot choice; the class does
    not depend on it.
    """
    if check_acyclic and any(novikov_betti(C)):
        raise NotAcyclic(f"complex has nonzero homology ranks {novikov_betti(C)}")
    tau = _identity_class(C.zero)
    used: list = []
    for k in range(C.top, 0, -1):
        d = C.d(k)
        cols = [j for j in range(d.cols) if j not in used]
        if not cols:
            used = []
            continue
        sub = d.submatrix(range(d.rows), cols)
        pivot_rows, pivot_cols = modular_pivots(sub, rng)
        if len(pivot_cols) != len(cols):
            pivot_rows, pivot_cols = eliminate(as_group_ring_matrix(sub), rng)
        if len(pivot_cols) != len(cols):
            raise PivotFailure(f"columns of d_{k} outside the previous pivots are dependent")
        pivot_rows = sorted(pivot_rows)
        minor = det(d.submatrix(pivot_rows, cols))
        if not minor:
            raise PivotFailure(f"selected minor of d_{k} is singular")
        cls = _class_of(minor)
        tau = tau * (cls if k % 2 == 0 else cls.inverse())
        used = pivot_rows
    if len(used) != C.rank(0):
        raise NotAcyclic("degree 0 is not exhausted by the image of d_1")
    return tau


@dataclass(frozen=True)
class ConeLikeDatum:
    """A complex ``C``, isomorphisms ``A_k : C_k -> C_k`` and maps ``d'_k : C_k -> C_{k-1}``.

    Assembles to ``E_k = C_k + C_{k-1}`` with boundary
    ``[[d_k, A_{k-1}], [0, d'_{k-1}]]``.
    """

    complex: BasedComplex
    A: Mapping[int, RingMatrix]
    d_prime: Mapping[int, RingMatrix]

    def a(self, k: int) -> RingMatrix:
        if k in self.A:
            return self.A[k]
        n = self.complex.rank(k)
        return RingMatrix.identity(n, self.complex.zero)

    def dp(self, k: int) -> RingMatrix:
        if k in self.d_prime:
            return self.d_prime[k]
        C = self.complex
        return RingMatrix.zeros(C.rank(k - 1), C.rank(k), C.zero)

    def check(self) -> None:
        """Raise unless ``d'`` is a boundary and ``d_k A_k + A_{k-1} d'_k = 0``."""
        C = self.complex
        for k in range(0, C.top + 1):
            if self.a(k).shape != (C.rank(k), C.rank(k)):
                raise InvalidComplex(f"A_{k} has shape {self.a(k).shape}")
        for k in range(1, C.top + 1):
            if not (self.dp(k) @ self.dp(k + 1)).is_zero():
                raise InvalidComplex(f"d'_{k} o d'_{k + 1} != 0")
            if not (C.d(k) @ self.a(k) + self.a(k - 1) @ self.dp(k)).is_zero():
                raise InvalidComplex(f"d_{k} A_{k} + A_{k - 1} d'_{k} != 0")

    def assemble(self, check: bool = True) -> BasedComplex:
        if check:
            self.check()
        C = self.complex
        top = C.top + 1
        ranks = [C.rank(k) + C.rank(k - 1) for k in range(top + 1)]
        bd = {}
        for k in range(1, top + 1):
            bd[k] = RingMatrix.block(
                [[C.d(k), self.a(k - 1)], [None, self.dp(k - 1)]],
                [C.rank(k - 1), C.rank(k - 2)], [C.rank(k), C.rank(k - 1)], C.zero)
        labels = []
        for k in range(top + 1):
            labels.append([*(C.labels[k] if k <= C.top else ()),
                           *(f"s({x})" for x in (C.labels[k - 1] if k >= 1 else ()))])
        return BasedComplex(ranks, bd, C.zero, labels, check=check)


def cone_torsion_closed_form(D: ConeLikeDatum) -> K1Class:
    """``prod_i [det A_i] ** (-1)**(i+1)``."""
    tau = _identity_class(D.complex.zero)
    for i in range(0, D.complex.top + 1):
        if not D.complex.rank(i):
            continue
        d = det(D.a(i))
        if not d:
            raise TorsionError(f"A_{i} is singular")
        cls = _class_of(d)
        tau = tau * (cls if i % 2 == 1 else cls.inverse())
    return tau


def torsion_of_map(f: ChainMap, rng: Optional[random.Random] = None) -> K1Class:
    """Torsion of the mapping cone of ``f``."""
    return torsion_acyclic(mapping_cone(f), rng)


def determinant_classes(matrices: Mapping[int, RingMatrix]) -> Dict[int, K1Class]:
    return {k: _class_of(det(m)) for k, m in matrices.items() if m.rows}
