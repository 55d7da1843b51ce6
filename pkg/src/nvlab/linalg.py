"""Dense exact matrices over the group ring, its localization and series."""

from __future__ import annotations

import random
from typing import Callable, List, Optional, Sequence, Tuple

from .group_algebra import (
    GroupRingElement,
    LocalizedElement,
    NovikovSeries,
    _Packing,
    _max_exponent,
    expand_many,
)


class ShapeError(ValueError):
    pass


class RingMatrix:
    """Immutable dense matrix with entries from one commutative ring.

    ``zero`` is the additive identity of the entry ring; it is what lets
    empty blocks (0 rows or 0 columns) take part in products and block
    assembly.
    """

    __slots__ = ("rows", "cols", "entries", "zero")

    def __init__(self, entries: Sequence[Sequence], zero, shape: Optional[Tuple[int, int]] = None):
        rows = [tuple(r) for r in entries]
        if shape is None:
            if not rows:
                raise ShapeError("shape is required for a matrix with no rows")
            shape = (len(rows), len(rows[0]))
        r, c = shape
        if len(rows) != r or any(len(row) != c for row in rows):
            raise ShapeError(f"entries do not form a {r}x{c} grid")
        self.rows, self.cols = r, c
        self.entries = tuple(rows)
        self.zero = zero

    # -- construction -------------------------------------------------------

    @classmethod
    def zeros(cls, rows: int, cols: int, zero) -> "RingMatrix":
        return cls([[zero] * cols for _ in range(rows)], zero, (rows, cols))

    @classmethod
    def identity(cls, n: int, zero) -> "RingMatrix":
        one = zero.one()
        return cls([[one if i == j else zero for j in range(n)] for i in range(n)], zero, (n, n))

    @classmethod
    def from_function(cls, rows: int, cols: int, f: Callable[[int, int], object], zero) -> "RingMatrix":
        return cls([[f(i, j) for j in range(cols)] for i in range(rows)], zero, (rows, cols))

    @classmethod
    def block(cls, blocks: Sequence[Sequence[Optional["RingMatrix"]]], row_sizes: Sequence[int],
              col_sizes: Sequence[int], zero) -> "RingMatrix":
        """Assemble from a grid of blocks; ``None`` stands for a zero block."""
        out: List[list] = []
        for bi, rs in enumerate(row_sizes):
            band = [[] for _ in range(rs)]
            for bj, cs in enumerate(col_sizes):
                b = blocks[bi][bj]
                if b is None:
                    for row in band:
                        row.extend([zero] * cs)
                    continue
                if (b.rows, b.cols) != (rs, cs):
                    raise ShapeError(f"block ({bi},{bj}) is {b.rows}x{b.cols}, expected {rs}x{cs}")
                for i, row in enumerate(band):
                    row.extend(b.entries[i])
            out.extend(band)
        return cls(out, zero, (sum(row_sizes), sum(col_sizes)))

    # -- access -------------------------------------------------------------

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def row(self, i: int) -> tuple:
        return self.entries[i]

    def col(self, j: int) -> tuple:
        return tuple(r[j] for r in self.entries)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "RingMatrix":
        return RingMatrix([[self.entries[i][j] for j in cols] for i in rows], self.zero,
                          (len(rows), len(cols)))

    def slice(self, r0: int, r1: int, c0: int, c1: int) -> "RingMatrix":
        return self.submatrix(range(r0, r1), range(c0, c1))

    def to_lists(self) -> list:
        return [list(r) for r in self.entries]

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_zero(self) -> bool:
        return all(not x for r in self.entries for x in r)

    def nonzero_positions(self) -> List[Tuple[int, int]]:
        return [(i, j) for i, r in enumerate(self.entries) for j, x in enumerate(r) if x]

    # -- arithmetic ---------------------------------------------------------

    def map(self, f: Callable, zero=None) -> "RingMatrix":
        zero = f(self.zero) if zero is None else zero
        return RingMatrix([[f(x) for x in r] for r in self.entries], zero, self.shape)

    def transpose(self) -> "RingMatrix":
        return RingMatrix([list(c) for c in zip(*self.entries)] if self.rows else
                          [[] for _ in range(self.cols)], self.zero, (self.cols, self.rows))

    def _same_shape(self, other: "RingMatrix") -> None:
        if self.shape != other.shape:
            raise ShapeError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other: "RingMatrix") -> "RingMatrix":
        self._same_shape(other)
        return RingMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)],
                          self.zero, self.shape)

    def __sub__(self, other: "RingMatrix") -> "RingMatrix":
        self._same_shape(other)
        return RingMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)],
                          self.zero, self.shape)

    def __neg__(self) -> "RingMatrix":
        return RingMatrix([[-a for a in r] for r in self.entries], self.zero, self.shape)

    def scale(self, c) -> "RingMatrix":
        return RingMatrix([[c * a for a in r] for r in self.entries], self.zero, self.shape)

    def __matmul__(self, other: "RingMatrix") -> "RingMatrix":
        if self.cols != other.rows:
            raise ShapeError(f"cannot multiply {self.shape} by {other.shape}")
        zero = self.zero
        cols = [other.col(j) for j in range(other.cols)]
        out = []
        for r in self.entries:
            row = []
            for c in cols:
                acc = zero
                for a, b in zip(r, c):
                    if a and b:
                        acc = acc + a * b
                row.append(acc)
            out.append(row)
        return RingMatrix(out, zero, (self.rows, other.cols))

    def __eq__(self, other) -> bool:
        if not isinstance(other, RingMatrix):
            return NotImplemented
        return self.shape == other.shape and all(
            a == b for r, s in zip(self.entries, other.entries) for a, b in zip(r, s))

    __hash__ = None

    def __repr__(self) -> str:
        body = "; ".join(", ".join(str(x) for x in r) for r in self.entries)
        return f"RingMatrix({self.rows}x{self.cols}: [{body}])"


def det_cofactor(M: RingMatrix):
    """Laplace expansion along the first row; division free, any commutative ring."""
    if not M.is_square():
        raise ShapeError("determinant of a non-square matrix")
    one = M.zero.one()

    def rec(rows: Tuple[int, ...], cols: Tuple[int, ...]):
        if not rows:
            return one
        i, rest = rows[0], rows[1:]
        acc = M.zero
        for pos, j in enumerate(cols):
            a = M.entries[i][j]
            if not a:
                continue
            minor = rec(rest, cols[:pos] + cols[pos + 1:])
            acc = acc + a * minor if pos % 2 == 0 else acc - a * minor
        return acc

    return rec(tuple(range(M.rows)), tuple(range(M.cols)))


def _bareiss_det(M: RingMatrix):
    n = M.rows
    one = M.zero.one()
    if n == 0:
        return one
    a = [list(r) for r in M.entries]
    sign = 1
    prev = one
    for k in range(n - 1):
        if not a[k][k]:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return M.zero
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                x = a[i][j] * a[k][k] - a[i][k] * a[k][j]
                a[i][j] = x if prev.is_one() else x.exact_div(prev)
        prev = a[k][k]
    d = a[n - 1][n - 1]
    return d if sign > 0 else -d


def clear_denominators(M: RingMatrix) -> Tuple[RingMatrix, GroupRingElement]:
    """Write a localized matrix as ``M' / D`` with ``M'`` over the group ring.

    ``D`` is the product of the distinct denominators, so it is again of the
    form ``1 + mu``.
    """
    dens: List[GroupRingElement] = []
    for r in M.entries:
        for x in r:
            if not x.den.is_one() and all(x.den != d for d in dens):
                dens.append(x.den)
    one = M.zero.num.one()
    D = one
    for d in dens:
        D = D * d

    def cleared(x: LocalizedElement) -> GroupRingElement:
        if not x.num:
            return x.num
        f = one
        skipped = False
        for d in dens:
            if not skipped and d == x.den:
                skipped = True
                continue
            f = f * d
        if not skipped and not x.den.is_one():
            raise AssertionError("denominator missing from the common product")
        return x.num * f

    return M.map(cleared, zero=one.zero()), D


def det(M: RingMatrix):
    """Exact determinant.

    Group ring entries use fraction-free Bareiss elimination; localized
    entries are first cleared to a common denominator; other rings fall
    back to cofactor expansion.
    """
    if not M.is_square():
        raise ShapeError(f"determinant of a non-square {M.rows}x{M.cols} matrix")
    z = M.zero
    if isinstance(z, GroupRingElement):
        return _bareiss_det(M)
    if isinstance(z, LocalizedElement):
        N, D = clear_denominators(M)
        return LocalizedElement(_bareiss_det(N), D ** M.rows)
    return det_cofactor(M)


def berkowitz(M: RingMatrix) -> list:
    """Coefficients ``[1, c1, ..., cn]`` of ``det(x*I - M)``, division free."""
    if not M.is_square():
        raise ShapeError("characteristic polynomial of a non-square matrix")
    n = M.rows
    one, zero = M.zero.one(), M.zero
    vec = [one]
    a = M.entries
    for r in range(n):
        # first column of the Toeplitz factor: 1, -a_rr, -R C, -R A C, ...
        col = [one, -a[r][r]]
        v = [a[i][r] for i in range(r)]
        for _ in range(r):
            col.append(-sum((a[r][i] * v[i] for i in range(r) if a[r][i] and v[i]), zero))
            v = [sum((a[i][j] * v[j] for j in range(r) if a[i][j] and v[j]), zero) for i in range(r)]
        new = []
        for i in range(r + 2):
            acc = zero
            for j in range(min(i, r) + 1):
                if col[i - j] and vec[j]:
                    acc = acc + col[i - j] * vec[j]
            new.append(acc)
        vec = new
    return vec


def adjugate_and_det(M: RingMatrix) -> Tuple[RingMatrix, object]:
    """``(adj M, det M)`` via Cayley-Hamilton on the Berkowitz polynomial."""
    n = M.rows
    coeffs = berkowitz(M)
    d = coeffs[n] if n % 2 == 0 else -coeffs[n]
    if n == 0:
        return RingMatrix.zeros(0, 0, M.zero), d
    I = RingMatrix.identity(n, M.zero)
    B = I
    for i in range(1, n):
        B = (M @ B) + I.scale(coeffs[i])
    adj = B if n % 2 == 1 else -B
    return adj, d


def eliminate(M: RingMatrix, rng: Optional[random.Random] = None) -> Tuple[List[int], List[int]]:
    """Fraction-free row echelon reduction over the group ring.

    Returns ``(pivot_rows, pivot_cols)`` as indices into ``M``; the pivot rows
    restricted to the pivot columns form a nonsingular minor and their count is
    the rank over the field of fractions.  With ``rng`` the pivot row is drawn
    at random among the admissible ones.
    """
    a = [list(r) for r in M.entries]
    perm = list(range(M.rows))
    one = M.zero.one()
    prev = one
    r = 0
    pivot_cols = []
    for c in range(M.cols):
        if r >= M.rows:
            break
        cands = [i for i in range(r, M.rows) if a[i][c]]
        if not cands:
            continue
        p = rng.choice(cands) if rng is not None else cands[0]
        a[r], a[p] = a[p], a[r]
        perm[r], perm[p] = perm[p], perm[r]
        piv = a[r][c]
        for i in range(r + 1, M.rows):
            f = a[i][c]
            for j in range(c + 1, M.cols):
                x = a[i][j] * piv - f * a[r][j]
                a[i][j] = x if prev.is_one() else x.exact_div(prev)
            a[i][c] = M.zero
        prev = piv
        pivot_cols.append(c)
        r += 1
    return perm[:r], pivot_cols


# -- modular specialization ----------------------------------------------------
#
# Evaluating every group generator at a random residue mod a large prime is a
# ring map, so a minor that is nonzero after specialization is nonzero over the
# field of fractions.  Ranks computed this way are lower bounds; callers only
# trust them when that is enough to decide the question exactly.

PRIME = (1 << 61) - 1


def _eval(x: GroupRingElement, point: Sequence[int]) -> int:
    acc = 0
    for g, c in x._terms.items():
        if isinstance(c, int):
            v = c % PRIME
        else:
            v = c.numerator * pow(c.denominator, -1, PRIME) % PRIME
        for base, e in zip(point, g):
            if e:
                v = v * pow(base, e, PRIME) % PRIME
        acc += v
    return acc % PRIME


def specialize(M: RingMatrix, point: Sequence[int]) -> Optional[List[List[int]]]:
    """Entries evaluated at ``point`` mod ``PRIME``; None if a denominator vanishes."""
    out = []
    for r in M.entries:
        row = []
        for x in r:
            if isinstance(x, LocalizedElement):
                if not x.num:
                    row.append(0)
                    continue
                d = _eval(x.den, point)
                if not d:
                    return None
                row.append(_eval(x.num, point) * pow(d, -1, PRIME) % PRIME)
            else:
                row.append(_eval(x, point) if x else 0)
        out.append(row)
    return out


def _mod_pivots(a: List[List[int]], ncols: int, rng: Optional[random.Random]) -> Tuple[List[int], List[int]]:
    a = [list(r) for r in a]
    perm = list(range(len(a)))
    r = 0
    pivot_cols = []
    for c in range(ncols):
        if r >= len(a):
            break
        cands = [i for i in range(r, len(a)) if a[i][c]]
        if not cands:
            continue
        p = rng.choice(cands) if rng is not None else cands[0]
        a[r], a[p] = a[p], a[r]
        perm[r], perm[p] = perm[p], perm[r]
        inv = pow(a[r][c], -1, PRIME)
        for i in range(r + 1, len(a)):
            f = a[i][c] * inv % PRIME
            if f:
                a[i] = [(x - f * y) % PRIME for x, y in zip(a[i], a[r])]
        pivot_cols.append(c)
        r += 1
    return perm[:r], pivot_cols


def _entry_h_rank(M: RingMatrix) -> int:
    z = M.zero
    return z.num.h_rank if isinstance(z, LocalizedElement) else z.h_rank


def modular_pivots(M: RingMatrix, rng: Optional[random.Random] = None,
                   seed: int = 0x5EED, tries: int = 4) -> Tuple[List[int], List[int]]:
    """Pivots of a specialization of ``M``.

    The returned minor is nonsingular over the field of fractions; its size
    is a lower bound for the rank (equal to it with overwhelming probability).
    """
    gen = random.Random(seed)
    n = _entry_h_rank(M) + 1
    for _ in range(tries):
        point = [gen.randrange(2, PRIME - 1) for _ in range(n)]
        a = specialize(M, point)
        if a is not None:
            return _mod_pivots(a, M.cols, rng)
    return [], []


def rank_lower_bound(M: RingMatrix) -> int:
    if not (M.rows and M.cols) or isinstance(M.zero, NovikovSeries):
        return 0
    return len(modular_pivots(M)[0])


def as_group_ring_matrix(M: RingMatrix) -> RingMatrix:
    """Localized entries cleared row by row; others unchanged.

    Scaling a row by a nonzero element changes neither the rank nor which
    minors are nonsingular.
    """
    if not isinstance(M.zero, LocalizedElement):
        return M
    rows = [clear_denominators(RingMatrix([r], M.zero, (1, M.cols)))[0].entries[0] for r in M.entries]
    return RingMatrix(rows, M.zero.num, M.shape)


def rank(M: RingMatrix) -> int:
    """Rank over the field of fractions of the entry ring."""
    if not (M.rows and M.cols):
        return 0
    lower = rank_lower_bound(M)
    if lower == min(M.rows, M.cols):
        return lower
    return len(eliminate(as_group_ring_matrix(M))[0])


def snf(M) -> Tuple[List[int], int]:
    """Smith normal form of an integer matrix.

    Accepts a list of lists of ints or a :class:`RingMatrix` of constants.
    Returns the ``min(rows, cols)`` diagonal entries (nonnegative, each
    dividing the next, zeros last) and the rank.
    """
    a = _int_rows(M)
    m = len(a)
    n = len(a[0]) if m else (M.cols if isinstance(M, RingMatrix) else 0)
    for t in range(min(m, n)):
        while True:
            nz = [(abs(a[i][j]), i, j) for i in range(t, m) for j in range(t, n) if a[i][j]]
            if not nz:
                break
            _, pi, pj = min(nz)
            a[t], a[pi] = a[pi], a[t]
            for row in a:
                row[t], row[pj] = row[pj], row[t]
            p = a[t][t]
            dirty = False
            for i in range(t + 1, m):
                q = a[i][t] // p
                if q:
                    a[i] = [x - q * y for x, y in zip(a[i], a[t])]
                dirty |= a[i][t] != 0
            for j in range(t + 1, n):
                q = a[t][j] // p
                if q:
                    for row in a:
                        row[j] -= q * row[t]
                dirty |= a[t][j] != 0
            if dirty:
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if a[i][j] % p), None)
            if bad is None:
                break
            a[t] = [x + y for x, y in zip(a[t], a[bad[0]])]
        if t < m and t < n:
            a[t][t] = abs(a[t][t])
    diag = [a[i][i] for i in range(min(m, n))]
    return diag, sum(1 for d in diag if d)


def _int_rows(M) -> List[List[int]]:
    if isinstance(M, RingMatrix):
        return [[_as_int(x) for x in r] for r in M.entries]
    return [[int(x) for x in r] for r in M]


def _as_int(x) -> int:
    if isinstance(x, int):
        return x
    if isinstance(x, GroupRingElement):
        if x.is_zero():
            return 0
        m = x.as_monomial()
        if m is None or any(m[1]):
            raise ValueError(f"{x} is not an integer constant")
        return int(m[0])
    raise TypeError(f"cannot read {x!r} as an integer")


def resolvent_series(A: RingMatrix, order: int) -> RingMatrix:
    """``sum_{k=0..order} A^k t^k`` entrywise, as truncated series."""
    if not A.is_square():
        raise ShapeError("resolvent of a non-square matrix")
    z = A.zero
    n = A.rows
    fast = _resolvent_series_packed(A, order) if order >= 0 else None
    if fast is not None:
        return fast
    theta = GroupRingElement.theta(z.h_rank, rational=z.rational)
    acc = RingMatrix.identity(n, z)
    power = RingMatrix.identity(n, z)
    tA = A.scale(theta)
    for _ in range(order):
        power = tA @ power
        power = power.map(lambda x: NovikovSeries(x, order).poly, zero=z)
        acc = acc + power
    zs = NovikovSeries(z, order)
    return acc.map(lambda x: NovikovSeries(x, order), zero=zs)


def _resolvent_series_packed(A: RingMatrix, order: int) -> Optional[RingMatrix]:
    """Matrix-power iteration on packed keys; ``None`` outside ``Z[H]`` entries."""
    z = A.zero
    entries = [x for row in A.entries for x in row]
    if not isinstance(z, GroupRingElement) or not all(x.in_zh() for x in entries):
        return None
    n = A.rows
    bound = (order + 1) * (1 + max((_max_exponent(x._terms) for x in entries), default=0))
    codec = _Packing(z.h_rank + 1, bound)
    shift = (1,) + (0,) * z.h_rank
    tA = [[codec.pack(x.shift(shift)._terms) for x in row] for row in A.entries]
    one = codec.pack(z.one()._terms)
    power = [[dict(one) if i == j else {} for j in range(n)] for i in range(n)]
    acc = [[dict(one) if i == j else {} for j in range(n)] for i in range(n)]
    for _ in range(order):
        nxt = []
        for i in range(n):
            row = []
            for j in range(n):
                cell: dict = {}
                for m in range(n):
                    if tA[i][m] and power[m][j]:
                        # entries of (tA)^k all have t-exponent k <= order, so nothing to cut
                        codec.addmul(cell, tA[i][m], power[m][j])
                row.append({k: c for k, c in cell.items() if c})
            nxt.append(row)
        power = nxt
        for i in range(n):
            for j in range(n):
                cell = acc[i][j]
                for k, c in power[i][j].items():
                    cell[k] = cell.get(k, 0) + c
    zs = NovikovSeries(z, order)
    rows = [[NovikovSeries(GroupRingElement._raw(codec.unpack(acc[i][j]), z.h_rank, z.rational), order)
             for j in range(n)] for i in range(n)]
    return RingMatrix(rows, zs, (n, n))


def resolvent_rational(A: RingMatrix) -> RingMatrix:
    """``(1 - A t)^{-1} = adj(1 - A t) / det(1 - A t)`` over the localized ring."""
    if not A.is_square():
        raise ShapeError("resolvent of a non-square matrix")
    z = A.zero
    theta = GroupRingElement.theta(z.h_rank, rational=z.rational)
    M = RingMatrix.identity(A.rows, z) - A.scale(theta)
    adj, d = adjugate_and_det(M)
    lz = LocalizedElement(z, z.one())
    return adj.map(lambda x: LocalizedElement(x, d), zero=lz)


def to_localized(M: RingMatrix) -> RingMatrix:
    z = M.zero
    if isinstance(z, LocalizedElement):
        return M
    one = z.one()
    return M.map(lambda x: LocalizedElement(x, one), zero=LocalizedElement(z, one))


def expand_matrix(M: RingMatrix, order: int) -> RingMatrix:
    """Entrywise series expansion of a localized (or group ring) matrix."""
    flat = expand_many([x for row in M.entries for x in row], order)
    zs = NovikovSeries(M.zero.num if isinstance(M.zero, LocalizedElement) else M.zero, order)
    return RingMatrix([flat[i * M.cols:(i + 1) * M.cols] for i in range(M.rows)], zs, M.shape)
