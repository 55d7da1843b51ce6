"""Exact arithmetic in the group ring of G = H x <t>.

Group elements are integer tuples ``(theta_exp, h_1, ..., h_n)``.  The grading
homomorphism is ``xi(g) = -theta_exp``, so multiplying by ``t`` lowers the
level by one and a series "in t" is a Novikov series for ``xi``.

Four value types live here:

* :class:`GroupRingElement` -- finite Z- or Q-linear combinations of group
  elements (the Laurent polynomial ring ``Z[t, t^-1, h_i, h_i^-1]``).
* :class:`LocalizedElement` -- fractions ``num / (1 + mu)`` where every term of
  ``mu`` has ``theta_exp >= 1``.
* :class:`NovikovSeries` -- truncations of series whose support is bounded
  below in ``theta_exp``.
* :class:`K1Class` -- nonzero fractions modulo the monomial units ``+-g``.

All values are immutable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Iterator, Mapping, Optional, Tuple, Union

GroupElem = Tuple[int, ...]
Coeff = Union[int, Fraction]


class AlgebraError(Exception):
    pass


class CoefficientMismatch(AlgebraError, TypeError):
    """Operands live over different coefficient rings or different groups."""


class NotLocalizable(AlgebraError, ValueError):
    """The denominator is not a monomial unit times ``1 + (t-divisible)``."""


class NotAUnit(AlgebraError, ValueError):
    pass


class NotDivisible(AlgebraError, ArithmeticError):
    pass


class SeriesDomainError(AlgebraError, ValueError):
    """exp/log called on a series with the wrong constant term."""


class ParseError(AlgebraError, ValueError):
    pass


@dataclass(frozen=True)
class GradedGroup:
    """The free abelian group ``H x <t>`` with ``rank H = h_rank``."""

    h_rank: int

    def identity(self) -> GroupElem:
        return (0,) * (self.h_rank + 1)

    def element(self, theta_exp: int = 0, h_part: Iterable[int] = ()) -> GroupElem:
        h = tuple(int(x) for x in h_part)
        if not h:
            h = (0,) * self.h_rank
        if len(h) != self.h_rank:
            raise ValueError(f"h_part must have length {self.h_rank}, got {len(h)}")
        return (int(theta_exp),) + h

    def theta(self) -> GroupElem:
        return self.element(1)

    def contains(self, g: GroupElem) -> bool:
        return len(g) == self.h_rank + 1 and all(isinstance(x, int) for x in g)

    @staticmethod
    def mul(a: GroupElem, b: GroupElem) -> GroupElem:
        return tuple(x + y for x, y in zip(a, b))

    @staticmethod
    def inv(a: GroupElem) -> GroupElem:
        return tuple(-x for x in a)

    @staticmethod
    def xi(g: GroupElem) -> int:
        return -g[0]


_PACKED_MAX_STEPS = 10_000


class _Packing:
    """Group elements of length ``n`` packed into single ints.

    Each exponent sits in a fixed-width field with an offset, wide enough
    for exponents of absolute value up to ``bound``.  Keys carry the offset
    once per field, so the product key of ``ka`` and ``kb`` is
    ``ka + kb - base``.  Callers choose ``bound`` so that every exponent
    they produce fits; :meth:`pack` checks the inputs.
    """

    def __init__(self, n: int, bound: int):
        self.bound = bound
        bits = (2 * bound + 1).bit_length() + 1
        self.offset = 1 << (bits - 1)
        self.shifts = [bits * i for i in range(n)]
        self.base = sum(self.offset << s for s in self.shifts)
        self.mask = (1 << bits) - 1

    def pack(self, terms: Mapping[GroupElem, Coeff]) -> Optional[Dict[int, Coeff]]:
        out = {}
        bound, off = self.bound, self.offset
        for g, c in terms.items():
            key = 0
            for e, s in zip(g, self.shifts):
                if not -bound <= e <= bound:
                    return None
                key += (e + off) << s
            out[key] = c
        return out

    def unpack(self, packed: Mapping[int, Coeff], theta: int = 0) -> Dict[GroupElem, Coeff]:
        """Terms of ``packed``, with ``theta`` added to the first exponent."""
        mask, off, shifts = self.mask, self.offset, self.shifts[1:]
        return {(((k & mask) - off + theta),) + tuple(((k >> s) & mask) - off for s in shifts): c
                for k, c in packed.items() if c}

    def addmul(self, acc: Dict[int, Coeff], a: Mapping[int, Coeff], b: Mapping[int, Coeff],
               sign: int = 1) -> None:
        """``acc += sign * a * b`` in place."""
        base, get = self.base, acc.get
        if len(a) > len(b):
            a, b = b, a
        for ka, ca in a.items():
            ka -= base
            ca *= sign
            for kb, cb in b.items():
                k = ka + kb
                acc[k] = get(k, 0) + ca * cb

    def addmul_cut(self, acc: Dict[int, Coeff], a: Mapping[int, Coeff], b: Mapping[int, Coeff],
                   max_first: int) -> None:
        """``acc += a * b`` keeping only terms whose first exponent is at most ``max_first``."""
        base, get, mask = self.base, acc.get, self.mask
        cut = max_first + self.offset
        for ka, ca in a.items():
            ka -= base
            for kb, cb in b.items():
                k = ka + kb
                if (k & mask) <= cut:
                    acc[k] = get(k, 0) + ca * cb


def _max_exponent(terms: Iterable[GroupElem], skip_first: bool = False) -> int:
    return max((abs(e) for g in terms for e in (g[1:] if skip_first else g)), default=0)


def _gmul(a: GroupElem, b: GroupElem) -> GroupElem:
    return tuple(x + y for x, y in zip(a, b))


def _gdiv(a: GroupElem, b: GroupElem) -> GroupElem:
    return tuple(x - y for x, y in zip(a, b))


def _coerce_coeff(c, rational: bool) -> Coeff:
    if rational:
        return Fraction(c)
    if isinstance(c, Fraction):
        if c.denominator != 1:
            raise CoefficientMismatch(f"non-integral coefficient {c} in an integer group ring")
        return int(c.numerator)
    if isinstance(c, bool) or not isinstance(c, int):
        raise CoefficientMismatch(f"coefficient {c!r} is not an integer")
    return c


class GroupRingElement:
    """A finite linear combination of group elements.

    ``rational`` selects Q coefficients (stored as :class:`Fraction`); the
    default is Z.  Zero coefficients are never stored, so ``==`` is structural
    equality.
    """

    __slots__ = ("h_rank", "rational", "_terms")

    def __init__(self, terms: Optional[Mapping[GroupElem, Coeff]] = None, h_rank: int = 0,
                 rational: bool = False):
        self.h_rank = h_rank
        self.rational = rational
        clean: Dict[GroupElem, Coeff] = {}
        for g, c in (terms or {}).items():
            g = tuple(int(x) for x in g)
            if len(g) != h_rank + 1:
                raise CoefficientMismatch(f"group element {g} does not belong to H x <t> with rank H = {h_rank}")
            c = _coerce_coeff(c, rational)
            s = clean.get(g, 0) + c
            if s:
                clean[g] = s
            else:
                clean.pop(g, None)
        self._terms = clean

    @classmethod
    def _raw(cls, terms: Dict[GroupElem, Coeff], h_rank: int, rational: bool) -> "GroupRingElement":
        obj = cls.__new__(cls)
        obj.h_rank = h_rank
        obj.rational = rational
        obj._terms = terms
        return obj

    # -- constructors -------------------------------------------------------

    @classmethod
    def constant(cls, c: Coeff, h_rank: int = 0, rational: bool = False) -> "GroupRingElement":
        return cls({(0,) * (h_rank + 1): c}, h_rank, rational)

    @classmethod
    def monomial(cls, g: GroupElem, c: Coeff = 1, h_rank: Optional[int] = None,
                 rational: bool = False) -> "GroupRingElement":
        return cls({tuple(g): c}, len(g) - 1 if h_rank is None else h_rank, rational)

    @classmethod
    def theta(cls, h_rank: int = 0, power: int = 1, rational: bool = False) -> "GroupRingElement":
        return cls({(power,) + (0,) * h_rank: 1}, h_rank, rational)

    def zero(self) -> "GroupRingElement":
        return GroupRingElement._raw({}, self.h_rank, self.rational)

    def one(self) -> "GroupRingElement":
        return GroupRingElement._raw({(0,) * (self.h_rank + 1): Fraction(1) if self.rational else 1},
                                     self.h_rank, self.rational)

    def like(self, c: Coeff) -> "GroupRingElement":
        """The constant ``c`` in this element's ring."""
        return GroupRingElement.constant(c, self.h_rank, self.rational)

    # -- inspection ---------------------------------------------------------

    @property
    def terms(self) -> Dict[GroupElem, Coeff]:
        return dict(self._terms)

    def items(self) -> list:
        """Terms in canonical (lexicographic) order."""
        return sorted(self._terms.items())

    def __iter__(self) -> Iterator[Tuple[GroupElem, Coeff]]:
        return iter(self.items())

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_one(self) -> bool:
        return len(self._terms) == 1 and self._terms.get((0,) * (self.h_rank + 1)) == 1

    def coefficient(self, g: GroupElem) -> Coeff:
        return self._terms.get(tuple(g), 0)

    def as_monomial(self) -> Optional[Tuple[Coeff, GroupElem]]:
        if len(self._terms) != 1:
            return None
        (g, c), = self._terms.items()
        return c, g

    def is_unit_monomial(self) -> bool:
        m = self.as_monomial()
        return m is not None and abs(m[0]) == 1

    def min_theta(self) -> Optional[int]:
        return min((g[0] for g in self._terms), default=None)

    def max_theta(self) -> Optional[int]:
        return max((g[0] for g in self._terms), default=None)

    def xi_support(self) -> set:
        return {-g[0] for g in self._terms}

    def leading_term(self) -> Tuple[GroupElem, Coeff]:
        """Lexicographically largest term."""
        g = max(self._terms)
        return g, self._terms[g]

    def xi_top_part(self) -> "GroupRingElement":
        """Sum of the terms of largest xi (smallest ``theta_exp``)."""
        if not self._terms:
            return self
        m = self.min_theta()
        return GroupRingElement._raw({g: c for g, c in self._terms.items() if g[0] == m},
                                     self.h_rank, self.rational)

    def theta_slices(self) -> Dict[int, "GroupRingElement"]:
        """Split into ``{k: coefficient of t^k}`` with coefficients in Z[H]."""
        out: Dict[int, Dict[GroupElem, Coeff]] = {}
        for g, c in self._terms.items():
            out.setdefault(g[0], {})[(0,) + g[1:]] = c
        return {k: GroupRingElement._raw(v, self.h_rank, self.rational) for k, v in out.items()}

    def in_zh(self) -> bool:
        return all(g[0] == 0 for g in self._terms)

    def in_zh_theta(self) -> bool:
        return all(g[0] >= 0 for g in self._terms)

    # -- arithmetic ---------------------------------------------------------

    def _check(self, other: "GroupRingElement") -> None:
        if other.h_rank != self.h_rank:
            raise CoefficientMismatch(f"group ranks differ: {self.h_rank} vs {other.h_rank}")
        if other.rational != self.rational:
            raise CoefficientMismatch("mixing integer and rational coefficients")

    def _lift(self, other) -> "GroupRingElement":
        if isinstance(other, GroupRingElement):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.like(other)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for g, c in other._terms.items():
            s = out.get(g, 0) + c
            if s:
                out[g] = s
            else:
                del out[g]
        return GroupRingElement._raw(out, self.h_rank, self.rational)

    __radd__ = __add__

    def __neg__(self):
        return GroupRingElement._raw({g: -c for g, c in self._terms.items()}, self.h_rank, self.rational)

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        a, b = self._terms, other._terms
        if len(a) > len(b):
            a, b = b, a
        out: Dict[GroupElem, Coeff] = {}
        for ga, ca in a.items():
            for gb, cb in b.items():
                g = tuple(x + y for x, y in zip(ga, gb))
                s = out.get(g, 0) + ca * cb
                if s:
                    out[g] = s
                else:
                    del out[g]
        return GroupRingElement._raw(out, self.h_rank, self.rational)

    __rmul__ = __mul__

    def shift(self, g: GroupElem, c: Coeff = 1) -> "GroupRingElement":
        """Multiply by the monomial ``c * g``."""
        c = _coerce_coeff(c, self.rational)
        return GroupRingElement._raw({_gmul(h, g): c * v for h, v in self._terms.items()},
                                     self.h_rank, self.rational)

    def __pow__(self, n: int) -> "GroupRingElement":
        if n < 0:
            return self.monomial_inverse() ** (-n)
        result = self.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def monomial_inverse(self) -> "GroupRingElement":
        m = self.as_monomial()
        if m is None:
            raise NotAUnit(f"{self} is not a monomial")
        c, g = m
        if self.rational:
            inv_c = 1 / Fraction(c)
        elif abs(c) == 1:
            inv_c = c
        else:
            raise NotAUnit(f"{self} is not a unit of the integral group ring")
        return GroupRingElement._raw({_gdiv((0,) * len(g), g): inv_c}, self.h_rank, self.rational)

    def exact_div(self, other: "GroupRingElement") -> "GroupRingElement":
        """Return ``q`` with ``q * other == self`` or raise :class:`NotDivisible`.

        Lexicographic long division.  Every quotient exponent is confined to
        the box between the coordinatewise minima and maxima forced by the
        degrees of ``self`` and ``other``, which bounds the loop.
        """
        other = self._lift(other)
        if not other._terms:
            raise ZeroDivisionError("division by zero in the group ring")
        if not self._terms:
            return self.zero()
        m = other.as_monomial()
        if m is not None:
            c, g = m
            inv_g = _gdiv((0,) * len(g), g)
            out = {}
            for h, v in self._terms.items():
                if self.rational:
                    out[_gmul(h, inv_g)] = v / c
                else:
                    if v % c:
                        raise NotDivisible(f"{self} is not divisible by {other}")
                    out[_gmul(h, inv_g)] = v // c
            return GroupRingElement._raw(out, self.h_rank, self.rational)
        dim = self.h_rank + 1
        lo = [min(g[i] for g in self._terms) - min(g[i] for g in other._terms) for i in range(dim)]
        hi = [max(g[i] for g in self._terms) - max(g[i] for g in other._terms) for i in range(dim)]
        if any(l > h for l, h in zip(lo, hi)):
            raise NotDivisible(f"{self} is not divisible by {other}")
        gb, cb = other.leading_term()
        rem = dict(self._terms)
        quot: Dict[GroupElem, Coeff] = {}
        while rem:
            gr = max(rem)
            cr = rem[gr]
            g = _gdiv(gr, gb)
            if any(not (l <= x <= h) for l, x, h in zip(lo, g, hi)):
                raise NotDivisible(f"{self} is not divisible by {other}")
            if self.rational:
                c = cr / cb
            else:
                if cr % cb:
                    raise NotDivisible(f"{self} is not divisible by {other}")
                c = cr // cb
            quot[g] = c
            for h, v in other._terms.items():
                k = _gmul(g, h)
                s = rem.get(k, 0) - c * v
                if s:
                    rem[k] = s
                else:
                    rem.pop(k, None)
        return GroupRingElement._raw(quot, self.h_rank, self.rational)

    def to_rational(self) -> "GroupRingElement":
        if self.rational:
            return self
        return GroupRingElement._raw({g: Fraction(c) for g, c in self._terms.items()}, self.h_rank, True)

    def to_integer(self) -> "GroupRingElement":
        if not self.rational:
            return self
        return GroupRingElement(self._terms, self.h_rank, False)

    # -- comparison ---------------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            other = self.like(other)
        if not isinstance(other, GroupRingElement):
            return NotImplemented
        return (self.h_rank == other.h_rank and self.rational == other.rational
                and self._terms == other._terms)

    def __hash__(self) -> int:
        return hash((self.h_rank, self.rational, frozenset(self._terms.items())))

    def __str__(self) -> str:
        return render_element(self)

    def __repr__(self) -> str:
        return f"GroupRingElement({render_element(self)!r}, h_rank={self.h_rank}" + (
            ", rational=True)" if self.rational else ")")


# ---------------------------------------------------------------------------
# text form


def _render_term(g: GroupElem, c: Coeff) -> str:
    factors = []
    if g[0]:
        factors.append("t" if g[0] == 1 else f"t^{g[0]}")
    for i, a in enumerate(g[1:], start=1):
        if a:
            factors.append(f"h{i}" if a == 1 else f"h{i}^{a}")
    if not factors:
        return str(c)
    mono = "*".join(factors)
    if c == 1:
        return mono
    if c == -1:
        return "-" + mono
    return f"{c}*{mono}"


def render_element(x: GroupRingElement) -> str:
    """Render as ``c*t^k*h1^a1...``, terms in canonical order."""
    if not x._terms:
        return "0"
    out = ""
    for g, c in x.items():
        s = _render_term(g, c)
        if not out:
            out = s
        elif s.startswith("-"):
            out += " - " + s[1:]
        else:
            out += " + " + s
    return out


_TOKEN = re.compile(r"\s*(?:(\d+)|(t|h\d+)|(\^)|([-+*/()]))")


def _tokenize(text: str) -> list:
    pos, toks = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r} at offset {pos} in {text!r}")
        num, var, caret, op = m.groups()
        if num is not None:
            toks.append(("num", int(num)))
        elif var is not None:
            toks.append(("var", var))
        elif caret is not None:
            toks.append(("op", "^"))
        else:
            toks.append(("op", op))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return toks


class _Parser:
    def __init__(self, text: str, h_rank: int, rational: bool):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.h_rank = h_rank
        self.rational = rational

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind) or (value and tok[1] != value):
            raise ParseError(f"expected {value or kind} at token {self.i} in {self.text!r}")
        self.i += 1
        return tok

    def done(self) -> bool:
        return self.i >= len(self.toks)

    def expr(self) -> GroupRingElement:
        total = GroupRingElement({}, self.h_rank, self.rational)
        sign = 1
        if self.peek() in (("op", "-"), ("op", "+")):
            sign = -1 if self.take()[1] == "-" else 1
        total = total + self.term() * sign
        while self.peek() in (("op", "-"), ("op", "+")):
            sign = -1 if self.take()[1] == "-" else 1
            total = total + self.term() * sign
        return total

    def exponent(self) -> int:
        if self.peek() != ("op", "^"):
            return 1
        self.take()
        paren = self.peek() == ("op", "(")
        if paren:
            self.take()
        sign = 1
        if self.peek() == ("op", "-"):
            self.take()
            sign = -1
        e = sign * self.take("num")[1]
        if paren:
            self.take("op", ")")
        return e

    def factor(self, coeff: Coeff, g: list) -> Coeff:
        kind, val = self.peek()
        if kind == "num":
            self.take()
            c: Coeff = val
            if self.peek() == ("op", "/") and self.i + 1 < len(self.toks) and self.toks[self.i + 1][0] == "num":
                self.take()
                c = Fraction(val, self.take("num")[1])
            return coeff * c
        if kind == "var":
            self.take()
            e = self.exponent()
            if val == "t":
                g[0] += e
            else:
                idx = int(val[1:])
                if not 1 <= idx <= self.h_rank:
                    raise ParseError(f"variable {val} out of range for h_rank={self.h_rank} in {self.text!r}")
                g[idx] += e
            return coeff
        raise ParseError(f"expected a coefficient or variable at token {self.i} in {self.text!r}")

    def term(self) -> GroupRingElement:
        g = [0] * (self.h_rank + 1)
        coeff = self.factor(1, g)
        while self.peek() == ("op", "*"):
            self.take()
            coeff = self.factor(coeff, g)
        if isinstance(coeff, Fraction) and coeff.denominator != 1 and not self.rational:
            raise ParseError(f"rational coefficient {coeff} in integer ring: {self.text!r}")
        return GroupRingElement({tuple(g): coeff}, self.h_rank, self.rational)


def parse_element(text: str, h_rank: int = 0, rational: bool = False) -> GroupRingElement:
    """Inverse of :func:`render_element`."""
    p = _Parser(str(text), h_rank, rational)
    if p.done():
        raise ParseError("empty ring element")
    x = p.expr()
    if not p.done():
        raise ParseError(f"trailing input at token {p.i} in {text!r}")
    return x


def parse_value(text: str, h_rank: int = 0, rational: bool = False):
    """Parse either a group ring element or a fraction ``(num)/(den)``."""
    text = str(text).strip()
    m = re.fullmatch(r"\((.*)\)\s*/\s*\((.*)\)", text)
    if m and _balanced(m.group(1)) and _balanced(m.group(2)):
        return loc_normalize(parse_element(m.group(1), h_rank, rational),
                             parse_element(m.group(2), h_rank, rational))
    return parse_element(text, h_rank, rational)


def _balanced(s: str) -> bool:
    depth = 0
    for ch in s:
        depth += ch == "("
        depth -= ch == ")"
        if depth < 0:
            return False
    return depth == 0


# ---------------------------------------------------------------------------
# Novikov series


# precision assigned to exact polynomials when they meet a truncated series
_EXACT_ORDER = 10 ** 9


class NovikovSeries:
    """A series known exactly for ``theta_exp <= order``; higher terms unknown.

    Multiplication tracks precision: if ``a`` is exact to order ``Na`` and has
    lowest power ``va`` then ``a * b`` is exact to ``min(Na + vb, Nb + va)``.
    """

    __slots__ = ("poly", "order")

    def __init__(self, poly: GroupRingElement, order: int):
        self.order = int(order)
        if poly.max_theta() is not None and poly.max_theta() > order:
            poly = GroupRingElement._raw({g: c for g, c in poly._terms.items() if g[0] <= order},
                                         poly.h_rank, poly.rational)
        self.poly = poly

    @classmethod
    def from_element(cls, x: GroupRingElement, order: int) -> "NovikovSeries":
        return cls(x, order)

    @classmethod
    def from_slices(cls, slices: Mapping[int, GroupRingElement], order: int, h_rank: int,
                    rational: bool) -> "NovikovSeries":
        out: Dict[GroupElem, Coeff] = {}
        for k, s in slices.items():
            if k > order:
                continue
            for g, c in s._terms.items():
                out[(g[0] + k,) + g[1:]] = c
        return cls(GroupRingElement._raw(out, h_rank, rational), order)

    @property
    def h_rank(self) -> int:
        return self.poly.h_rank

    @property
    def rational(self) -> bool:
        return self.poly.rational

    def zero(self) -> "NovikovSeries":
        return NovikovSeries(self.poly.zero(), self.order)

    def one(self) -> "NovikovSeries":
        return NovikovSeries(self.poly.one(), self.order)

    def valuation(self) -> int:
        v = self.poly.min_theta()
        return self.order + 1 if v is None else v

    def coefficient(self, k: int) -> GroupRingElement:
        """Coefficient of ``t^k`` as an element of Z[H] (or Q[H])."""
        if k > self.order:
            raise ValueError(f"coefficient of t^{k} is beyond the known order {self.order}")
        return GroupRingElement._raw({(0,) + g[1:]: c for g, c in self.poly._terms.items() if g[0] == k},
                                     self.h_rank, self.rational)

    def coefficients(self, start: int = 0) -> list:
        return [self.coefficient(k) for k in range(start, self.order + 1)]

    def truncate(self, order: int) -> "NovikovSeries":
        if order > self.order:
            raise ValueError(f"cannot raise precision from {self.order} to {order}")
        return NovikovSeries(self.poly, order)

    def to_rational(self) -> "NovikovSeries":
        return NovikovSeries(self.poly.to_rational(), self.order)

    def _lift(self, other) -> "NovikovSeries":
        if isinstance(other, NovikovSeries):
            self.poly._check(other.poly)
            return other
        if isinstance(other, GroupRingElement):
            self.poly._check(other)
            return NovikovSeries(other, _EXACT_ORDER)
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return NovikovSeries(self.poly.like(other), _EXACT_ORDER)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return NovikovSeries(self.poly + other.poly, min(self.order, other.order))

    __radd__ = __add__

    def __neg__(self):
        return NovikovSeries(-self.poly, self.order)

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return NovikovSeries(self.poly - other.poly, min(self.order, other.order))

    def __rsub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        order = min(self.order + other.valuation(), other.order + self.valuation())
        return NovikovSeries(_truncated_mul(self.poly, other.poly, order), order)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, NovikovSeries):
            return NotImplemented
        return self.order == other.order and self.poly == other.poly

    __hash__ = None

    def agrees_with(self, other: "NovikovSeries", order: Optional[int] = None) -> bool:
        """Compare up to ``order`` (default: the common precision)."""
        n = min(self.order, other.order) if order is None else order
        return self.truncate(n) == other.truncate(n)

    def exp(self) -> "NovikovSeries":
        return series_exp_log(self, "exp")

    def log(self) -> "NovikovSeries":
        return series_exp_log(self, "log")

    def is_integral(self) -> bool:
        return all(not isinstance(c, Fraction) or c.denominator == 1 for c in self.poly._terms.values())

    def __str__(self) -> str:
        head = render_element(self.poly)
        return f"{head} + O(t^{self.order + 1})"

    __repr__ = __str__


def _truncated_mul(a: GroupRingElement, b: GroupRingElement, order: int) -> GroupRingElement:
    out: Dict[GroupElem, Coeff] = {}
    bt = list(b._terms.items())
    for ga, ca in a._terms.items():
        room = order - ga[0]
        for gb, cb in bt:
            if gb[0] > room:
                continue
            g = tuple(x + y for x, y in zip(ga, gb))
            s = out.get(g, 0) + ca * cb
            if s:
                out[g] = s
            else:
                del out[g]
    return GroupRingElement._raw(out, a.h_rank, a.rational)


def series_exp_log(s: NovikovSeries, direction: str) -> NovikovSeries:
    """Truncated exponential or logarithm of a rational series in ``t``.

    ``exp`` needs every term at ``t^k`` with ``k >= 1``; ``log`` needs the
    series to be ``1 + (terms with k >= 1)``.  Both are computed slice by
    slice from the differential equations ``E' = s' E`` and ``s L' = s'``.
    """
    if not s.rational:
        raise CoefficientMismatch("exp/log require rational coefficients")
    n = s.order
    one = s.poly.one()
    zero = s.poly.zero()
    slices = s.poly.theta_slices()
    if any(k < 0 for k in slices):
        raise SeriesDomainError("series has negative powers of t")
    if direction == "exp":
        if slices.get(0, zero):
            raise SeriesDomainError("exp requires zero constant term")
        e = [one]
        for k in range(1, n + 1):
            acc = zero
            for j in range(1, k + 1):
                sj = slices.get(j)
                if sj is not None:
                    acc = acc + sj * e[k - j] * j
            e.append(acc * Fraction(1, k))
        return NovikovSeries.from_slices(dict(enumerate(e)), n, s.h_rank, True)
    if direction == "log":
        if slices.get(0, zero) != one:
            raise SeriesDomainError("log requires constant term 1")
        lg = [zero]
        for k in range(1, n + 1):
            acc = slices.get(k, zero) * k
            for j in range(1, k):
                uj = slices.get(k - j)
                if uj is not None and lg[j]:
                    acc = acc - lg[j] * uj * j
            lg.append(acc * Fraction(1, k))
        return NovikovSeries.from_slices(dict(enumerate(lg)), n, s.h_rank, True)
    raise ValueError(f"direction must be 'exp' or 'log', not {direction!r}")


# ---------------------------------------------------------------------------
# localization


def _is_normalized_den(den: GroupRingElement) -> bool:
    return den.min_theta() == 0 and den.xi_top_part().is_one()


class LocalizedElement:
    """``num / den`` with ``den = 1 + mu`` and every term of ``mu`` divisible by ``t``.

    Equality is decided by cross-multiplication; no gcd is ever taken, so
    representatives are not minimal.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: GroupRingElement, den: Optional[GroupRingElement] = None):
        if den is None:
            den = num.one()
        num._check(den)
        if not _is_normalized_den(den):
            raise NotLocalizable(f"denominator {den} is not of the form 1 + (terms with t-exponent >= 1)")
        self.num = num
        self.den = den

    @classmethod
    def from_element(cls, x: GroupRingElement) -> "LocalizedElement":
        return cls(x, x.one())

    @property
    def h_rank(self) -> int:
        return self.num.h_rank

    @property
    def rational(self) -> bool:
        return self.num.rational

    def zero(self) -> "LocalizedElement":
        return LocalizedElement(self.num.zero(), self.num.one())

    def one(self) -> "LocalizedElement":
        return LocalizedElement(self.num.one(), self.num.one())

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self) -> bool:
        return not self.num.is_zero()

    def _lift(self, other):
        if isinstance(other, LocalizedElement):
            self.num._check(other.num)
            return other
        if isinstance(other, GroupRingElement):
            self.num._check(other)
            return LocalizedElement(other, other.one())
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            x = self.num.like(other)
            return LocalizedElement(x, x.one())
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        if self.den == other.den:
            return LocalizedElement(self.num + other.num, self.den)
        if other.den.is_one():
            return LocalizedElement(self.num + other.num * self.den, self.den)
        if self.den.is_one():
            return LocalizedElement(self.num * other.den + other.num, other.den)
        return LocalizedElement(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return LocalizedElement(-self.num, self.den)

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        if self.num.is_zero() or other.num.is_zero():
            return self.zero()
        if self.den.is_one():
            den = other.den
        elif other.den.is_one():
            den = self.den
        else:
            den = self.den * other.den
        return LocalizedElement(self.num * other.num, den)

    __rmul__ = __mul__

    def is_unit(self) -> bool:
        try:
            loc_normalize(self.den, self.num)
        except NotLocalizable:
            return False
        return True

    def inverse(self) -> "LocalizedElement":
        try:
            return loc_normalize(self.den, self.num)
        except NotLocalizable as exc:
            raise NotAUnit(f"{self} is not a unit of the localized ring") from exc

    def __truediv__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __pow__(self, n: int) -> "LocalizedElement":
        if n < 0:
            return self.inverse() ** (-n)
        out = self.one()
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, (GroupRingElement, int, Fraction)) and not isinstance(other, bool):
            other = self._lift(other)
        if not isinstance(other, LocalizedElement):
            return NotImplemented
        return self.num * other.den == other.num * self.den

    __hash__ = None

    def expand(self, order: int) -> NovikovSeries:
        return expand(self, order)

    def __str__(self) -> str:
        if self.den.is_one():
            return render_element(self.num)
        return f"({render_element(self.num)})/({render_element(self.den)})"

    __repr__ = __str__


def loc_normalize(num: GroupRingElement, den: GroupRingElement) -> LocalizedElement:
    """Bring ``num/den`` to the form ``num'/(1 + mu)``.

    The xi-top part of ``den`` must be a single monomial ``+-g``; it is
    divided out of both numerator and denominator.
    """
    num._check(den)
    if den.is_zero():
        raise NotLocalizable("zero denominator")
    top = den.xi_top_part()
    m = top.as_monomial()
    if m is None:
        raise NotLocalizable(f"xi-top part {top} of {den} is not a monomial")
    c, g = m
    if abs(c) != 1 and not den.rational:
        raise NotLocalizable(f"xi-top coefficient {c} of {den} is not a unit of Z")
    inv = top.monomial_inverse()
    return LocalizedElement(num * inv, den * inv)


def expand(x: LocalizedElement, order: int) -> NovikovSeries:
    """Expand ``num / (1 + mu)`` as a series exact through ``t^order``.

    Solves ``(1 + mu) s = num`` one power of ``t`` at a time, which is the
    geometric series ``num * sum (-mu)^j`` organized by degree.
    """
    if isinstance(x, GroupRingElement):
        return NovikovSeries(x, order)
    nslices = x.num.theta_slices()
    mslices = {k: v for k, v in x.den.theta_slices().items() if k > 0}
    zero = x.num.zero()
    if not nslices:
        return NovikovSeries(zero, order)
    start = min(nslices)
    if order - start <= _PACKED_MAX_STEPS:
        return _expand_packed(x, nslices, mslices, start, order)
    s: Dict[int, GroupRingElement] = {}
    for k in range(start, order + 1):
        acc = nslices.get(k, zero)
        for j, mj in mslices.items():
            prev = s.get(k - j)
            if prev is not None and prev:
                acc = acc - mj * prev
        s[k] = acc
    return NovikovSeries.from_slices(s, order, x.h_rank, x.rational)


def _expand_packed(x: LocalizedElement, nslices, mslices, start: int, order: int) -> NovikovSeries:
    """The recurrence of :func:`expand` on packed keys.

    Every slice has first exponent 0, and the H-exponents of the ``k``-th
    output slice are bounded by those of the numerator plus ``k - start``
    times those of ``mu``.
    """
    steps = max(order - start, 0) + 1
    bound = (_max_exponent(x.num._terms, True) + steps * _max_exponent(x.den._terms, True)
             + abs(start) + abs(order) + 1)
    codec = _Packing(x.h_rank + 1, bound)
    pn = {k: codec.pack(v._terms) for k, v in nslices.items()}
    pm = {k: codec.pack(v._terms) for k, v in mslices.items()}
    s: Dict[int, Dict[int, Coeff]] = {}
    for k in range(start, order + 1):
        acc = dict(pn.get(k, ()))
        for j, mj in pm.items():
            prev = s.get(k - j)
            if prev:
                codec.addmul(acc, mj, prev, -1)
        s[k] = {key: c for key, c in acc.items() if c}
    terms: Dict[GroupElem, Coeff] = {}
    for k, part in s.items():
        terms.update(codec.unpack(part, k))
    return NovikovSeries(GroupRingElement._raw(terms, x.h_rank, x.rational), order)


def expand_many(xs: Iterable[LocalizedElement], order: int) -> list:
    """``[expand(x, order) for x in xs]``, sharing the work for equal denominators.

    Entries over a common denominator ``den`` are expanded as
    ``num * expand(1/den)``, so the inverse series is computed once.
    """
    xs = list(xs)
    groups: Dict[tuple, list] = {}
    for i, x in enumerate(xs):
        if isinstance(x, LocalizedElement) and x.num:
            groups.setdefault((x.rational, tuple(sorted(x.den._terms.items()))), []).append(i)
    out = [None] * len(xs)
    for idx in groups.values():
        if len(idx) < 2 or xs[idx[0]].den.is_one():
            continue
        den = xs[idx[0]].den
        low = min(xs[i].num.min_theta() for i in idx)
        if order - low > _PACKED_MAX_STEPS:
            continue
        inv = expand(LocalizedElement(den.one(), den), order - low).poly
        bound = max(_max_exponent(xs[i].num._terms) for i in idx) + _max_exponent(inv._terms) + 1
        codec = _Packing(den.h_rank + 1, max(bound, abs(order) + abs(low) + 1))
        pinv = codec.pack(inv._terms)
        for i in idx:
            acc: Dict[int, Coeff] = {}
            codec.addmul_cut(acc, codec.pack(xs[i].num._terms), pinv, order)
            out[i] = NovikovSeries(GroupRingElement._raw(codec.unpack(acc), den.h_rank, den.rational), order)
    return [o if o is not None else (expand(x, order) if isinstance(x, LocalizedElement) else NovikovSeries(x, order))
            for o, x in zip(out, xs)]


# ---------------------------------------------------------------------------
# K1 classes modulo +-G


def _strip_monomial(x: GroupRingElement) -> GroupRingElement:
    # normalize so the term of lowest t-exponent is +1; units then print as 1 + ...
    g = min(x._terms)
    c = x._terms[g]
    sign = 1 if c > 0 else -1
    return x.shift(GradedGroup.inv(g), sign)


class K1Class:
    """A nonzero fraction ``num/den`` of group ring elements modulo ``+-G``.

    Units of the localized ring give the determinant part of its K1 modulo
    ``+-G``; arbitrary nonzero fractions are admitted so that intermediate
    minors of a torsion computation can be multiplied together.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: GroupRingElement, den: Optional[GroupRingElement] = None):
        if den is None:
            den = num.one()
        num._check(den)
        if num.is_zero() or den.is_zero():
            raise NotAUnit("zero has no K1 class")
        self.num = _strip_monomial(num)
        self.den = _strip_monomial(den)

    @classmethod
    def identity(cls, h_rank: int = 0, rational: bool = False) -> "K1Class":
        one = GroupRingElement.constant(1, h_rank, rational)
        return cls(one, one)

    @classmethod
    def of(cls, x) -> "K1Class":
        if isinstance(x, LocalizedElement):
            return cls(x.num, x.den)
        if isinstance(x, GroupRingElement):
            return cls(x, x.one())
        raise TypeError(f"cannot take the class of {type(x).__name__}")

    def __mul__(self, other: "K1Class") -> "K1Class":
        if not isinstance(other, K1Class):
            return NotImplemented
        return K1Class(self.num * other.num, self.den * other.den)

    def inverse(self) -> "K1Class":
        return K1Class(self.den, self.num)

    def __truediv__(self, other: "K1Class") -> "K1Class":
        return self * other.inverse()

    def __pow__(self, n: int) -> "K1Class":
        base = self if n >= 0 else self.inverse()
        num, den = base.num ** abs(n), base.den ** abs(n)
        return K1Class(num, den)

    def is_identity(self) -> bool:
        return k1_eq(self, K1Class(self.num.one()))

    def is_unit_class(self) -> bool:
        """True when the class is represented by a unit of the localized ring."""
        try:
            loc_normalize(self.num, self.den)
            loc_normalize(self.den, self.num)
        except NotLocalizable:
            return False
        return True

    def __eq__(self, other) -> bool:
        if not isinstance(other, K1Class):
            return NotImplemented
        return k1_eq(self, other)

    __hash__ = None

    def __str__(self) -> str:
        if self.den.is_one():
            return f"[{render_element(self.num)}]"
        return f"[({render_element(self.num)})/({render_element(self.den)})]"

    __repr__ = __str__


def k1_of_unit(u: LocalizedElement) -> K1Class:
    if not u.is_unit():
        raise NotAUnit(f"{u} is not a unit of the localized ring")
    return K1Class(u.num, u.den)


def k1_mul(a: K1Class, b: K1Class) -> K1Class:
    return a * b


def k1_eq(a: K1Class, b: K1Class) -> bool:
    """``a == b`` modulo ``+-G``: decide whether ``a.num*b.den = +-g * b.num*a.den``."""
    left = a.num * b.den
    right = b.num * a.den
    if len(left) != len(right):
        return False
    gl, cl = left.leading_term()
    gr, cr = right.leading_term()
    if cl == cr:
        sign = 1
    elif cl == -cr:
        sign = -1
    else:
        return False
    return left == right.shift(_gdiv(gl, gr), sign)


def gr_arith(a: GroupRingElement, b: GroupRingElement, op: str) -> GroupRingElement:
    a._check(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown operation {op!r}")
