"""Exact plane coordinates with two symbolic infinitesimals.

A coordinate is a formal expression ``a + b*eps + c*delta`` with rational
a, b, c, where eps and delta are positive infinitesimals and eps is
infinitely larger than delta.  Comparison is therefore lexicographic on
(a, b, c).  This makes every "for a small enough eps > 0" clause in the
gadget formulas exact: no numeric tuning, no tolerance anywhere.

delta is reserved for anchor inflation, so inflated runs can never
collide with accumulated eps adjustments.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Union

Rat = Union[int, Fraction]

_ZERO_FRACTION = Fraction(0)

# skips Fraction's own __new__, which re-dispatches on argument types
_new_fraction = object.__new__


def _frac(n: int, d: int) -> Fraction:
    """Build a Fraction from a reduced-or-not integer pair.

    Fraction(n, d) spends most of its time on argument dispatch; this
    skips straight to the gcd reduction.  d must be positive.
    """
    g = gcd(n, d)
    if g != 1:
        n //= g
        d //= g
    f = _new_fraction(Fraction)
    f._numerator = n
    f._denominator = d
    return f


class ExactCoord:
    """a + b*eps + c*delta, ordered lexicographically on (a, b, c).

    Arithmetic and comparisons are hand-written: coordinates are touched
    millions of times while assembling large instances, and both the
    dataclass-generated comparisons and stock Fraction arithmetic
    dominate the profile at that scale.  Instances are treated as
    immutable everywhere.
    """

    __slots__ = ("a", "b", "c")

    def __init__(self, a: Fraction, b: Fraction = _ZERO_FRACTION,
                 c: Fraction = _ZERO_FRACTION) -> None:
        self.a = a
        self.b = b
        self.c = c

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExactCoord):
            return NotImplemented
        sa, sb, sc = self.a, self.b, self.c
        oa, ob, oc = other.a, other.b, other.c
        return (sa.numerator == oa.numerator
                and sa.denominator == oa.denominator
                and sb.numerator == ob.numerator
                and sb.denominator == ob.denominator
                and sc.numerator == oc.numerator
                and sc.denominator == oc.denominator)

    def __hash__(self) -> int:
        return hash((self.a, self.b, self.c))

    def __lt__(self, other: "ExactCoord") -> bool:
        for s, o in ((self.a, other.a), (self.b, other.b),
                     (self.c, other.c)):
            d = s.numerator * o.denominator - o.numerator * s.denominator
            if d:
                return d < 0
        return False

    def __le__(self, other: "ExactCoord") -> bool:
        return not other.__lt__(self)

    def __gt__(self, other: "ExactCoord") -> bool:
        return other.__lt__(self)

    def __ge__(self, other: "ExactCoord") -> bool:
        return not self.__lt__(other)

    def __add__(self, other: "ExactCoord") -> "ExactCoord":
        out = ExactCoord.__new__(ExactCoord)
        for f in ("a", "b", "c"):
            s = getattr(self, f)
            o = getattr(other, f)
            sd, od = s.denominator, o.denominator
            setattr(out, f,
                    _frac(s.numerator * od + o.numerator * sd, sd * od))
        return out

    def __sub__(self, other: "ExactCoord") -> "ExactCoord":
        out = ExactCoord.__new__(ExactCoord)
        for f in ("a", "b", "c"):
            s = getattr(self, f)
            o = getattr(other, f)
            sd, od = s.denominator, o.denominator
            setattr(out, f,
                    _frac(s.numerator * od - o.numerator * sd, sd * od))
        return out

    def __neg__(self) -> "ExactCoord":
        return ExactCoord(-self.a, -self.b, -self.c)

    def scale(self, r: Rat) -> "ExactCoord":
        rn, rd = (r, 1) if type(r) is int else (r.numerator, r.denominator)
        out = ExactCoord.__new__(ExactCoord)
        for f in ("a", "b", "c"):
            s = getattr(self, f)
            setattr(out, f, _frac(s.numerator * rn, s.denominator * rd))
        return out

    def shift(self, r: Rat) -> "ExactCoord":
        """Add a rational to the standard part."""
        rn, rd = (r, 1) if type(r) is int else (r.numerator, r.denominator)
        sa = self.a
        sd = sa.denominator
        out = ExactCoord.__new__(ExactCoord)
        out.a = _frac(sa.numerator * rd + rn * sd, sd * rd)
        out.b = self.b
        out.c = self.c
        return out

    def __repr__(self) -> str:
        parts = [str(self.a)]
        if self.b:
            parts.append(f"{self.b}e")
        if self.c:
            parts.append(f"{self.c}d")
        return "+".join(parts).replace("+-", "-")


def coord(a: Rat, b: Rat = 0, c: Rat = 0) -> ExactCoord:
    return ExactCoord(Fraction(a), Fraction(b), Fraction(c))


ZERO = coord(0)
EPS = coord(0, 1)
DELTA = coord(0, 0, 1)


@dataclass(frozen=True, order=True)
class PlanePoint:
    x: ExactCoord
    y: ExactCoord

    def translate(self, dx: Rat, dy: Rat) -> "PlanePoint":
        return PlanePoint(self.x.shift(dx), self.y.shift(dy))

    def transpose(self) -> "PlanePoint":
        return PlanePoint(self.y, self.x)


def pt(x: Union[Rat, ExactCoord], y: Union[Rat, ExactCoord]) -> PlanePoint:
    if not isinstance(x, ExactCoord):
        x = coord(x)
    if not isinstance(y, ExactCoord):
        y = coord(y)
    return PlanePoint(x, y)
