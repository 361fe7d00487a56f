"""Exact rational helpers and quadratic surds ``a + b*sqrt(r)``."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

Rational = Union[int, Fraction]

try:  # C-backed rationals for the hot loops; results are handed back as Fractions
    from gmpy2 import mpq as fast_rational
except ImportError:  # pragma: no cover
    fast_rational = Fraction


def to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    return Fraction(int(value.numerator), int(value.denominator))


def frac(value) -> Fraction:
    """Coerce ``value`` to a Fraction.

    Strings use the ``"3/4"`` wire format. Floats are rejected because they
    silently carry binary rounding into exact computations.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not probabilities")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty fraction string")
        if any(c in text for c in ".eE"):
            raise ValueError(f"decimal literal {value!r}; use a fraction string like '3/4'")
        return Fraction(text)
    if isinstance(value, float):
        raise TypeError(f"float {value!r} is not exact; pass a Fraction or 'p/q' string")
    return Fraction(value)


def fmt(value) -> str:
    """Render an exact number as a fraction string (``"0"``, ``"3/4"``)."""
    if isinstance(value, Surd):
        return str(value)
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def fmt_decimal(value, digits: int) -> str:
    return f"{float(value):.{digits}f}"


def rational_sqrt(q: Fraction) -> Fraction | None:
    """Exact square root of ``q`` when it is a rational square, else None."""
    q = Fraction(q)
    if q < 0:
        raise ValueError("negative radicand")
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


class Surd:
    """The real number ``a + b*sqrt(r)`` with rational ``a``, ``b`` and ``r >= 0``.

    Only values sharing one radicand combine; that covers every expression
    built from a single ``sqrt(eps)``.
    """

    __slots__ = ("a", "b", "r")

    def __init__(self, a: Rational = 0, b: Rational = 0, r: Rational = 0):
        a, b, r = Fraction(a), Fraction(b), Fraction(r)
        if r < 0:
            raise ValueError("negative radicand")
        root = rational_sqrt(r)
        if root is not None:
            a, b, r = a + b * root, Fraction(0), Fraction(0)
        elif b == 0:
            r = Fraction(0)
        self.a, self.b, self.r = a, b, r

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def rational(self) -> Fraction:
        if self.b != 0:
            raise ValueError(f"{self} is irrational")
        return self.a

    def _coerce(self, other) -> "Surd":
        if isinstance(other, Surd):
            if other.b != 0 and self.b != 0 and other.r != self.r:
                raise ValueError("surds with different radicands do not combine")
            return other
        return Surd(frac(other))

    def _radicand(self, other: "Surd") -> Fraction:
        return self.r if self.b != 0 else other.r

    def __add__(self, other):
        o = self._coerce(other)
        return Surd(self.a + o.a, self.b + o.b, self._radicand(o))

    __radd__ = __add__

    def __neg__(self):
        return Surd(-self.a, -self.b, self.r)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        r = self._radicand(o)
        return Surd(self.a * o.a + self.b * o.b * r, self.a * o.b + self.b * o.a, r)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Surd):
            if other.b != 0:
                # multiply through by the conjugate
                den = other.a * other.a - other.b * other.b * other.r
                return self * Surd(other.a / den, -other.b / den, other.r)
            other = other.a
        other = frac(other)
        return Surd(self.a / other, self.b / other, self.r)

    def __rtruediv__(self, other):
        return Surd(frac(other)) / self

    def sign(self) -> int:
        a, b = self.a, self.b
        if b == 0:
            return (a > 0) - (a < 0)
        if a == 0:
            return 1 if b > 0 else -1
        if (a > 0) == (b > 0):
            return 1 if a > 0 else -1
        # opposite signs: compare a^2 with b^2 r
        lhs, rhs = a * a, b * b * self.r
        if lhs == rhs:
            return 0
        big_a = lhs > rhs
        return (1 if a > 0 else -1) if big_a else (1 if b > 0 else -1)

    def _cmp(self, other) -> int:
        return (self - other).sign()

    def __eq__(self, other):
        try:
            return self._cmp(other) == 0
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.r))

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.r)

    def __ceil__(self) -> int:
        guess = math.ceil(float(self))
        # walk to the exact ceiling; float error is at most a unit or two here
        while Surd(guess - 1) >= self:
            guess -= 1
        while Surd(guess) < self:
            guess += 1
        return guess

    def __floor__(self) -> int:
        return -math.ceil(-self)

    def __repr__(self):
        return f"Surd({fmt(self.a)}, {fmt(self.b)}, {fmt(self.r)})"

    def __str__(self):
        if self.b == 0:
            return fmt(self.a)
        root = f"sqrt({fmt(self.r)})"
        coef = "" if self.b == 1 else f"{fmt(self.b)}*"
        if self.a == 0:
            return f"{coef}{root}"
        return f"{fmt(self.a)} + {coef}{root}"


def sqrt(q) -> Fraction | Surd:
    """Exact square root: a Fraction when ``q`` is a rational square."""
    q = frac(q)
    root = rational_sqrt(q)
    return root if root is not None else Surd(0, 1, q)


def as_surd(x) -> Surd:
    return x if isinstance(x, Surd) else Surd(frac(x))


def exact_ceil(x) -> int:
    if isinstance(x, Surd):
        return math.ceil(x)
    return math.ceil(frac(x))


def mul_roots(x, y) -> Fraction | Surd:
    """Product of two nonnegative values each rational or a pure root ``b*sqrt(r)``.

    ``sqrt(u) * sqrt(v) = sqrt(u v)`` keeps the result representable even
    when the two radicands differ.
    """
    def square(z) -> Fraction:
        if isinstance(z, Surd):
            if z.a != 0 and z.b != 0:
                raise ValueError("mul_roots takes pure roots or rationals")
            if z.b == 0:
                return z.a * z.a
            if z.b < 0:
                raise ValueError("negative root")
            return z.b * z.b * z.r
        z = frac(z)
        if z < 0:
            raise ValueError("negative factor")
        return z * z

    return sqrt(square(x) * square(y))


def square(x) -> Fraction:
    """``x**2`` for a rational or a pure root, as an exact rational."""
    if isinstance(x, Surd):
        s = x * x
        return s.rational()
    x = frac(x)
    return x * x
