"""Exact numbers of the form ``a + b*sqrt(d)`` with rational ``a, b``.

Values with ``b == 0`` collapse to :class:`fractions.Fraction`, so rational
code paths never see a surd.  Only one radicand may appear in a computation;
mixing ``sqrt(2)`` with ``sqrt(3)`` raises rather than silently rounding.
"""
from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

from .errors import InvalidInputError, OutsideClassError

__all__ = ["Surd", "exact", "sqrt_exact", "is_exact", "to_float", "INF", "is_inf"]

INF = math.inf


def is_inf(x) -> bool:
    return isinstance(x, float) and math.isinf(x) and x > 0


def _squarefree_split(n: int) -> tuple[int, int]:
    """Return (k, d) with n = k*k*d and d squarefree."""
    k, d, p = 1, 1, 2
    while p * p <= n:
        while n % (p * p) == 0:
            n //= p * p
            k *= p
        if n % p == 0:
            n //= p
            d *= p
        p += 1
    return k, d * n


class Surd:
    __slots__ = ("a", "b", "d")

    def __new__(cls, a, b=0, d=1):
        a, b, d = Fraction(a), Fraction(b), int(d)
        if d < 1:
            raise InvalidInputError("radicand must be a positive integer")
        k, d = _squarefree_split(d)
        b *= k
        if b == 0 or d == 1:
            return a + b
        obj = object.__new__(cls)
        obj.a, obj.b, obj.d = a, b, d
        return obj

    def __repr__(self):
        return f"Surd({self.a}, {self.b}, {self.d})"

    def __str__(self):
        b = abs(self.b)
        tail = f"sqrt({self.d})" if b == 1 else f"{b}*sqrt({self.d})"
        sign = "-" if self.b < 0 else ("" if self.a == 0 else "+")
        return f"{sign}{tail}" if self.a == 0 else f"{self.a}{sign}{tail}"

    def _coerce(self, other):
        if isinstance(other, Surd):
            if other.d != self.d:
                raise OutsideClassError(
                    f"mixed radicands sqrt({self.d}) and sqrt({other.d})"
                )
            return other.a, other.b
        if isinstance(other, (int, Rational)):
            return Fraction(other), Fraction(0)
        return None

    def __add__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return Surd(self.a + c[0], self.b + c[1], self.d)

    __radd__ = __add__

    def __neg__(self):
        return Surd(-self.a, -self.b, self.d)

    def __sub__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return Surd(self.a - c[0], self.b - c[1], self.d)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        a, b = c
        return Surd(self.a * a + self.b * b * self.d, self.a * b + self.b * a, self.d)

    __rmul__ = __mul__

    def conjugate(self):
        return Surd(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.d

    def __truediv__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        other = Surd(c[0], c[1], self.d)
        if other == 0:
            raise ZeroDivisionError("division by zero surd")
        if isinstance(other, Fraction):
            return Surd(self.a / other, self.b / other, self.d)
        return self * other.conjugate() / other.norm()

    def __rtruediv__(self, other):
        return self.conjugate() * Fraction(other) / self.norm()

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return 1 / (self ** -k)
        out = Fraction(1)
        for _ in range(k):
            out = self * out
        return out

    def sign(self) -> int:
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sa == sb or sa == 0:
            return sb
        if sb == 0:
            return sa
        # Opposite signs: compare a^2 with b^2 d.
        diff = self.a * self.a - self.b * self.b * self.d
        return sa if diff > 0 else sb

    def _cmp(self, other):
        if is_inf(other):
            return -1
        if isinstance(other, float):
            return (float(self) > other) - (float(self) < other)
        d = self - other
        return d.sign() if isinstance(d, Surd) else (d > 0) - (d < 0)

    def __eq__(self, other):
        if isinstance(other, Surd):
            return (self.a, self.b, self.d) == (other.a, other.b, other.d)
        return False

    def __hash__(self):
        return hash((self.a, self.b, self.d))

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.d)


def exact(x):
    """Coerce ints, Fractions, ``"p/q"`` strings and surds to an exact number."""
    if isinstance(x, Surd) or is_inf(x):
        return x
    if isinstance(x, bool):
        raise InvalidInputError("booleans are not numbers here")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        s = x.strip()
        if s in ("inf", "∞"):
            return INF
        try:
            return Fraction(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidInputError(f"not an exact rational: {x!r}") from exc
    if isinstance(x, float):
        raise InvalidInputError(f"floats are not exact: {x!r}; pass 'p/q'")
    raise InvalidInputError(f"cannot interpret {x!r} as an exact number")


def is_exact(x) -> bool:
    return isinstance(x, (Fraction, Surd, int)) and not isinstance(x, bool)


def sqrt_exact(x):
    """Square root of a non-negative rational as a Fraction or Surd."""
    if isinstance(x, Surd):
        raise OutsideClassError(f"square root of the surd {x} is not a quadratic surd")
    x = Fraction(x)
    if x < 0:
        raise InvalidInputError("square root of a negative number")
    if x == 0:
        return Fraction(0)
    # sqrt(p/q) = sqrt(p*q)/q
    k, d = _squarefree_split(x.numerator * x.denominator)
    return Surd(0, Fraction(k, x.denominator), d)


def to_float(x) -> float:
    return float(x)
