"""Exact rational and Gaussian-rational scalars.

Rationals are :class:`fractions.Fraction`, which already keeps numerator and
denominator in lowest terms with a positive denominator.  This module adds
the pieces the rest of the package needs on top of that: certified square
root approximation, power-of-two helpers, a strict text format, and
:class:`GaussianRational` for the complex field.
"""

from __future__ import annotations

import math
import operator
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Rational = Fraction
RationalLike = Union[int, Fraction]

__all__ = [
    "Rational",
    "GaussianRational",
    "as_rational",
    "rat_arith",
    "rat_sqrt_approx",
    "ceil_log2",
    "pow2",
    "serialize_rational",
    "parse_rational",
    "serialize_gaussian",
    "parse_gaussian",
]

_OPS = {
    "add": operator.add,
    "sub": operator.sub,
    "mul": operator.mul,
    "div": operator.truediv,
}


def as_rational(value) -> Fraction:
    """Coerce an int or Fraction; floats are rejected to keep the data path exact."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"expected int or Fraction, got {type(value).__name__}")


def rat_arith(a: RationalLike, b: RationalLike, op: str) -> Fraction:
    """Exact ``a <op> b`` for op in add/sub/mul/div.

    Raises ZeroDivisionError for ``div`` by zero.
    """
    try:
        fn = _OPS[op]
    except KeyError:
        raise ValueError(f"unknown op {op!r}") from None
    return fn(as_rational(a), as_rational(b))


def pow2(k: int) -> Fraction:
    """Exact 2**k for any integer k."""
    return Fraction(1 << k) if k >= 0 else Fraction(1, 1 << -k)


def ceil_log2(q: RationalLike) -> int:
    """Smallest integer k with 2**k >= q, for q > 0."""
    q = as_rational(q)
    if q <= 0:
        raise ValueError("ceil_log2 needs a positive argument")
    n, d = q.numerator, q.denominator
    # 2**k >= n/d  <=>  n <= d * 2**k
    k = n.bit_length() - d.bit_length()
    while pow2(k) < q:
        k += 1
    while pow2(k - 1) >= q:
        k -= 1
    return k


def rat_sqrt_approx(a: RationalLike, n: int) -> Fraction:
    """Dyadic q >= 0 with |q - sqrt(a)| <= 2**-n.

    q = floor(sqrt(a) * 2**n) / 2**n, computed with integer square roots only.
    """
    a = as_rational(a)
    if a < 0:
        raise ValueError("square root of a negative rational")
    if n < 0:
        raise ValueError("precision exponent must be non-negative")
    # floor(sqrt(p/q) * 2^n) = floor(sqrt(floor(p * 4^n / q)))
    scaled = (a.numerator << (2 * n)) // a.denominator
    return Fraction(math.isqrt(scaled), 1 << n)


_RAT_RE = re.compile(r"^([+-]?)(\d+)/(\d+)$")


def serialize_rational(a: RationalLike) -> str:
    """Canonical ``p/q`` text; the sign sits on the numerator."""
    a = as_rational(a)
    return f"{a.numerator}/{a.denominator}"


def parse_rational(text: str) -> Fraction:
    """Parse ``±p/q`` text.  Non-canonical forms such as ``2/4`` are accepted
    and reduced; bare integers are accepted as a convenience."""
    s = text.strip()
    m = _RAT_RE.match(s)
    if m:
        sign, p, q = m.groups()
        if int(q) == 0:
            raise ValueError(f"zero denominator in {text!r}")
        value = Fraction(int(p), int(q))
        return -value if sign == "-" else value
    if re.fullmatch(r"[+-]?\d+", s):
        return Fraction(int(s))
    raise ValueError(f"malformed rational {text!r}")


@dataclass(frozen=True)
class GaussianRational:
    """Complex number with rational real and imaginary parts."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", as_rational(self.re))
        object.__setattr__(self, "im", as_rational(self.im))

    @classmethod
    def coerce(cls, value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        return cls(as_rational(value))

    def __add__(self, other):
        other = _maybe_gauss(other)
        if other is NotImplemented:
            return other
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = _maybe_gauss(other)
        if other is NotImplemented:
            return other
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = _maybe_gauss(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = _maybe_gauss(other)
        if other is NotImplemented:
            return other
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _maybe_gauss(other)
        if other is NotImplemented:
            return other
        d = other.abs2()
        if d == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        num = self * other.conjugate()
        return GaussianRational(num.re / d, num.im / d)

    def __rtruediv__(self, other):
        other = _maybe_gauss(other)
        if other is NotImplemented:
            return other
        return other / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __eq__(self, other):
        other = _maybe_gauss(other)
        if other is NotImplemented:
            return other
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        """Squared modulus, exact."""
        return self.re * self.re + self.im * self.im

    def abs_upper(self) -> Fraction:
        """Cheap rational upper bound on the modulus: |re| + |im|."""
        return abs(self.re) + abs(self.im)

    def is_real(self) -> bool:
        return self.im == 0

    def __repr__(self):
        return f"GaussianRational({serialize_gaussian(self)!r})"

    def __str__(self):
        return serialize_gaussian(self)


def _maybe_gauss(value):
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, (int, Fraction)):
        return GaussianRational(Fraction(value))
    return NotImplemented


def serialize_gaussian(z: GaussianRational) -> str:
    """``±p/q±r/si`` text, e.g. ``1/2-3/1i``."""
    z = GaussianRational.coerce(z)
    im = z.im
    sign = "-" if im < 0 else "+"
    return f"{serialize_rational(z.re)}{sign}{abs(im.numerator)}/{im.denominator}i"


_GAUSS_RE = re.compile(r"^([+-]?\d+(?:/\d+)?)([+-]\d+(?:/\d+)?)i$")
_IMAG_RE = re.compile(r"^([+-]?\d+(?:/\d+)?)i$")


def parse_gaussian(text: str) -> GaussianRational:
    """Parse ``a+bi`` text; a purely real rational or a bare ``bi`` is accepted."""
    s = text.strip().replace(" ", "")
    m = _GAUSS_RE.match(s)
    if m:
        return GaussianRational(parse_rational(m.group(1)), parse_rational(m.group(2)))
    m = _IMAG_RE.match(s)
    if m:
        return GaussianRational(Fraction(0), parse_rational(m.group(1)))
    return GaussianRational(parse_rational(s))


def gaussian_to_json(z: GaussianRational) -> dict:
    return {"re": serialize_rational(z.re), "im": serialize_rational(z.im)}


def gaussian_from_json(obj) -> GaussianRational:
    if isinstance(obj, str):
        return parse_gaussian(obj)
    return GaussianRational(parse_rational(obj["re"]), parse_rational(obj["im"]))
