"""Computable reals as approximation streams with a geometric modulus.

A :class:`CReal` wraps a function ``n -> Fraction`` whose value at ``n`` is
within ``2**-n`` of one fixed real number.  Every combinator here states how
deep it queries its inputs so that the closed bound survives composition.
"""

from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, List, Optional, Sequence

from .scalars import (
    GaussianRational,
    as_rational,
    ceil_log2,
    pow2,
    rat_sqrt_approx,
)

__all__ = [
    "CReal",
    "CComplex",
    "CSeq",
    "Ordering",
    "DomainViolation",
    "creal_from_rational",
    "creal_add",
    "creal_sub",
    "creal_neg",
    "creal_sum",
    "creal_scale",
    "creal_mul",
    "creal_abs",
    "creal_sqrt",
    "creal_min",
    "creal_max",
    "scale_shift",
    "lim_star",
    "lim_star_diag",
    "cseq_add",
    "cseq_scale",
    "creal_compare_at",
    "excluded_ternary_digit",
    "ternary_query_precision",
    "diagonal_real",
    "DiagonalReal",
    "ccomplex",
    "ccomplex_from_gaussian",
    "ccomplex_add",
    "ccomplex_sub",
    "ccomplex_mul",
    "ccomplex_scale",
    "ccomplex_abs",
    "ccomplex_abs2",
]


class DomainViolation(ArithmeticError):
    """An approximation witnessed that an argument lies outside an operation's domain."""


class CReal:
    """A computable real number.

    ``approx(n)`` returns a rational within ``2**-n`` of the value.  Results
    are memoized per ``n`` behind a lock, so repeated and concurrent queries
    see the same rational.
    """

    __slots__ = ("_fn", "_cache", "_lock", "label")

    def __init__(self, fn: Callable[[int], Fraction], label: str = ""):
        self._fn = fn
        self._cache = {}
        self._lock = threading.Lock()
        self.label = label

    def approx(self, n: int) -> Fraction:
        if n < 0:
            raise ValueError("precision exponent must be non-negative")
        with self._lock:
            hit = self._cache.get(n)
        if hit is not None:
            return hit
        value = as_rational(self._fn(n))
        with self._lock:
            # first writer wins so that every caller sees one rational per n
            return self._cache.setdefault(n, value)

    def __repr__(self):
        tag = f" {self.label}" if self.label else ""
        return f"<CReal{tag} ~{float(self.approx(20)):.6g}>"

    def __add__(self, other):
        return creal_add(self, _lift(other))

    __radd__ = __add__

    def __sub__(self, other):
        return creal_sub(self, _lift(other))

    def __rsub__(self, other):
        return creal_sub(_lift(other), self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return creal_scale(other, self)
        return creal_mul(self, other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __neg__(self):
        return creal_neg(self)

    def __abs__(self):
        return creal_abs(self)


def _lift(value) -> CReal:
    if isinstance(value, CReal):
        return value
    return creal_from_rational(value)


def creal_from_rational(q) -> CReal:
    """Constant stream at an exact rational."""
    q = as_rational(q)
    return CReal(lambda n: q, label=f"{q}")


def creal_add(x: CReal, y: CReal) -> CReal:
    # both inputs at N+1: 2^-(N+1) + 2^-(N+1) = 2^-N
    return CReal(lambda n: x.approx(n + 1) + y.approx(n + 1))


def creal_neg(x: CReal) -> CReal:
    return CReal(lambda n: -x.approx(n))


def creal_sub(x: CReal, y: CReal) -> CReal:
    return CReal(lambda n: x.approx(n + 1) - y.approx(n + 1))


def creal_sum(xs: Sequence[CReal]) -> CReal:
    """Sum of finitely many reals, each queried ceil(log2 m) bits deeper."""
    xs = list(xs)
    if not xs:
        return creal_from_rational(0)
    shift = ceil_log2(len(xs))
    return CReal(lambda n: sum((x.approx(n + shift) for x in xs), Fraction(0)))


def scale_shift(c) -> int:
    """K = max(0, ceil(log2|c|) + 1), so |c| * 2^-(N+K) <= 2^-N."""
    c = abs(as_rational(c))
    if c == 0:
        return 0
    return max(0, ceil_log2(c) + 1)


def creal_scale(c, x: CReal) -> CReal:
    c = as_rational(c)
    if c == 0:
        return creal_from_rational(0)
    k = scale_shift(c)
    return CReal(lambda n: c * x.approx(n + k))


def _magnitude_bound(x: CReal) -> Fraction:
    return abs(x.approx(0)) + 1


def creal_mul(x: CReal, y: CReal) -> CReal:
    def approx(n):
        bx = _magnitude_bound(x)
        by = _magnitude_bound(y)
        m = n + 1 + ceil_log2(bx + by)
        return x.approx(m) * y.approx(m)

    return CReal(approx)


def creal_abs(x: CReal) -> CReal:
    # reverse triangle inequality keeps the same modulus
    return CReal(lambda n: abs(x.approx(n)))


def creal_min(x: CReal, y: CReal) -> CReal:
    return CReal(lambda n: min(x.approx(n), y.approx(n)))


def creal_max(x: CReal, y: CReal) -> CReal:
    return CReal(lambda n: max(x.approx(n), y.approx(n)))


def creal_sqrt(x: CReal) -> CReal:
    """Square root of a non-negative computable real.

    Uses |sqrt(a) - sqrt(b)| <= sqrt(|a - b|): x is read at 2N+2 so the input
    error contributes 2^-(N+1), and the rational root adds another 2^-(N+1).
    Raises DomainViolation when an approximation proves x < 0.
    """

    def approx(n):
        m = 2 * n + 2
        a = x.approx(m)
        if a < -pow2(-m):
            raise DomainViolation(f"sqrt of a negative number (approximation {a})")
        return rat_sqrt_approx(max(a, Fraction(0)), n + 1)

    return CReal(approx)


@dataclass(frozen=True)
class CSeq:
    """A sequence of computable reals with an optional convergence modulus.

    When present, ``modulus(N)`` is an index after which every term is within
    ``2**-N`` of the limit.
    """

    at: Callable[[int], CReal]
    modulus: Optional[Callable[[int], int]] = None


def lim_star(s: CSeq) -> CReal:
    """Effective limit: term modulus(N+1) read at precision N+1."""
    if s.modulus is None:
        raise ValueError("lim_star needs a modulus of convergence")
    return CReal(lambda n: s.at(s.modulus(n + 1)).approx(n + 1))


def cseq_add(s: CSeq, t: CSeq) -> CSeq:
    """Termwise sum; modulus N -> max(f(N+1), g(N+1))."""
    if s.modulus is None or t.modulus is None:
        raise ValueError("cseq_add needs both moduli")
    return CSeq(
        lambda k: creal_add(s.at(k), t.at(k)),
        lambda N: max(s.modulus(N + 1), t.modulus(N + 1)),
    )


def cseq_scale(c, s: CSeq) -> CSeq:
    """Termwise c * x_k; modulus N -> f(N + K) with |c| <= 2**(K-1)."""
    if s.modulus is None:
        raise ValueError("cseq_scale needs a modulus")
    k = scale_shift(c)
    return CSeq(lambda i: creal_scale(c, s.at(i)), lambda N: s.modulus(N + k))


def lim_star_diag(
    x: Callable[[int, int], CReal],
    inner_modulus: Callable[[int, int], int],
    outer_modulus: Callable[[int], int],
) -> CReal:
    """Iterated limit lim_k lim_l x(k, l) along a translated diagonal.

    ``inner_modulus(k, N)`` is a modulus for column k, ``outer_modulus(N)`` one
    for the column limits.  The diagonal term for column k is x(k, f(k)) with
    f(k) = inner_modulus(k, k), which is within 2^-k of the column limit.
    Taking k >= max(outer_modulus(N+2), N+2) puts it within 2^-(N+1) of the
    double limit; the final read at N+1 closes the budget.
    """

    def approx(n):
        k = max(outer_modulus(n + 2), n + 2)
        return x(k, inner_modulus(k, k)).approx(n + 1)

    return CReal(approx)


class Ordering(enum.Enum):
    LESS = "Less"
    GREATER = "Greater"
    OVERLAPPING = "Overlapping"


def creal_compare_at(x: CReal, y: CReal, n: int) -> Ordering:
    """Three-valued comparison at precision n; Less/Greater are certified."""
    eps = pow2(-n)
    a, b = x.approx(n), y.approx(n)
    if a + eps < b - eps:
        return Ordering.LESS
    if b + eps < a - eps:
        return Ordering.GREATER
    return Ordering.OVERLAPPING


def ternary_query_precision(k: int) -> int:
    """n = ceil(k log2 3) + 3, the depth at which one level-k ternary digit is excludable."""
    p = 3 ** k
    # ceil(log2 3^k) is the bit length since 3^k is never a power of two (k >= 1)
    return p.bit_length() + 3


def possible_ternary_digits(lo: Fraction, hi: Fraction, k: int) -> set:
    """Digits d such that [lo, hi] meets a closed level-k cell of digit d (mod 1)."""
    scale = 3 ** k
    u_lo, u_hi = lo * scale, hi * scale
    # cell [c, c+1] in scaled units has digit c mod 3; it meets [u_lo, u_hi]
    # iff u_lo - 1 <= c <= u_hi
    first = math.ceil(u_lo - 1)
    last = math.floor(u_hi)
    digits = set()
    for c in range(first, last + 1):
        digits.add(c % 3)
        if len(digits) == 3:
            break
    return digits


def excluded_ternary_digit(x: CReal, k: int) -> int:
    """A ternary digit that no expansion of x (mod 1) has at position k.

    Ties go to the smallest excludable digit.
    """
    if k < 1:
        raise ValueError("digit positions start at 1")
    n = ternary_query_precision(k)
    a = x.approx(n)
    eps = pow2(-n)
    possible = possible_ternary_digits(a - eps, a + eps, k)
    for d in (0, 1, 2):
        if d not in possible:
            return d
    # unreachable: the interval is narrower than half a cell
    raise AssertionError("no ternary digit excludable")


@dataclass
class DiagonalReal:
    """The diagonal real b = sum_k d_k 3^-k missed by a modulus-giving matrix.

    ``row(i, j)`` is the j-th rational approximation of row i (rows from 1),
    with |row(i, j) - row(i, j+1)| < 2^-j.  Digit d_k is excluded from every
    ternary expansion of |lim_j row(k, j)| mod 1.
    """

    row: Callable[[int, int], Fraction]

    def __post_init__(self):
        self._digits = {}
        self._limits = {}
        self.value = CReal(self._approx, label="diagonal")

    def row_limit(self, i: int) -> CReal:
        if i not in self._limits:
            # tail sum of 2^-m for m > n bounds |row(i, n+1) - limit| by 2^-n
            self._limits[i] = CReal(lambda n, i=i: as_rational(self.row(i, n + 1)))
        return self._limits[i]

    def row_norm(self, i: int) -> CReal:
        return creal_abs(self.row_limit(i))

    def digit(self, k: int) -> int:
        if k not in self._digits:
            self._digits[k] = excluded_ternary_digit(self.row_norm(k), k)
        return self._digits[k]

    def digits(self, count: int) -> List[int]:
        return [self.digit(k) for k in range(1, count + 1)]

    def partial_sum(self, count: int) -> Fraction:
        return sum((Fraction(self.digit(k), 3 ** k) for k in range(1, count + 1)), Fraction(0))

    def _approx(self, n: int) -> Fraction:
        # tail after K digits is at most 3^-K
        k = 0
        while 3 ** k < (1 << n):
            k += 1
        return self.partial_sum(k)


def diagonal_real(row: Callable[[int, int], Fraction]) -> DiagonalReal:
    return DiagonalReal(row)


@dataclass(frozen=True)
class CComplex:
    """Computable complex number as a pair of computable reals."""

    re: CReal
    im: CReal

    def approx(self, n: int) -> GaussianRational:
        """Componentwise approximation; the modulus error is at most 2^-n * sqrt(2)."""
        return GaussianRational(self.re.approx(n), self.im.approx(n))

    def __repr__(self):
        z = self.approx(20)
        return f"<CComplex ~{float(z.re):.6g}{float(z.im):+.6g}i>"


def ccomplex(re, im=0) -> CComplex:
    return CComplex(_lift(re), _lift(im))


def ccomplex_from_gaussian(z) -> CComplex:
    z = GaussianRational.coerce(z)
    return CComplex(creal_from_rational(z.re), creal_from_rational(z.im))


def ccomplex_add(a: CComplex, b: CComplex) -> CComplex:
    return CComplex(creal_add(a.re, b.re), creal_add(a.im, b.im))


def ccomplex_sub(a: CComplex, b: CComplex) -> CComplex:
    return CComplex(creal_sub(a.re, b.re), creal_sub(a.im, b.im))


def ccomplex_mul(a: CComplex, b: CComplex) -> CComplex:
    re = creal_sub(creal_mul(a.re, b.re), creal_mul(a.im, b.im))
    im = creal_add(creal_mul(a.re, b.im), creal_mul(a.im, b.re))
    return CComplex(re, im)


def ccomplex_conj(a: CComplex) -> CComplex:
    return CComplex(a.re, creal_neg(a.im))


def ccomplex_scale(c, a: CComplex) -> CComplex:
    """Multiply by an exact Gaussian rational."""
    c = GaussianRational.coerce(c)
    if c.im == 0:
        return CComplex(creal_scale(c.re, a.re), creal_scale(c.re, a.im))
    return ccomplex_mul(ccomplex_from_gaussian(c), a)


def ccomplex_abs2(a: CComplex) -> CReal:
    return creal_add(creal_mul(a.re, a.re), creal_mul(a.im, a.im))


def ccomplex_abs(a: CComplex) -> CReal:
    return creal_sqrt(ccomplex_abs2(a))


def ccomplex_sum(zs: Iterable[CComplex]) -> CComplex:
    zs = list(zs)
    return CComplex(creal_sum([z.re for z in zs]), creal_sum([z.im for z in zs]))


__all__ += ["ccomplex_conj", "ccomplex_sum"]


def fixture_row(i: int, j: int) -> Fraction:
    """A modulus-giving rational matrix used by demos and tests.

    Rows cycle through three kinds of limit: sqrt(i) (irrational), i/27
    (a ternary fraction with two expansions) and -i/5 approached from
    above.  Consecutive columns differ by less than 2**-j.
    """
    if i % 3 == 1:
        return rat_sqrt_approx(i, j + 1)
    if i % 3 == 0:
        return Fraction(i, 27)
    return Fraction(-i, 5) + pow2(-(j + 1))


__all__ += ["fixture_row", "possible_ternary_digits"]
