"""Effective Banach spaces F^n and l^2 over the standard basis.

Points are :class:`CVector` streams of finite rational combinations
(:class:`FiniteCombo`) with ``||approx(n) - x|| <= 2**-n``.  Combinations
are sparse: sorted basis indices, no zero coefficients.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .creal import CComplex, CReal, creal_from_rational, creal_sqrt
from .scalars import (
    GaussianRational,
    ceil_log2,
    parse_gaussian,
    pow2,
    rat_sqrt_approx,
    serialize_gaussian,
    serialize_rational,
)
from .toyrec import cantor_pair, cantor_unpair

__all__ = [
    "SpaceDesc",
    "FinDim",
    "L2",
    "DimensionError",
    "SpaceMismatch",
    "FiniteCombo",
    "combo",
    "basis_combo",
    "CVector",
    "vector_from_combo",
    "basis_vector",
    "combo_norm",
    "norm_upper",
    "cvector_norm",
    "cvector_linear",
    "cvector_lim_star",
    "inner_product",
    "merge_double_sum",
    "double_sum_direct",
    "ComboEnum",
    "combo_enum",
    "combo_index",
    "combo_to_json",
    "combo_from_json",
    "space_to_json",
    "space_from_json",
]


class DimensionError(IndexError):
    pass


class SpaceMismatch(ValueError):
    pass


@dataclass(frozen=True)
class SpaceDesc:
    """``findim`` (F^dim) or ``l2``; the generating set is the coordinate basis."""

    kind: str
    dim: Optional[int] = None
    field: str = "complex"

    def __post_init__(self):
        if self.kind not in ("findim", "l2"):
            raise ValueError(f"unknown space kind {self.kind!r}")
        if self.field not in ("real", "complex"):
            raise ValueError(f"unknown field {self.field!r}")
        if self.kind == "findim" and (self.dim is None or self.dim < 1):
            raise ValueError("a finite-dimensional space needs dim >= 1")
        if self.kind == "l2" and self.dim is not None:
            raise ValueError("l2 has no dimension")

    def check_index(self, j: int) -> None:
        if j < 0 or (self.kind == "findim" and j >= self.dim):
            raise DimensionError(f"basis index {j} outside {self}")

    def check_combo(self, c: "FiniteCombo") -> None:
        for j, a in c.terms:
            self.check_index(j)
            if self.field == "real" and a.im != 0:
                raise ValueError(f"complex coefficient {a} in a real space")

    def __str__(self):
        if self.kind == "findim":
            return f"{'R' if self.field == 'real' else 'C'}^{self.dim}"
        return "l2"


def FinDim(n: int, field: str = "complex") -> SpaceDesc:
    return SpaceDesc("findim", n, field)


def L2(field: str = "complex") -> SpaceDesc:
    return SpaceDesc("l2", None, field)


def _same_space(*spaces: SpaceDesc) -> SpaceDesc:
    first = spaces[0]
    for s in spaces[1:]:
        if s != first:
            raise SpaceMismatch(f"{first} vs {s}")
    return first


# --- finite combinations --------------------------------------------------


@dataclass(frozen=True)
class FiniteCombo:
    """sum_j coeff_j e_j with sorted distinct indices and nonzero coefficients."""

    terms: Tuple[Tuple[int, GaussianRational], ...] = ()

    def __post_init__(self):
        prev = -1
        for j, a in self.terms:
            if j <= prev:
                raise ValueError("indices must be sorted and distinct")
            if not a:
                raise ValueError("zero coefficients are not stored")
            prev = j

    def coeff(self, j: int) -> GaussianRational:
        for i, a in self.terms:
            if i == j:
                return a
        return GaussianRational()

    def as_dict(self) -> Dict[int, GaussianRational]:
        return dict(self.terms)

    def __add__(self, other: "FiniteCombo") -> "FiniteCombo":
        d = self.as_dict()
        for j, a in other.terms:
            d[j] = d.get(j, GaussianRational()) + a
        return combo(d)

    def __neg__(self) -> "FiniteCombo":
        return FiniteCombo(tuple((j, -a) for j, a in self.terms))

    def __sub__(self, other: "FiniteCombo") -> "FiniteCombo":
        return self + (-other)

    def scale(self, c) -> "FiniteCombo":
        c = GaussianRational.coerce(c)
        if not c:
            return FiniteCombo()
        return FiniteCombo(tuple((j, c * a) for j, a in self.terms))

    def norm2(self) -> Fraction:
        return sum((a.abs2() for _, a in self.terms), Fraction(0))

    def inner(self, other: "FiniteCombo") -> GaussianRational:
        """(self|other), linear in the first argument."""
        d = other.as_dict()
        total = GaussianRational()
        for j, a in self.terms:
            b = d.get(j)
            if b is not None:
                total = total + a * b.conjugate()
        return total

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(j for j, _ in self.terms)

    def __len__(self):
        return len(self.terms)

    def __str__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"({serialize_gaussian(a)})e_{j}" for j, a in self.terms)


def combo(items: Union[Dict[int, object], Iterable[Tuple[int, object]]] = ()) -> FiniteCombo:
    """Canonical combination from (index, coeff) pairs; repeated indices are summed."""
    pairs = items.items() if isinstance(items, dict) else items
    acc: Dict[int, GaussianRational] = {}
    for j, a in pairs:
        if j < 0:
            raise DimensionError(f"negative basis index {j}")
        acc[j] = acc.get(j, GaussianRational()) + GaussianRational.coerce(a)
    return FiniteCombo(tuple((j, a) for j, a in sorted(acc.items()) if a))


def basis_combo(j: int) -> FiniteCombo:
    return combo([(j, 1)])


def norm_upper(c: FiniteCombo, bits: int = 32) -> Fraction:
    """A rational upper bound on ||c||, tight to 2**-(bits-1)."""
    return rat_sqrt_approx(c.norm2(), bits) + pow2(-bits)


# --- computable vectors ---------------------------------------------------


class CVector:
    """A computable point: ``approx(n)`` is a combo within 2**-n of it."""

    __slots__ = ("space", "_fn", "_cache", "_lock", "exact", "label")

    def __init__(
        self,
        space: SpaceDesc,
        fn: Callable[[int], FiniteCombo],
        exact: Optional[FiniteCombo] = None,
        label: str = "",
    ):
        self.space = space
        self._fn = fn
        self._cache: Dict[int, FiniteCombo] = {}
        self._lock = threading.Lock()
        self.exact = exact
        self.label = label

    def approx(self, n: int) -> FiniteCombo:
        if n < 0:
            raise ValueError("precision exponent must be non-negative")
        with self._lock:
            hit = self._cache.get(n)
        if hit is not None:
            return hit
        value = self._fn(n)
        if not isinstance(value, FiniteCombo):
            raise TypeError("approximations must be FiniteCombo values")
        self.space.check_combo(value)
        with self._lock:
            return self._cache.setdefault(n, value)

    def __repr__(self):
        return f"<CVector in {self.space} {self.label or self.approx(10)}>"


def vector_from_combo(space: SpaceDesc, c: FiniteCombo) -> CVector:
    space.check_combo(c)
    return CVector(space, lambda n: c, exact=c, label=str(c))


def basis_vector(space: SpaceDesc, j: int) -> CVector:
    space.check_index(j)
    return vector_from_combo(space, basis_combo(j))


def combo_norm(space: SpaceDesc, c: FiniteCombo) -> CReal:
    """sqrt(sum |coeff|^2) from the exact radicand."""
    space.check_combo(c)
    return creal_sqrt(creal_from_rational(c.norm2()))


def cvector_norm(x: CVector) -> CReal:
    """||x||: the norm of x.approx(N+1), itself read at N+1."""
    if x.exact is not None:
        return combo_norm(x.space, x.exact)
    return CReal(lambda n: combo_norm(x.space, x.approx(n + 1)).approx(n + 1))


Scalar = Union[int, Fraction, GaussianRational, CReal, CComplex]


def _term(c: Scalar, x: CVector) -> Callable[[int], FiniteCombo]:
    """n -> combo within 2**-n of c x."""
    if isinstance(c, CReal):
        c = CComplex(c, creal_from_rational(0))
    if isinstance(c, CComplex):

        def approx(n):
            bc = c.approx(0).abs_upper() + 2
            bx = norm_upper(x.approx(0), 4) + 1
            p = n + 1 + ceil_log2(bc + bx)
            return x.approx(p).scale(c.approx(p))

        return approx
    g = GaussianRational.coerce(c)
    if not g:
        return lambda n: FiniteCombo()
    shift = max(0, ceil_log2(g.abs_upper()) + 1)
    return lambda n: x.approx(n + shift).scale(g)


def cvector_linear(xs: Sequence[CVector], cs: Sequence[Scalar]) -> CVector:
    """sum_i c_i x_i; each term is computed ceil(log2 m) bits deeper."""
    xs, cs = list(xs), list(cs)
    if len(xs) != len(cs):
        raise ValueError("vectors and scalars differ in number")
    if not xs:
        raise ValueError("empty linear combination has no space")
    space = _same_space(*(x.space for x in xs))
    shift = ceil_log2(len(xs))
    terms = [_term(c, x) for c, x in zip(cs, xs)]
    exact = None
    if all(x.exact is not None for x in xs) and not any(isinstance(c, (CReal, CComplex)) for c in cs):
        exact = FiniteCombo()
        for c, x in zip(cs, xs):
            exact = exact + x.exact.scale(c)

    def approx(n):
        total = FiniteCombo()
        for t in terms:
            total = total + t(n + shift)
        return total

    if exact is not None:
        return vector_from_combo(space, exact)
    return CVector(space, approx)


def cvector_lim_star(seq: Callable[[int], CVector], modulus: Callable[[int], int], space: Optional[SpaceDesc] = None) -> CVector:
    """Effective limit: term modulus(N+1) read at N+1."""
    space = space or seq(0).space
    return CVector(space, lambda n: seq(modulus(n + 1)).approx(n + 1))


def inner_product(x: CVector, y: CVector) -> CComplex:
    """(x|y) = sum_j x_j conj(y_j).

    Both vectors are read at N + 1 + ceil(log2(Bx + By + 1)) with
    Bx = ||x.approx(0)|| + 1, which bounds the bilinear error by 2**-(N+1).
    """
    _same_space(x.space, y.space)
    if x.exact is not None and y.exact is not None:
        z = x.exact.inner(y.exact)
        return CComplex(creal_from_rational(z.re), creal_from_rational(z.im))
    cache: Dict[int, GaussianRational] = {}
    lock = threading.Lock()

    def value(n):
        with lock:
            hit = cache.get(n)
        if hit is not None:
            return hit
        bx = norm_upper(x.approx(0), 4) + 1
        by = norm_upper(y.approx(0), 4) + 1
        p = n + 1 + ceil_log2(bx + by + 1)
        z = x.approx(p).inner(y.approx(p))
        with lock:
            return cache.setdefault(n, z)

    return CComplex(CReal(lambda n: value(n).re), CReal(lambda n: value(n).im))


# --- Heaviside re-indexing ------------------------------------------------


def _as_fn(f):
    return f if callable(f) else (lambda j: f[j])


def _as_fn2(a):
    return a if callable(a) else (lambda i, j: a[i][j])


def merge_double_sum(x: int, f, a) -> List[GaussianRational]:
    """Coefficients c_i, i = 0..max_j f(j), of

        sum_{j<=x} sum_{i<=f(j)} a(i, j) e_i = sum_i (sum_{j<=x} a(i, j) Theta(f(j) - i)) e_i

    with Theta(t) = 1 for t >= 0 and 0 otherwise.
    """
    f, a = _as_fn(f), _as_fn2(a)
    bounds = [f(j) for j in range(x + 1)]
    top = max(bounds)
    out = []
    for i in range(top + 1):
        total = GaussianRational()
        for j in range(x + 1):
            if bounds[j] - i >= 0:
                total = total + GaussianRational.coerce(a(i, j))
        out.append(total)
    return out


def double_sum_direct(x: int, f, a) -> Dict[int, GaussianRational]:
    """The left-hand side summed term by term, for comparison."""
    f, a = _as_fn(f), _as_fn2(a)
    acc: Dict[int, GaussianRational] = {}
    for j in range(x + 1):
        for i in range(f(j) + 1):
            acc[i] = acc.get(i, GaussianRational()) + GaussianRational.coerce(a(i, j))
    return acc


# --- the standard numbering of combos -------------------------------------


def _cw_value(i: int) -> Fraction:
    """The i-th positive rational (i >= 1) in Calkin-Wilf order."""
    a = b = 1
    for bit, run in itertools.groupby(bin(i)[3:]):
        t = len(list(run))
        if bit == "0":
            b += t * a
        else:
            a += t * b
    return Fraction(a, b)


def _cw_index(q: Fraction) -> int:
    p, r = q.numerator, q.denominator
    runs = []
    while (p, r) != (1, 1):
        if p < r:
            t = (r - 1) // p
            runs.append((0, t))
            r -= t * p
        else:
            t = (p - 1) // r
            runs.append((1, t))
            p -= t * r
    idx = 1
    for bit, t in reversed(runs):
        idx = (idx << t) | (((1 << t) - 1) if bit else 0)
    return idx


def _rat_code(q: Fraction) -> int:
    """Bijection Q -> N with 0 -> 0 and signs interleaved."""
    if q == 0:
        return 0
    i = _cw_index(abs(q))
    return 2 * (i - 1) + (2 if q < 0 else 1)


def _rat_decode(n: int) -> Fraction:
    if n == 0:
        return Fraction(0)
    i, neg = divmod(n - 1, 2)
    v = _cw_value(i + 1)
    return -v if neg else v


class ComboEnum:
    """A bijection N <-> combos of one space.

    Scalars: rationals via Calkin-Wilf with interleaved signs; Gaussian
    rationals as Cantor pairs of those.  F^n: nested Cantor pairing of the
    n coordinate codes.  l^2: the term list as (index gap, coefficient code)
    pairs, with lists coded by ``[] -> 0``, ``u::rest -> 1 + pair(u, code(rest))``.
    """

    VERSION = 1

    def __init__(self, space: SpaceDesc):
        self.space = space

    def _scalar_code(self, a: GaussianRational) -> int:
        if self.space.field == "real":
            if a.im != 0:
                raise ValueError("complex coefficient in a real space")
            return _rat_code(a.re)
        return cantor_pair(_rat_code(a.re), _rat_code(a.im))

    def _scalar(self, n: int) -> GaussianRational:
        if self.space.field == "real":
            return GaussianRational(_rat_decode(n))
        r, i = cantor_unpair(n)
        return GaussianRational(_rat_decode(r), _rat_decode(i))

    def index(self, c: FiniteCombo) -> int:
        self.space.check_combo(c)
        if self.space.kind == "findim":
            codes = [self._scalar_code(c.coeff(j)) for j in range(self.space.dim)]
            acc = codes[-1]
            for code in reversed(codes[:-1]):
                acc = cantor_pair(code, acc)
            return acc
        acc = 0
        prev = -1
        pairs = []
        for j, a in c.terms:
            pairs.append(cantor_pair(j - prev - 1, self._scalar_code(a) - 1))
            prev = j
        for u in reversed(pairs):
            acc = 1 + cantor_pair(u, acc)
        return acc

    def value(self, n: int) -> FiniteCombo:
        if n < 0:
            raise ValueError("indices are natural numbers")
        if self.space.kind == "findim":
            codes = []
            for _ in range(self.space.dim - 1):
                head, n = cantor_unpair(n)
                codes.append(head)
            codes.append(n)
            return combo((j, self._scalar(code)) for j, code in enumerate(codes))
        terms = []
        prev = -1
        while n:
            u, n = cantor_unpair(n - 1)
            gap, code = cantor_unpair(u)
            prev = prev + 1 + gap
            terms.append((prev, self._scalar(code + 1)))
        return FiniteCombo(tuple(terms))

    def basis_index(self, j: int) -> int:
        """g(j): the position of e_j in the enumeration."""
        return self.index(basis_combo(j))


def combo_enum(space: SpaceDesc, n: int) -> FiniteCombo:
    return ComboEnum(space).value(n)


def combo_index(space: SpaceDesc, c: FiniteCombo) -> int:
    return ComboEnum(space).index(c)


# --- JSON -----------------------------------------------------------------


def _coeff_text(a: GaussianRational) -> str:
    return serialize_rational(a.re) if a.im == 0 else serialize_gaussian(a)


def combo_to_json(c: FiniteCombo) -> list:
    return [{"index": j, "coeff": _coeff_text(a)} for j, a in c.terms]


def combo_from_json(obj) -> FiniteCombo:
    return combo((int(t["index"]), parse_gaussian(t["coeff"])) for t in obj)


def space_to_json(s: SpaceDesc) -> dict:
    out = {"kind": s.kind, "field": s.field}
    if s.kind == "findim":
        out["dim"] = s.dim
    return out


def space_from_json(obj) -> SpaceDesc:
    return SpaceDesc(obj["kind"], obj.get("dim"), obj.get("field", "complex"))
