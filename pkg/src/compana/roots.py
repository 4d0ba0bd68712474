"""Certified isolation of all complex roots of a polynomial.

The bounding square of the Cauchy disc is subdivided level by level.  A
square is discarded once a centered-form enclosure proves |p| > 0 on it.
Survivors are grouped into clusters, and a cluster's multiplicity is the
winding number of p around a contour that runs through discarded squares
only.  Coefficients may be exact Gaussian rationals or computable complex
numbers; the latter are snapshotted and the snapshot error is carried
through every enclosure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .creal import CComplex, CReal, creal_from_rational
from .scalars import GaussianRational, ceil_log2, parse_gaussian, pow2, rat_sqrt_approx

__all__ = [
    "CPoly",
    "RootCluster",
    "CertificateError",
    "RootBudgetError",
    "root_bound",
    "find_roots",
    "char_poly",
    "parse_poly",
    "poly_eval",
    "CHAR_POLY_CAP",
]

Coeff = Union[GaussianRational, CComplex]
G = GaussianRational


class CertificateError(ValueError):
    """The leading-coefficient lower bound was refuted."""


class RootBudgetError(RuntimeError):
    def __init__(self, message: str, partial: List["RootCluster"]):
        super().__init__(message)
        self.partial = partial


def _abs_upper(z: G) -> Fraction:
    if z.im == 0:
        return abs(z.re)
    if z.re == 0:
        return abs(z.im)
    return rat_sqrt_approx(z.abs2(), 40) + pow2(-40)


def _abs_lower(z: G) -> Fraction:
    if z.im == 0:
        return abs(z.re)
    if z.re == 0:
        return abs(z.im)
    return rat_sqrt_approx(z.abs2(), 40)


@dataclass(frozen=True)
class CPoly:
    """sum_k coeffs[k] x^k with a certified lower bound on |leading coefficient|."""

    coeffs: Tuple[Coeff, ...]
    lead_lower: Fraction

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def exact(self) -> bool:
        return all(isinstance(c, G) for c in self.coeffs)

    @classmethod
    def from_coeffs(cls, coeffs: Sequence, lead_lower: Optional[Fraction] = None) -> "CPoly":
        cs = tuple(c if isinstance(c, CComplex) else G.coerce(c) for c in coeffs)
        if len(cs) < 2:
            raise ValueError("polynomial must have degree at least 1")
        lead = cs[-1]
        if isinstance(lead, G):
            if not lead:
                raise ValueError("leading coefficient is zero")
            bound = _abs_lower(lead)
            if lead_lower is not None and lead_lower > bound:
                raise CertificateError(f"|leading coefficient| < claimed {lead_lower}")
            return cls(cs, Fraction(lead_lower) if lead_lower else bound)
        if lead_lower is None:
            for p in range(4, 512, 4):
                z = lead.approx(p)
                low = _abs_lower(z) - pow2(1 - p)
                if low > 0:
                    return cls(cs, low)
            raise CertificateError("could not certify a nonzero leading coefficient")
        if lead_lower <= 0:
            raise CertificateError("leading lower bound must be positive")
        return cls(cs, Fraction(lead_lower))

    def snapshot(self, p: int) -> Tuple[List[G], Fraction]:
        """Rational coefficients and a bound on each one's complex error."""
        out = []
        eps = Fraction(0)
        for c in self.coeffs:
            if isinstance(c, G):
                out.append(c)
            else:
                out.append(c.approx(p))
                eps = pow2(1 - p)
        if eps:
            if _abs_upper(out[-1]) + eps < self.lead_lower:
                raise CertificateError("leading coefficient smaller than its certified bound")
        return out, eps


@dataclass(frozen=True)
class RootCluster:
    center: G
    radius: Fraction
    multiplicity: int

    def contains(self, z: G) -> bool:
        return (z - self.center).abs2() <= self.radius * self.radius


def parse_poly(text: str) -> CPoly:
    """Comma-separated coefficients, low degree first, e.g. ``-2,0,1``."""
    parts = [t for t in text.replace(" ", "").split(",") if t]
    if not parts:
        raise ValueError("empty polynomial")
    coeffs = [parse_gaussian(t) for t in parts]
    while len(coeffs) > 1 and not coeffs[-1]:
        coeffs.pop()
    return CPoly.from_coeffs(coeffs)


def poly_eval(coeffs: Sequence[G], z: G) -> G:
    acc = G()
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def root_bound(p: CPoly, precision: int = 64) -> Fraction:
    """Cauchy bound 1 + max_k |a_k| / |a_n|."""
    coeffs, eps = p.snapshot(precision)
    top = max((_abs_upper(c) + eps for c in coeffs[:-1]), default=Fraction(0))
    return 1 + top / p.lead_lower


def _taylor(coeffs: Sequence[G], c: G) -> List[G]:
    """Coefficients of p(c + w) in w."""
    b = list(coeffs)
    n = len(b) - 1
    for k in range(n):
        for j in range(n - 1, k - 1, -1):
            b[j] = b[j] + c * b[j + 1]
    return b


def _cheap_abs(z: G) -> Fraction:
    return abs(z.re) + abs(z.im)


def _pow2_exponent(q: Fraction) -> int:
    d = q.denominator
    if d & (d - 1):
        raise ValueError("expected a dyadic rational")
    return d.bit_length() - 1


class _Evaluator:
    """Exclusion tests in scaled integer arithmetic.

    Multiplying p by the common denominator D of its coefficients and every
    quantity by a power of two changes no sign or comparison, so all tests
    run on Gaussian integers.
    """

    def __init__(self, coeffs: List[G], eps: Fraction):
        self.coeffs = coeffs
        self.eps = eps
        self.eps_limited = False
        self.n = len(coeffs) - 1
        d = 1
        for c in coeffs:
            d = math.lcm(d, c.re.denominator, c.im.denominator)
        self.D = d
        self.re = [int(c.re * d) for c in coeffs]
        self.im = [int(c.im * d) for c in coeffs]

    def excluded(self, center: G, half: Fraction) -> bool:
        """Certify p != 0 on the closed square of half-width ``half`` about ``center``."""
        w = 3 * half / 2  # >= half * sqrt(2)
        L = max(_pow2_exponent(center.re), _pow2_exponent(center.im), _pow2_exponent(w))
        scale = 1 << L
        cx, cy = int(center.re * scale), int(center.im * scale)
        W = int(w * scale)
        n = self.n
        br = [self.re[j] << (L * (n - j)) for j in range(n + 1)]
        bi = [self.im[j] << (L * (n - j)) for j in range(n + 1)]
        for k in range(n):
            for j in range(n - 1, k - 1, -1):
                xr, xi = br[j + 1], bi[j + 1]
                br[j] += cx * xr - cy * xi
                bi[j] += cx * xi + cy * xr
        tail = 0
        wk = 1
        for k in range(1, n + 1):
            wk *= W
            tail += (abs(br[k]) + abs(bi[k])) * wk
        b0 = br[0] * br[0] + bi[0] * bi[0]
        if self.eps:
            z = _cheap_abs(center) + w
            err = self.eps * self.D * (1 << (L * n)) * sum((z ** k for k in range(n + 1)), Fraction(0))
            if b0 > tail * tail and not b0 > (tail + err) ** 2:
                self.eps_limited = True
            return b0 > (tail + err) ** 2
        return b0 > tail * tail

    def values(self, points: List[G]) -> List[G]:
        """p at each point, all multiplied by one positive constant."""
        L = max(max(_pow2_exponent(z.re), _pow2_exponent(z.im)) for z in points)
        scale = 1 << L
        n = self.n
        out = []
        for z in points:
            zr, zi = int(z.re * scale), int(z.im * scale)
            ar, ai = self.re[n], self.im[n]
            for j in range(n - 1, -1, -1):
                ar, ai = ar * zr - ai * zi, ar * zi + ai * zr
                ar += self.re[j] << (L * (n - j))
                ai += self.im[j] << (L * (n - j))
            out.append(G(ar, ai))
        return out


def _winding(values: List[G]) -> int:
    """Winding number about 0 of the closed polygon through ``values``."""
    w = 0
    m = len(values)
    for i in range(m):
        a, b = values[i], values[(i + 1) % m]
        cross = a.re * b.im - a.im * b.re
        if a.im <= 0 < b.im and cross > 0:
            w += 1
        elif b.im <= 0 < a.im and cross < 0:
            w -= 1
    return w


class _Grid:
    def __init__(self, half_side: Fraction):
        self.r = half_side

    def side(self, level: int) -> Fraction:
        return 2 * self.r / (1 << level)

    def point(self, u: int, v: int, level: int) -> G:
        s = self.side(level)
        return G(-self.r + u * s, -self.r + v * s)

    def center(self, i: int, j: int, level: int) -> G:
        s = self.side(level)
        return G(-self.r + (2 * i + 1) * s / 2, -self.r + (2 * j + 1) * s / 2)


@dataclass
class _Cluster:
    cells: List[Tuple[int, int]]
    box: Tuple[int, int, int, int]  # i0, i1, j0, j1 inclusive

    def expanded_overlaps(self, other: "_Cluster") -> bool:
        a, b = self.box, other.box
        return a[0] - 1 <= b[1] + 1 and b[0] - 1 <= a[1] + 1 and a[2] - 1 <= b[3] + 1 and b[2] - 1 <= a[3] + 1


def _components(cells: List[Tuple[int, int]]) -> List[_Cluster]:
    todo = set(cells)
    out = []
    while todo:
        start = min(todo)
        todo.discard(start)
        stack, comp = [start], [start]
        while stack:
            i, j = stack.pop()
            for di in (-1, 0, 1):
                for dj in (-1, 0, 1):
                    nb = (i + di, j + dj)
                    if nb in todo:
                        todo.discard(nb)
                        stack.append(nb)
                        comp.append(nb)
        out.append(_box(comp))
    # merge until no two expanded boxes overlap
    merged = True
    while merged:
        merged = False
        for a in range(len(out)):
            for b in range(a + 1, len(out)):
                if out[a].expanded_overlaps(out[b]):
                    out[a] = _box(out[a].cells + out[b].cells)
                    del out[b]
                    merged = True
                    break
            if merged:
                break
    return out


def _box(cells) -> _Cluster:
    cells = sorted(cells)
    return _Cluster(
        cells,
        (min(c[0] for c in cells), max(c[0] for c in cells), min(c[1] for c in cells), max(c[1] for c in cells)),
    )


class _CertFail(Exception):
    pass


def _segment_points(ev: _Evaluator, a: G, b: G, offset: G, half: Fraction, depth: int) -> List[G]:
    """Points from a (inclusive) to b (exclusive) whose chords have certified enclosures."""
    mid = G((a.re + b.re) / 2, (a.im + b.im) / 2)
    if ev.excluded(mid + offset, half):
        return [a]
    if depth == 0:
        raise _CertFail
    half_off = G(offset.re / 2, offset.im / 2)
    return _segment_points(ev, a, mid, half_off, half / 2, depth - 1) + _segment_points(
        ev, mid, b, half_off, half / 2, depth - 1
    )


def _multiplicity(ev: _Evaluator, grid: _Grid, cl: _Cluster, level: int) -> int:
    i0, i1, j0, j1 = cl.box
    u0, u1, v0, v1 = i0 - 1, i1 + 2, j0 - 1, j1 + 2
    s = grid.side(level)
    half = s / 2
    pts: List[G] = []

    def walk(u_a, v_a, du, dv, nu, nv, steps):
        # edge from (u_a, v_a) in unit steps (du, dv); the ring cell lies toward (nu, nv)
        for t in range(steps):
            a = grid.point(u_a + t * du, v_a + t * dv, level)
            b = grid.point(u_a + (t + 1) * du, v_a + (t + 1) * dv, level)
            offset = G(nu * half, nv * half)
            pts.extend(_segment_points(ev, a, b, offset, half, 6))

    walk(u0, v0, 1, 0, 0, 1, u1 - u0)
    walk(u1, v0, 0, 1, -1, 0, v1 - v0)
    walk(u1, v1, -1, 0, 0, -1, u1 - u0)
    walk(u0, v1, 0, -1, 1, 0, v1 - v0)
    return _winding(ev.values(pts))


def _as_root_cluster(grid: _Grid, cl: _Cluster, level: int, mult: int) -> RootCluster:
    i0, i1, j0, j1 = cl.box
    lo = grid.point(i0, j0, level)
    hi = grid.point(i1 + 1, j1 + 1, level)
    center = G((lo.re + hi.re) / 2, (lo.im + hi.im) / 2)
    radius = ((hi.re - lo.re) + (hi.im - lo.im)) / 2
    return RootCluster(center, radius, mult)


def find_roots(
    p: CPoly,
    N: int,
    max_cells: int = 200_000,
    max_precision: int = 4096,
) -> List[RootCluster]:
    """Clusters of radius <= 2**-N covering every root, multiplicities summing to the degree.

    Raises :class:`RootBudgetError` (carrying the clusters found so far) when
    the cell budget or the coefficient-precision cap is exhausted.
    """
    n = p.degree
    tol = pow2(-N)
    precision = N + 16 + 4 * n
    while True:
        coeffs, eps = p.snapshot(precision)
        R = root_bound(p, precision)
        grid = _Grid(pow2(max(0, ceil_log2(R))))
        ev = _Evaluator(coeffs, eps)
        try:
            return _subdivide(ev, grid, n, tol, max_cells, N)
        except _NeedPrecision:
            precision *= 2
            if precision > max_precision:
                raise RootBudgetError("coefficient precision cap exceeded", []) from None


class _NeedPrecision(Exception):
    pass


def _subdivide(ev: _Evaluator, grid: _Grid, n: int, tol: Fraction, max_cells: int, N: int) -> List[RootCluster]:
    level = 0
    cells = [(0, 0)]
    best: List[RootCluster] = []
    level_cap = N + ceil_log2(grid.r) + 64
    while True:
        half = grid.side(level) / 2
        ev.eps_limited = False
        survivors = [c for c in cells if not ev.excluded(grid.center(c[0], c[1], level), half)]
        if ev.eps and ev.eps_limited:
            raise _NeedPrecision
        if not survivors:
            raise CertificateError("every square was excluded; the coefficient certificate is inconsistent")
        clusters = _components(survivors)
        small = all(
            _as_root_cluster(grid, cl, level, 0).radius <= tol for cl in clusters
        )
        if small or level % 4 == 0:
            try:
                mults = [_multiplicity(ev, grid, cl, level) for cl in clusters]
            except _CertFail:
                mults = None
            if mults is not None and sum(mults) == n and all(m > 0 for m in mults):
                found = [_as_root_cluster(grid, cl, level, m) for cl, m in zip(clusters, mults)]
                best = found
                if small:
                    return sorted(found, key=lambda r: (r.center.re, r.center.im))
        if 4 * len(survivors) > max_cells or level >= level_cap:
            raise RootBudgetError(f"subdivision budget exhausted at level {level}", best)
        cells = [(2 * i + a, 2 * j + b) for i, j in survivors for a in (0, 1) for b in (0, 1)]
        level += 1


# --- characteristic polynomials -------------------------------------------

CHAR_POLY_CAP = 8


def _char_poly_exact(A: List[List[G]]) -> List[G]:
    """Faddeev-LeVerrier: coefficients of det(lambda I - A), low degree first."""
    n = len(A)
    c = [G() for _ in range(n + 1)]
    c[n] = G(1)
    M = [[G() for _ in range(n)] for _ in range(n)]
    for k in range(1, n + 1):
        # M <- A M + c_{n-k+1} I
        AM = [[sum((A[i][t] * M[t][j] for t in range(n)), G()) for j in range(n)] for i in range(n)]
        for i in range(n):
            AM[i][i] = AM[i][i] + c[n - k + 1]
        M = AM
        tr = sum((sum((A[i][t] * M[t][i] for t in range(n)), G()) for i in range(n)), G())
        c[n - k] = G(-tr.re / k, -tr.im / k)
    return c


def char_poly(A: Sequence[Sequence[Coeff]]) -> CPoly:
    """det(lambda I - A) as a monic polynomial (exact for Gaussian-rational entries).

    Matrices larger than ``CHAR_POLY_CAP`` are refused.  For computable
    entries each coefficient is a computable complex number: the entries are
    snapshotted deep enough that the minor-expansion perturbation bound stays
    below the requested precision.
    """
    n = len(A)
    if n == 0 or any(len(row) != n for row in A):
        raise ValueError("char_poly needs a non-empty square matrix")
    if n > CHAR_POLY_CAP:
        raise ValueError(f"matrix size {n} exceeds the cap {CHAR_POLY_CAP}")
    if all(isinstance(a, G) or not isinstance(a, CComplex) for row in A for a in row):
        exact = [[G.coerce(a) for a in row] for row in A]
        return CPoly.from_coeffs(_char_poly_exact(exact), Fraction(1))
    entries = [[a if isinstance(a, CComplex) else _const(G.coerce(a)) for a in row] for row in A]
    cache: Dict[int, List[G]] = {}

    def coeffs_at(p: int) -> List[G]:
        hit = cache.get(p)
        if hit is not None:
            return hit
        bound = max(_cheap_abs(e.approx(0)) for row in entries for e in row) + 2
        # |delta c_k| <= sum_m C(n,m) m! m (B+1)^(m-1) delta over principal minors
        worst = sum(math.comb(n, m) * math.factorial(m) * m * int(math.ceil(bound + 1)) ** m for m in range(1, n + 1))
        q = p + 2 + ceil_log2(worst)
        snap = [[e.approx(q) for e in row] for row in entries]
        cache[p] = _char_poly_exact(snap)
        return cache[p]

    coeffs: List[Coeff] = []
    for k in range(n):
        coeffs.append(
            CComplex(
                CReal(lambda p, k=k: coeffs_at(p)[k].re),
                CReal(lambda p, k=k: coeffs_at(p)[k].im),
            )
        )
    coeffs.append(G(1))
    return CPoly.from_coeffs(coeffs, Fraction(1))


def _const(z: G) -> CComplex:
    return CComplex(creal_from_rational(z.re), creal_from_rational(z.im))
