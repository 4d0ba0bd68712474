"""Effectively determined bounded operators and their norms.

An operator is given by the images ``T e_j`` of the coordinate basis
together with a caller-supplied bound ``M >= ||T||``.  Boundedness cannot be
checked, so the bound is a certificate; :meth:`EffOperator.spot_check` tests
the necessary condition on sampled images.  Shape tags (diagonal, matrix,
finite rank) unlock exact fast paths without changing what ``op_apply``
computes.
"""

from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

from .creal import (
    CComplex,
    CReal,
    ccomplex_abs,
    ccomplex_conj,
    ccomplex_mul,
    ccomplex_sum,
    creal_from_rational,
    creal_sqrt,
    scale_shift,
)
from .roots import CHAR_POLY_CAP, _char_poly_exact, char_poly, find_roots
from .scalars import (
    GaussianRational,
    as_rational,
    ceil_log2,
    gaussian_from_json,
    gaussian_to_json,
    parse_rational,
    pow2,
    rat_sqrt_approx,
    serialize_rational,
)
from .spaces import (
    CVector,
    FiniteCombo,
    L2,
    SpaceDesc,
    SpaceMismatch,
    FinDim,
    basis_vector,
    combo,
    combo_from_json,
    combo_to_json,
    cvector_linear,
    cvector_norm,
    inner_product,
    merge_double_sum,
    norm_upper,
    space_from_json,
    space_to_json,
    vector_from_combo,
)
from .toyrec import (
    Asm,
    CeStage,
    Program,
    cantor_pair,
    cantor_unpair,
    decode,
    encode,
    halting_stage,
    run,
)

__all__ = [
    "EffOperator",
    "Diagonal",
    "Matrix",
    "FiniteRank",
    "General",
    "UnsupportedShape",
    "PreconditionError",
    "identity_operator",
    "diagonal_operator",
    "matrix_operator",
    "finite_rank_operator",
    "zero_operator",
    "op_apply",
    "op_compose",
    "op_sub",
    "op_adjoint_matrix",
    "findim_norm",
    "finite_rank_norm",
    "gram_product",
    "eff_compact_norm",
    "continuity_modulus",
    "Seminorm",
    "strong_seminorm",
    "weak_seminorm",
    "seminorm_eval",
    "BasicNbhd",
    "Membership",
    "nbhd_member_semidecide",
    "halting_norm_entry",
    "halting_norm_operator",
    "oex_operator",
    "h_index",
    "operator_from_index",
    "RefutationReport",
    "norm_bound_refuter",
    "const_program",
    "successor_program",
    "norm_pathology_RS",
    "PQPathology",
    "exp_i",
    "norm_pathology_PQ",
    "halting_thetas",
    "TriangleFunction",
    "triangle_function",
    "op_to_json",
    "op_from_json",
]

G = GaussianRational
Entry = Union[int, Fraction, GaussianRational, CReal, CComplex]


class UnsupportedShape(TypeError):
    pass


class PreconditionError(ValueError):
    pass


# --- shapes ---------------------------------------------------------------


@dataclass(frozen=True)
class Diagonal:
    """``entries(j)`` is the j-th diagonal entry.  ``values`` lists a finite
    prefix when the entries are known to vanish beyond it (for JSON)."""

    entries: Callable[[int], Entry]
    exact: bool = True
    values: Optional[Tuple[Entry, ...]] = None


@dataclass(frozen=True)
class Matrix:
    """Rows of a finite matrix; column j is the image of e_j."""

    rows: Tuple[Tuple[Entry, ...], ...]

    @property
    def exact(self) -> bool:
        return all(isinstance(a, G) for row in self.rows for a in row)


@dataclass(frozen=True)
class FiniteRank:
    """sum_i x_i (.) y_i, where (x (.) y)(z) = (z|y) x."""

    xs: Tuple[CVector, ...]
    ys: Tuple[CVector, ...]


@dataclass(frozen=True)
class General:
    pass


Shape = Union[Diagonal, Matrix, FiniteRank, General]


class EffOperator:
    """A bounded operator from the images of the basis and a bound certificate."""

    def __init__(
        self,
        domain: SpaceDesc,
        codomain: SpaceDesc,
        bound,
        images: Callable[[int], CVector],
        shape: Shape = General(),
        label: str = "",
        exact_norm: Optional[Fraction] = None,
    ):
        bound = as_rational(bound)
        if bound <= 0:
            raise ValueError("the bound certificate must be a positive rational")
        self.domain = domain
        self.codomain = codomain
        self.bound = bound
        self.shape = shape
        self.label = label
        self.exact_norm = exact_norm
        self._images = images
        self._cache: Dict[int, CVector] = {}
        self._lock = threading.Lock()

    def images(self, j: int) -> CVector:
        self.domain.check_index(j)
        with self._lock:
            hit = self._cache.get(j)
        if hit is not None:
            return hit
        v = self._images(j)
        if v.space != self.codomain:
            raise SpaceMismatch(f"image of e_{j} lies in {v.space}, not {self.codomain}")
        with self._lock:
            return self._cache.setdefault(j, v)

    @property
    def exact_images(self) -> bool:
        s = self.shape
        return (isinstance(s, Diagonal) and s.exact) or (isinstance(s, Matrix) and s.exact)

    def spot_check(self, js: Sequence[int], N: int) -> bool:
        """Necessary condition ||T e_j|| <= M + 2**-N on the sampled j."""
        for j in js:
            if cvector_norm(self.images(j)).approx(N + 1) > self.bound + pow2(-N) + pow2(-N - 1):
                return False
        return True

    def __repr__(self):
        kind = type(self.shape).__name__
        return f"<EffOperator {kind} {self.domain}->{self.codomain} M={self.bound}{' ' + self.label if self.label else ''}>"


def _bound_shift(M: Fraction) -> int:
    """K with 2**K >= M, at least 0."""
    return max(0, ceil_log2(M))


def _entry_vector(space: SpaceDesc, j: int, a: Entry) -> CVector:
    """The vector a e_j."""
    if isinstance(a, CReal):
        return CVector(space, lambda n: combo([(j, a.approx(n))]))
    if isinstance(a, CComplex):
        # componentwise 2^-(n+1) gives modulus error below 2^-n
        return CVector(space, lambda n: combo([(j, a.approx(n + 1))]))
    return vector_from_combo(space, combo([(j, G.coerce(a))]))


def _entry_approx(a: Entry, n: int) -> G:
    """A Gaussian rational within 2**-n of the entry."""
    if isinstance(a, CReal):
        return G(a.approx(n))
    if isinstance(a, CComplex):
        return a.approx(n + 1)
    return G.coerce(a)


def _entry_upper(a: Entry) -> Fraction:
    if isinstance(a, CReal):
        return abs(a.approx(0)) + 1
    if isinstance(a, CComplex):
        return a.approx(0).abs_upper() + 2
    return G.coerce(a).abs_upper()


# --- constructors ---------------------------------------------------------


def identity_operator(space: SpaceDesc) -> EffOperator:
    return EffOperator(
        space, space, 1, lambda j: basis_vector(space, j),
        Diagonal(lambda j: Fraction(1)), label="I", exact_norm=Fraction(1),
    )


def zero_operator(space: SpaceDesc) -> EffOperator:
    return EffOperator(
        space, space, 1, lambda j: vector_from_combo(space, FiniteCombo()),
        Diagonal(lambda j: Fraction(0), values=()), label="0", exact_norm=Fraction(0),
    )


def diagonal_operator(
    space: SpaceDesc,
    entries: Union[Callable[[int], Entry], Sequence[Entry]],
    bound=None,
    label: str = "",
    exact_norm: Optional[Fraction] = None,
) -> EffOperator:
    """Diagonal operator; a finite list of entries is padded with zeros.

    A bound is required for a callable (the supremum is not computable in
    general); for a list it defaults to the largest entry modulus.
    """
    values = None
    if not callable(entries):
        values = tuple(e if isinstance(e, (CReal, CComplex)) else G.coerce(e) for e in entries)
        if space.kind == "findim" and len(values) > space.dim:
            raise PreconditionError("more diagonal entries than dimensions")
        table = values
        entries = lambda j: table[j] if j < len(table) else G()
        if bound is None:
            bound = max((_entry_upper(a) for a in values), default=Fraction(0))
            bound = bound if bound > 0 else Fraction(1)
    if bound is None:
        raise PreconditionError("a diagonal operator given by a rule needs a bound certificate")
    exact = values is not None and all(isinstance(a, G) for a in values)
    if values is None:
        # exactness of a rule is known only from its first entry's type
        exact = not isinstance(entries(0), (CReal, CComplex))
    return EffOperator(
        space, space, bound, lambda j: _entry_vector(space, j, entries(j)),
        Diagonal(entries, exact, values), label=label, exact_norm=exact_norm,
    )


def _matrix_bound(rows) -> Fraction:
    """Frobenius norm, rounded up."""
    total = sum((_entry_upper(a) ** 2 for row in rows for a in row), Fraction(0))
    if total == 0:
        return Fraction(1)
    return rat_sqrt_approx(total, 16) + pow2(-16)


def matrix_operator(rows: Sequence[Sequence[Entry]], bound=None, field: str = "complex", label: str = "") -> EffOperator:
    """The operator F^cols -> F^rows with the given entries."""
    rows = tuple(tuple(a if isinstance(a, (CReal, CComplex)) else G.coerce(a) for a in row) for row in rows)
    rows = tuple(tuple(CComplex(a, creal_from_rational(0)) if isinstance(a, CReal) else a for a in row) for row in rows)
    if not rows or not rows[0] or any(len(r) != len(rows[0]) for r in rows):
        raise ValueError("matrix rows must be non-empty and of equal length")
    dom, cod = FinDim(len(rows[0]), field), FinDim(len(rows), field)
    shape = Matrix(rows)

    def image(j):
        col = [(i, rows[i][j]) for i in range(len(rows))]
        if all(isinstance(a, G) for _, a in col):
            return vector_from_combo(cod, combo(col))
        vs = [_entry_vector(cod, i, a) for i, a in col]
        return cvector_linear(vs, [1] * len(vs))

    return EffOperator(dom, cod, bound if bound is not None else _matrix_bound(rows), image, shape, label)


def finite_rank_operator(xs: Sequence[CVector], ys: Sequence[CVector], label: str = "") -> EffOperator:
    """z -> sum_i (z|y_i) x_i; the bound is sum_i ||x_i|| ||y_i|| rounded up."""
    xs, ys = tuple(xs), tuple(ys)
    if len(xs) != len(ys) or not xs:
        raise ValueError("finite-rank data needs equally many x's and y's, at least one")
    cod = _one_space(xs)
    dom = _one_space(ys)
    bound = Fraction(0)
    for x, y in zip(xs, ys):
        bound += (norm_upper(x.approx(0), 8) + 1) * (norm_upper(y.approx(0), 8) + 1)

    def image(j):
        if all(v.exact is not None for v in xs + ys):
            total = FiniteCombo()
            for x, y in zip(xs, ys):
                total = total + x.exact.scale(y.exact.coeff(j).conjugate())
            return vector_from_combo(cod, total)
        e = basis_vector(dom, j)
        coeffs = [inner_product(e, y) for y in ys]
        return cvector_linear(list(xs), coeffs)

    return EffOperator(dom, cod, bound, image, FiniteRank(xs, ys), label)


def _one_space(vs: Sequence[CVector]) -> SpaceDesc:
    s = vs[0].space
    for v in vs[1:]:
        if v.space != s:
            raise SpaceMismatch(f"{s} vs {v.space}")
    return s


# --- application and algebra ----------------------------------------------


def op_apply(T: EffOperator, x: CVector) -> CVector:
    """Tx with a geometric modulus.

    At precision N, x is read at N+1+K with 2**K >= M, so the truncation
    costs at most 2**-(N+1).  Image j is read at
    l_j = N+2+ceil(log2(m (ceil|a_j|+1))), making the image errors sum to at
    most 2**-(N+2).  The images are merged into one combination by
    Heaviside re-indexing.
    """
    if x.space != T.domain:
        raise SpaceMismatch(f"operator on {T.domain} applied to a vector in {x.space}")
    if x.exact is not None and T.exact_images:
        total = FiniteCombo()
        for j, a in x.exact.terms:
            total = total + T.images(j).exact.scale(a)
        return vector_from_combo(T.codomain, total)
    K = _bound_shift(T.bound)
    diag = T.shape if isinstance(T.shape, Diagonal) else None

    def approx(n):
        A = x.approx(n + 1 + K)
        m = len(A.terms)
        if m == 0:
            return FiniteCombo()
        if diag is not None:
            out = []
            for j, a in A.terms:
                l = n + 2 + ceil_log2(m * (math.ceil(a.abs_upper()) + 1))
                out.append((j, a * _entry_approx(diag.entries(j), l)))
            return combo(out)
        parts, alphas = [], []
        for j, a in A.terms:
            l = n + 2 + ceil_log2(m * (math.ceil(a.abs_upper()) + 1))
            img = T.images(j)
            parts.append((img.exact if img.exact is not None else img.approx(l)).as_dict())
            alphas.append(a)
        tops = [max(d) if d else -1 for d in parts]
        cs = merge_double_sum(
            m - 1,
            lambda k: tops[k],
            lambda i, k: alphas[k] * parts[k].get(i, G()),
        )
        return combo(enumerate(cs))

    return CVector(T.codomain, approx)


def _mat_mul(A, B):
    return tuple(
        tuple(sum((A[i][t] * B[t][j] for t in range(len(B))), G()) for j in range(len(B[0])))
        for i in range(len(A))
    )


def op_compose(F: EffOperator, Gop: EffOperator) -> EffOperator:
    """F o G: images F(G e_j), bound M_F M_G."""
    if Gop.codomain != F.domain:
        raise SpaceMismatch(f"cannot compose: {Gop.codomain} vs {F.domain}")
    bound = F.bound * Gop.bound
    label = f"({F.label}.{Gop.label})" if F.label and Gop.label else ""
    if isinstance(F.shape, Matrix) and isinstance(Gop.shape, Matrix) and F.shape.exact and Gop.shape.exact:
        T = matrix_operator(_mat_mul(F.shape.rows, Gop.shape.rows), bound, F.codomain.field, label)
        return T
    if isinstance(F.shape, Diagonal) and isinstance(Gop.shape, Diagonal) and F.shape.exact and Gop.shape.exact:
        fe, ge = F.shape.entries, Gop.shape.entries
        return diagonal_operator(F.domain, lambda j: G.coerce(fe(j)) * G.coerce(ge(j)), bound, label)
    return EffOperator(Gop.domain, F.codomain, bound, lambda j: op_apply(F, Gop.images(j)), General(), label)


def op_sub(T: EffOperator, S: EffOperator) -> EffOperator:
    """T - S, with bound M_T + M_S."""
    if T.domain != S.domain or T.codomain != S.codomain:
        raise SpaceMismatch("operators act between different spaces")
    bound = T.bound + S.bound
    if isinstance(T.shape, Diagonal) and isinstance(S.shape, Diagonal) and T.shape.exact and S.shape.exact:
        te, se = T.shape.entries, S.shape.entries
        return diagonal_operator(T.domain, lambda j: G.coerce(te(j)) - G.coerce(se(j)), bound)
    return EffOperator(
        T.domain, T.codomain, bound,
        lambda j: cvector_linear([T.images(j), S.images(j)], [1, -1]),
    )


def op_adjoint_matrix(T: EffOperator) -> EffOperator:
    """Conjugate transpose of a matrix-shaped operator; the bound carries over."""
    if not isinstance(T.shape, Matrix):
        raise UnsupportedShape("the adjoint is implemented for matrix-shaped operators only")
    rows = T.shape.rows
    adj = tuple(
        tuple(_conj(rows[i][j]) for i in range(len(rows)))
        for j in range(len(rows[0]))
    )
    return matrix_operator(adj, T.bound, T.domain.field, f"{T.label}*" if T.label else "")


def _conj(a):
    return ccomplex_conj(a) if isinstance(a, CComplex) else a.conjugate()


# --- norms ----------------------------------------------------------------


def _as_cc(a) -> CComplex:
    if isinstance(a, CComplex):
        return a
    a = G.coerce(a)
    return CComplex(creal_from_rational(a.re), creal_from_rational(a.im))


def _matrix_product_any(A, B):
    """Product of square matrices whose entries are Gaussian rationals or CComplex."""
    n, k, m = len(A), len(B), len(B[0])
    exact = all(isinstance(a, G) for row in A for a in row) and all(isinstance(b, G) for row in B for b in row)
    if exact:
        return _mat_mul(A, B)
    return tuple(
        tuple(ccomplex_sum([ccomplex_mul(_as_cc(A[i][t]), _as_cc(B[t][j])) for t in range(k)]) for j in range(m))
        for i in range(n)
    )


def _sign_variations(coeffs: Sequence[Fraction]) -> int:
    signs = [c > 0 for c in coeffs if c != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _roots_above(coeffs: Sequence[Fraction], t: Fraction) -> int:
    """Roots of a real-rooted polynomial strictly above t (Descartes is exact here)."""
    b = list(coeffs)
    n = len(b) - 1
    for k in range(n):
        for j in range(n - 1, k - 1, -1):
            b[j] = b[j] + t * b[j + 1]
    return _sign_variations(b)


def _top_eigenvalue(B, P: int) -> Fraction:
    """A rational within 2**-P of the largest eigenvalue of B, whose spectrum is real.

    Up to the characteristic-polynomial cap the roots module isolates every
    eigenvalue; each returned cluster contains a real eigenvalue, so the
    largest real part of a cluster center is within one radius of the top.
    Larger exact matrices fall back to bisection with the Descartes count.
    """
    n = len(B)
    if n <= CHAR_POLY_CAP:
        clusters = find_roots(char_poly(B), P)
        return max(c.center.re for c in clusters)
    if not all(isinstance(a, G) for row in B for a in row):
        raise ValueError(f"matrix size {n} exceeds the cap {CHAR_POLY_CAP} for computable entries")
    cs = _char_poly_exact([list(row) for row in B])
    if any(c.im != 0 for c in cs):
        raise ValueError("characteristic polynomial is not real; the spectrum is not real")
    real = [c.re for c in cs]
    R = 1 + max(abs(c) for c in real[:-1])
    lo, hi = Fraction(0), pow2(ceil_log2(R))
    if _roots_above(real, lo) == 0:
        return Fraction(0)
    while hi - lo > pow2(-P):
        mid = (lo + hi) / 2
        if _roots_above(real, mid) > 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def _sqrt_top(B, label: str = "") -> CReal:
    """sqrt of the largest eigenvalue of a matrix similar to a PSD one.

    The eigenvalue is pinned to 2**-(2N+2), which moves the root by at most
    2**-(N+1); the rational square root adds another 2**-(N+1).
    """

    def approx(N):
        l = _top_eigenvalue(B, 2 * N + 2)
        return rat_sqrt_approx(max(l, Fraction(0)), N + 1)

    return CReal(approx, label)


def findim_norm(T: EffOperator) -> CReal:
    """||A|| = sqrt of the largest eigenvalue of A*A."""
    if not isinstance(T.shape, Matrix):
        raise UnsupportedShape("findim_norm needs a matrix-shaped operator")
    A = T.shape.rows
    Astar = tuple(tuple(_conj(A[i][j]) for i in range(len(A))) for j in range(len(A[0])))
    return _sqrt_top(_matrix_product_any(Astar, A), "findim_norm")


def _gram(vs: Sequence[CVector]):
    """(G)_ij = (v_j | v_i)."""
    n = len(vs)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            if vs[i].exact is not None and vs[j].exact is not None:
                row.append(vs[j].exact.inner(vs[i].exact))
            else:
                row.append(inner_product(vs[j], vs[i]))
        out.append(tuple(row))
    return tuple(out)


def gram_product(xs: Sequence[CVector], ys: Sequence[CVector]):
    """Gx Gy, whose largest eigenvalue is ||sum_i x_i (.) y_i||**2."""
    xs, ys = list(xs), list(ys)
    if len(xs) != len(ys):
        raise ValueError("xs and ys differ in length")
    if not xs:
        raise ValueError("finite-rank data needs at least one term")
    _one_space(xs)
    _one_space(ys)
    return _matrix_product_any(_gram(xs), _gram(ys))


def finite_rank_norm(xs: Sequence[CVector], ys: Sequence[CVector]) -> CReal:
    """||sum_i x_i (.) y_i|| from the spectrum of the Gram product.

    With X c = sum c_i x_i and Y likewise, T = X Y* and TT* = X (Y*Y) X*,
    whose nonzero spectrum is that of (X*X)(Y*Y) = Gx Gy.
    """
    return _sqrt_top(gram_product(xs, ys), "finite_rank_norm")


def eff_compact_norm(
    seq: Callable[[int], Tuple[Sequence[CVector], Sequence[CVector]]],
    modulus: Callable[[int], int],
) -> CReal:
    """Norm of an effective limit of finite-rank operators.

    Since | ||T_k|| - ||T|| | <= ||T_k - T||, the norms converge with the
    same modulus: term modulus(N+1) is read at N+1.
    """
    cache: Dict[int, CReal] = {}

    def norm_of(k):
        if k not in cache:
            xs, ys = seq(k)
            cache[k] = finite_rank_norm(xs, ys)
        return cache[k]

    return CReal(lambda n: norm_of(modulus(n + 1)).approx(n + 1), "eff_compact_norm")


def continuity_modulus(T: EffOperator, N: int) -> Fraction:
    """delta with ||x - y|| <= delta  =>  ||Tx - Ty|| <= 2**-N."""
    return pow2(-(N + _bound_shift(T.bound)))


# --- operator topologies --------------------------------------------------


@dataclass(frozen=True)
class Seminorm:
    """``strong``: m_x(T) = ||Tx||.  ``weak``: m_{x,y}(T) = |(y|Tx)|."""

    kind: str
    x: CVector
    y: Optional[CVector] = None

    def __post_init__(self):
        if self.kind not in ("strong", "weak"):
            raise ValueError(f"unknown seminorm kind {self.kind!r}")
        if (self.kind == "weak") != (self.y is not None):
            raise ValueError("a weak seminorm takes two witnesses, a strong one takes one")


def strong_seminorm(x: CVector) -> Seminorm:
    return Seminorm("strong", x)


def weak_seminorm(x: CVector, y: CVector) -> Seminorm:
    return Seminorm("weak", x, y)


def seminorm_eval(s: Seminorm, T: EffOperator) -> CReal:
    Tx = op_apply(T, s.x)
    if s.kind == "strong":
        return cvector_norm(Tx)
    if s.y.space != T.codomain:
        raise SpaceMismatch(f"witness in {s.y.space}, operator maps into {T.codomain}")
    return ccomplex_abs(inner_product(s.y, Tx))


@dataclass(frozen=True)
class BasicNbhd:
    """{T : m(T - center) < radius for every listed seminorm m}."""

    center: EffOperator
    radius: Fraction
    seminorms: Tuple[Seminorm, ...]

    def __post_init__(self):
        object.__setattr__(self, "radius", as_rational(self.radius))
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    @classmethod
    def strong(cls, center: EffOperator, radius, xs: Sequence[CVector]) -> "BasicNbhd":
        return cls(center, radius, tuple(strong_seminorm(x) for x in xs))

    @classmethod
    def weak(cls, center: EffOperator, radius, pairs: Sequence[Tuple[CVector, CVector]]) -> "BasicNbhd":
        return cls(center, radius, tuple(weak_seminorm(x, y) for x, y in pairs))


class Membership(enum.Enum):
    INSIDE = "Inside"
    OUTSIDE = "Outside"
    UNRESOLVED = "Unresolved"


def nbhd_member_semidecide(B: BasicNbhd, T: EffOperator, budget: int = 40) -> Membership:
    """Refine each seminorm of T - center up to precision ``budget``.

    Inside needs every value certified below the radius; one value certified
    above it gives Outside.  Values equal to the radius stay unresolved.
    """
    D = op_sub(T, B.center)
    values = [seminorm_eval(s, D) for s in B.seminorms]
    pending = list(range(len(values)))
    for n in range(budget + 1):
        eps = pow2(-n)
        still = []
        for i in pending:
            a = values[i].approx(n)
            if a - eps > B.radius:
                return Membership.OUTSIDE
            if a + eps >= B.radius:
                still.append(i)
        pending = still
        if not pending:
            return Membership.INSIDE
    return Membership.UNRESOLVED


# --- an operator with non-computable norm ---------------------------------


def halting_norm_entry(stage: CeStage) -> Fraction:
    """sum over k in K_n, k >= 1, of 2**-k."""
    return sum((pow2(-k) for k in stage.members if k >= 1), Fraction(0))


def halting_norm_operator(stage_source: Callable[[int], CeStage] = halting_stage) -> EffOperator:
    """Diagonal on l2 with entry n equal to the weight of K_n.

    Entries increase with n and their supremum is r_K, the weight of the
    whole self-halting set, a left-computable real with no computable
    modulus.  The bound 1 is certain; the norm is not computable.
    """
    cache: Dict[int, Fraction] = {}
    lock = threading.Lock()

    def entry(n):
        with lock:
            hit = cache.get(n)
        if hit is None:
            hit = halting_norm_entry(stage_source(n))
            with lock:
                cache[n] = hit
        return hit

    T = diagonal_operator(L2(), entry, bound=1, label="halting-norm")
    return T


def h_index(e: int, x: int) -> int:
    """Operator index of O^{ex}: 2x on the diagonal e == x, else 2<e,x>+1."""
    return 2 * x if e == x else 2 * cantor_pair(e, x) + 1


def _h_inverse(i: int) -> Tuple[int, int]:
    if i % 2 == 0:
        return i // 2, i // 2
    return cantor_unpair((i - 1) // 2)


def oex_operator(e: Union[int, Program], x: int, budget: int) -> EffOperator:
    """O^{ex}: diagonal with a_ss = phi_{e,s}(x) once that has halted, else 0.

    The norm is phi_e(x) or 0, which is what the bound certificate needs;
    it is found by running phi_e(x) within ``budget`` steps.
    """
    p = e if isinstance(e, Program) else decode(e)
    r = run(p, {0: x}, budget)
    if not r.halted and not r.diverges:
        from .numberings import BudgetExhausted

        raise BudgetExhausted(f"phi_e({x}) undecided after {budget} steps")
    if not r.halted:
        return diagonal_operator(L2(), lambda s: Fraction(0), bound=1, label=f"O^({e},{x})", exact_norm=Fraction(0))
    t, v = r.steps, r.value

    def entry(s):
        return Fraction(v) if s >= t else Fraction(0)

    T = diagonal_operator(L2(), entry, bound=max(v, 1), label=f"O^({e},{x})", exact_norm=Fraction(v))
    T.halting_time = t
    return T


def operator_from_index(i: int, budget: int) -> EffOperator:
    """T^i = O^{ex} for (e, x) recovered from the pairing ``h_index``."""
    e, x = _h_inverse(i)
    return oex_operator(e, x, budget)


def const_program(value: int) -> Program:
    """x -> value."""
    asm = Asm(1)
    asm.clear(0)
    asm.load(0, value)
    asm.halt()
    return asm.assemble()


def successor_program() -> Program:
    """x -> x + 1."""
    asm = Asm(1)
    asm.inc(0)
    asm.halt()
    return asm.assemble()


def _diagonal_refuter_program(g: Program) -> Program:
    """k(x) = g(h(x, x)) + 1, where h(x, x) = 2x."""
    asm = Asm(g.max_register + 1)
    asm.double(0)
    after = asm.fresh_label("after_g")
    asm.inline(g, after)
    asm.label(after)
    asm.inc(0)
    asm.halt()
    return asm.assemble()


@dataclass(frozen=True)
class RefutationReport:
    """The witness c against a claimed bound g(e) > ||T^e||."""

    c: int
    operator_index: int  # h(c, c)
    claimed_bound: int  # g(h(c, c))
    phi_c_c: int  # k(c) = g(h(c, c)) + 1
    norm: int  # ||O^{cc}||, by the diagonal-sup rule
    halting_time: int
    program: Program

    @property
    def violated(self) -> bool:
        return self.norm > self.claimed_bound

    def to_json(self) -> dict:
        return {
            "c_bits": self.c.bit_length(),
            "c": str(self.c),
            "h_cc": str(self.operator_index),
            "g_h_cc": self.claimed_bound,
            "phi_c_c": self.phi_c_c,
            "norm_O_cc": self.norm,
            "halting_time": str(self.halting_time),
            "inequality": f"{self.norm} > {self.claimed_bound}",
            "violated": self.violated,
        }


def norm_bound_refuter(g: Union[int, Program], budget: Optional[int] = None) -> RefutationReport:
    """Refute the claim that g(e) > ||T^e|| for every operator index e.

    The program k(x) = g(h(x, x)) + 1 is assembled; with c its index,
    ||O^{cc}|| = phi_c(c) = g(h(c, c)) + 1, which exceeds g(h(c, c)).
    """
    from .numberings import BudgetExhausted

    gp = g if isinstance(g, Program) else decode(g)
    k = _diagonal_refuter_program(gp)
    c = encode(k)
    if budget is None:
        budget = 1 << (2 * c.bit_length() + 256)
    hcc = h_index(c, c)
    claim = run(gp, {0: hcc}, budget)
    if not claim.halted:
        raise BudgetExhausted(f"g did not halt on h(c, c) within {budget} steps")
    O = operator_from_index(hcc, budget)
    v = int(O.exact_norm)
    return RefutationReport(c, hcc, claim.value, v, v, O.halting_time, k)


# --- sums of operators with computable norms ------------------------------


def norm_pathology_RS(T: EffOperator, M_int: int) -> Tuple[EffOperator, EffOperator]:
    """R, S with ||R|| = ||S|| = M_int exactly and R + S = T.

    r_00 = M_int and s_00 = -M_int; beyond index 0 both carry half of T's
    entry, which keeps the sum equal to T and both norms at M_int.  This
    needs t_00 = 0.
    """
    if not isinstance(T.shape, Diagonal) or not T.shape.exact:
        raise UnsupportedShape("R, S are built from an exact diagonal operator")
    if Fraction(M_int) <= T.bound:
        raise PreconditionError(f"M_int = {M_int} must exceed the bound {T.bound}")
    t = T.shape.entries
    if G.coerce(t(0)):
        raise PreconditionError("the first diagonal entry of T must vanish")
    M = Fraction(M_int)

    def half(j):
        return G.coerce(t(j)) / 2

    R = diagonal_operator(T.domain, lambda j: G(M) if j == 0 else half(j), bound=M, label="R", exact_norm=M)
    S = diagonal_operator(T.domain, lambda j: G(-M) if j == 0 else half(j), bound=M, label="S", exact_norm=M)
    return R, S


def exp_i(theta, n: int) -> G:
    """e^{i theta} to 2**-n per component, by the Taylor series.

    The tail after the term of degree m is bounded by |theta|^(m+1)/(m+1)!;
    the sum is then rounded to the grid 2**-(n+2).
    """
    theta = as_rational(theta)
    target = pow2(-(n + 1))
    re, im = Fraction(0), Fraction(0)
    term = Fraction(1)
    k = 0
    while True:
        r = k % 4
        if r == 0:
            re += term
        elif r == 1:
            im += term
        elif r == 2:
            re -= term
        else:
            im -= term
        k += 1
        term = term * theta / k
        if abs(term) <= target:
            break
    scale = 1 << (n + 2)
    return G(Fraction(round(re * scale), scale), Fraction(round(im * scale), scale))


def _exp_i_creal(theta: Fraction) -> CComplex:
    cache: Dict[int, G] = {}

    def at(n):
        if n not in cache:
            cache[n] = exp_i(theta, n)
        return cache[n]

    return CComplex(CReal(lambda n: at(n).re), CReal(lambda n: at(n).im))


@dataclass
class PQPathology:
    """P = diag(e^{i theta_j}), Q = I; ||P + Q|| = sup_n |e^{i theta_n} + 1|."""

    P: EffOperator
    Q: EffOperator
    thetas: Callable[[int], Fraction]

    def stage_abs2(self, n: int, bits: int = 40) -> Tuple[Fraction, Fraction]:
        """Rational enclosure of |e^{i theta_n} + 1|**2 = 2 + 2 cos(theta_n)."""
        z = exp_i(self.thetas(n), bits)
        c = z.re
        err = pow2(-bits)
        return 2 + 2 * (c - err), 2 + 2 * (c + err)

    def stage_norm(self, n: int) -> CReal:
        theta = self.thetas(n)
        return creal_sqrt(CReal(lambda m: 2 + 2 * exp_i(theta, m + 2).re))

    def stage_leq(self, a: int, b: int, max_bits: int = 256) -> bool:
        """Certified |e^{i theta_a}+1| <= |e^{i theta_b}+1|."""
        ta, tb = self.thetas(a), self.thetas(b)
        if ta == tb:
            return True
        bits = 16
        while bits <= max_bits:
            la, ha = self.stage_abs2(a, bits)
            lb, hb = self.stage_abs2(b, bits)
            if ha < lb:
                return True
            if hb < la:
                return False
            bits *= 2
        raise ArithmeticError("stage values not separated within the precision cap")


def norm_pathology_PQ(thetas: Callable[[int], Fraction], check_terms: int = 64) -> PQPathology:
    """Build P and Q from a descending sequence of rational angles in (0, 2].

    Only the first ``check_terms`` angles can be checked for monotonicity.
    Since cos decreases on [0, 2], the stage values |e^{i theta_n} + 1|
    increase with n.
    """
    prev = None
    for j in range(check_terms):
        t = as_rational(thetas(j))
        if not 0 < t <= 2:
            raise PreconditionError(f"theta_{j} = {t} outside (0, 2]")
        if prev is not None and t > prev:
            raise PreconditionError(f"theta_{j} = {t} exceeds theta_{j - 1} = {prev}")
        prev = t
    cache: Dict[int, CComplex] = {}

    def entry(j):
        if j not in cache:
            cache[j] = _exp_i_creal(as_rational(thetas(j)))
        return cache[j]

    P = diagonal_operator(L2(), entry, bound=1, label="P", exact_norm=Fraction(1))
    Q = identity_operator(L2())
    return PQPathology(P, Q, lambda j: as_rational(thetas(j)))


def halting_thetas(stage_source: Callable[[int], CeStage] = halting_stage) -> Callable[[int], Fraction]:
    """theta_n = 3/2 - weight(K_n): rational, descending, limit 3/2 - r_K in [1/2, 3/2]."""
    return lambda n: Fraction(3, 2) - halting_norm_entry(stage_source(n))


# --- triangle functions ---------------------------------------------------


@dataclass(frozen=True)
class TriangleFunction:
    """The hat with support [x1, x2] and apex h at the midpoint."""

    x1: Fraction
    x2: Fraction
    h: Fraction

    @property
    def slope(self) -> Fraction:
        return 2 * self.h / (self.x2 - self.x1)

    @property
    def mid(self) -> Fraction:
        return (self.x1 + self.x2) / 2

    def at(self, q) -> Fraction:
        q = as_rational(q)
        return max(Fraction(0), self.h - self.slope * abs(q - self.mid))

    def __call__(self, x: Union[CReal, Fraction, int]) -> CReal:
        if not isinstance(x, CReal):
            return creal_from_rational(self.at(x))
        # Lipschitz with the slope: read x that many bits deeper
        k = scale_shift(self.slope)
        return CReal(lambda n: self.at(x.approx(n + k)))


def triangle_function(x1, x2, h) -> TriangleFunction:
    x1, x2, h = as_rational(x1), as_rational(x2), as_rational(h)
    if not x1 < x2:
        raise PreconditionError("the support needs x1 < x2")
    if h <= 0:
        raise PreconditionError("the apex height must be positive")
    return TriangleFunction(x1, x2, h)


# --- JSON descriptors -----------------------------------------------------


def op_to_json(T: EffOperator) -> dict:
    """{shape, space, bound, data} for exact matrix, finite diagonal and finite-rank operators."""
    s = T.shape
    out = {"space": space_to_json(T.domain), "bound": serialize_rational(T.bound)}
    if isinstance(s, Matrix):
        if not s.exact:
            raise UnsupportedShape("only exact matrices serialize")
        out["shape"] = "matrix"
        out["codomain"] = space_to_json(T.codomain)
        out["data"] = [[gaussian_to_json(a) for a in row] for row in s.rows]
    elif isinstance(s, Diagonal):
        if s.values is None or not s.exact:
            raise UnsupportedShape("only finite exact diagonals serialize")
        out["shape"] = "diagonal"
        out["data"] = [gaussian_to_json(a) for a in s.values]
    elif isinstance(s, FiniteRank):
        if any(v.exact is None for v in s.xs + s.ys):
            raise UnsupportedShape("only exact finite-rank data serializes")
        out["shape"] = "finite_rank"
        out["data"] = {
            "xs": [combo_to_json(v.exact) for v in s.xs],
            "ys": [combo_to_json(v.exact) for v in s.ys],
        }
    else:
        raise UnsupportedShape("general operators have no finite descriptor")
    return out


def op_from_json(obj: dict) -> EffOperator:
    shape = obj["shape"]
    space = space_from_json(obj["space"])
    bound = parse_rational(obj["bound"]) if "bound" in obj else None
    if shape == "matrix":
        rows = [[gaussian_from_json(a) for a in row] for row in obj["data"]]
        return matrix_operator(rows, bound, space.field)
    if shape == "diagonal":
        return diagonal_operator(space, [gaussian_from_json(a) for a in obj["data"]], bound)
    if shape == "finite_rank":
        xs = [vector_from_combo(space, combo_from_json(c)) for c in obj["data"]["xs"]]
        ys = [vector_from_combo(space, combo_from_json(c)) for c in obj["data"]["ys"]]
        return finite_rank_operator(xs, ys)
    raise ValueError(f"unknown operator shape {shape!r}")
