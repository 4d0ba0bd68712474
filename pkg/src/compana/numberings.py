"""Numberings of computable reals driven by the toy register machine.

* :class:`DenseEnum` enumerates the rationals, the dense subset ``A`` of the
  real line, with ``a_0 = 1/4``.
* :func:`alpha_decode` reads a standard index: program ``e`` emits indices
  ``phi_e(n)`` whose rationals converge geometrically.
* :func:`beta_decode` reads a quasi-index ``<e, k>``: a total sequence that
  follows ``phi_e`` as long as it keeps halting and keeps the ``k``-geometric
  step condition, and stalls otherwise.
* :func:`zeta` and :func:`sqrt2_quasi_reduction` turn a realizer of
  ``y -> sqrt(2) y`` on quasi-indices into a halting test, which lets the
  harness hunt for a program on which any such realizer is wrong.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from .creal import CReal
from .scalars import pow2
from .toyrec import (
    Asm,
    Program,
    decode,
    encode,
    format_program,
    parse_program,
    run,
    step_eval,
)

__all__ = [
    "DenseEnum",
    "DENSE",
    "A0",
    "A0_INDEX",
    "TWO_A0_INDEX",
    "AlphaIndex",
    "QuasiIndex",
    "QuasiSequence",
    "BudgetExhausted",
    "CertificateRefuted",
    "ProtocolError",
    "alpha_decode",
    "beta_decode",
    "zeta",
    "zeta_program",
    "constant_program",
    "sqrt2_scaled_program",
    "sqrt2_alpha_program",
    "naive_sqrt2_oracle",
    "bounded_halting_oracle",
    "separation_condition_holds",
    "choose_separation_stage",
    "sqrt2_quasi_reduction",
    "Verdict",
    "reduction_table",
    "TailReport",
    "constant_tail_detector",
    "CorpusEntry",
    "load_corpus",
    "build_corpus",
    "write_corpus",
    "CORPUS_ENV",
]


# --- the dense subset A = Q ------------------------------------------------


def _split2(v: int) -> Tuple[int, int]:
    """v = 2**k * odd; returns (k, odd)."""
    k = (v & -v).bit_length() - 1
    return k, v >> k


def _base_value(n: int) -> Fraction:
    k, odd = _split2(n + 1)
    j = (odd - 1) // 2
    sign, t = j & 1, j >> 1
    d, odd2 = _split2(t + 1)
    p = (odd2 - 1) // 2
    v = Fraction(p, (1 << k) * (2 * d + 1))
    return -v if sign else v


def _base_index(q: Fraction) -> int:
    p = abs(q.numerator)
    k, odd = _split2(q.denominator)
    d = (odd - 1) // 2
    t = (1 << d) * (2 * p + 1) - 1
    j = 2 * t + (1 if q < 0 else 0)
    return (1 << k) * (2 * j + 1) - 1


A0 = Fraction(1, 4)
_A0_BASE = _base_index(A0)  # 35


class DenseEnum:
    """A total surjection n -> Q with a computable canonical inverse.

    Base decoding: write ``n + 1 = 2**k (2j + 1)``, ``j = 2t + s`` and
    ``t + 1 = 2**d (2p + 1)``; the rational is ``(-1)**s p / (2**k (2d + 1))``.
    Positions 0 and 35 are swapped so that ``a_0 = 1/4`` is nonzero.
    Dyadic ``r / 2**K`` (with ``(r, K)`` not ``(0, 0)`` or ``(1, 2)``) sits at
    index ``2**K (8r + 1) - 1``.
    """

    def value(self, n: int) -> Fraction:
        if n < 0:
            raise ValueError("indices are natural numbers")
        if n == 0:
            return A0
        if n == _A0_BASE:
            return Fraction(0)
        return _base_value(n)

    def index(self, q) -> int:
        q = Fraction(q)
        n = _base_index(q)
        if n == _A0_BASE:
            return 0
        if n == 0:
            return _A0_BASE
        return n

    def __call__(self, n: int) -> Fraction:
        return self.value(n)


DENSE = DenseEnum()
A0_INDEX = 0
TWO_A0_INDEX = DENSE.index(2 * A0)  # 17


# --- errors ---------------------------------------------------------------


class BudgetExhausted(RuntimeError):
    """A program did not halt within the step budget (which proves nothing)."""


class CertificateRefuted(ValueError):
    """Observed behaviour contradicts a caller-supplied domain certificate."""


class ProtocolError(TypeError):
    """An oracle returned something that is not a well-formed quasi-index."""


# --- standard indices -----------------------------------------------------


@dataclass(frozen=True)
class AlphaIndex:
    """A program index plus the caller's claim that it lies in dom(alpha)."""

    e: int
    certified: bool = True
    program: Optional[Program] = field(default=None, compare=False, repr=False)

    @property
    def prog(self) -> Program:
        return self.program if self.program is not None else decode(self.e)


def _short(e: int) -> str:
    return str(e) if e < 10**12 else f"<{e.bit_length()}-bit index>"


def alpha_decode(e: Union[int, AlphaIndex], budget: int) -> CReal:
    """The real with approx(n) = a_{phi_e(n)}, each run capped at ``budget`` steps.

    Raises :class:`BudgetExhausted` at query time when phi_e(n) needs more
    steps, and :class:`CertificateRefuted` when two computed approximations
    are further apart than the geometric modulus allows.
    """
    if isinstance(e, int):
        e = AlphaIndex(e)
    if not e.certified:
        raise CertificateRefuted(f"index {e.e} carries no domain certificate")
    prog = e.prog
    seen: Dict[int, Fraction] = {}
    lock = threading.Lock()

    def approx(n: int) -> Fraction:
        r = step_eval(prog, n, budget)
        if not r.halted:
            raise BudgetExhausted(f"phi_{_short(e.e)}({n}) still running after {budget} steps")
        v = DENSE.value(r.value)
        with lock:
            for m, w in seen.items():
                if abs(v - w) > pow2(-n) + pow2(-m):
                    raise CertificateRefuted(
                        f"a_phi({n}) = {v} and a_phi({m}) = {w} violate the modulus"
                    )
            seen[n] = v
        return v

    return CReal(approx, label=f"alpha({e.e})")


# --- quasi-indices --------------------------------------------------------


@dataclass(frozen=True)
class QuasiIndex:
    """The pair <e, k>; every such pair denotes a quasi-sequence."""

    e: int
    k: int = 1
    program: Optional[Program] = field(default=None, compare=False, repr=False)

    @property
    def prog(self) -> Program:
        return self.program if self.program is not None else decode(self.e)

    @classmethod
    def of(cls, p: Program, k: int = 1) -> "QuasiIndex":
        return cls(encode(p), k, p)


class QuasiSequence:
    """The total sequence beta<e, k>.

    Its n-th term is ``a_{phi_e(m)}`` for the largest ``m < n`` such that
    ``phi_e(0), ..., phi_e(m)`` each halt within ``n`` steps and every step
    satisfies ``|a_{phi_e(i)} - a_{phi_e(i-1)}| < k 2**-i``.  When
    ``phi_e(0)`` has not halted the term is ``a_0``.

    Halting times are cached, so walking along increasing ``n`` is cheap.
    """

    def __init__(self, q: QuasiIndex):
        if q.k < 1:
            raise ValueError("the geometric factor k must be at least 1")
        self.q = q
        self._prog = q.prog
        self._steps: List[int] = []
        self._values: List[Fraction] = []
        self._fail_at: Optional[int] = None
        # next unknown m: (largest budget tried, proven divergent)
        self._pending = (-1, False)
        self._lock = threading.Lock()

    def _halts_within(self, m: int, n: int) -> bool:
        if m < len(self._steps):
            return self._steps[m] <= n
        tried, diverges = self._pending
        if diverges or tried >= n:
            return False
        r = run(self._prog, {0: m}, n)
        if not r.halted:
            self._pending = (n, r.diverges)
            return False
        self._pending = (-1, False)
        v = DENSE.value(r.value)
        if m >= 1 and self._fail_at is None:
            if not abs(v - self._values[-1]) < self.q.k * pow2(-m):
                self._fail_at = m
        self._steps.append(r.steps)
        self._values.append(v)
        return r.steps <= n

    def prefix(self, n: int, max_m: Optional[int] = None) -> Optional[int]:
        """The certified index m* used at stage n, or None when nothing is certified."""
        with self._lock:
            best = None
            m = 0
            while m < n and (max_m is None or m <= max_m):
                if self._fail_at is not None and m >= self._fail_at:
                    break
                if not self._halts_within(m, n):
                    break
                if self._fail_at is not None and m >= self._fail_at:
                    break  # this output was just seen to break the k-geometric test
                best = m
                m += 1
            return best

    def at(self, n: int, max_m: Optional[int] = None) -> Fraction:
        m = self.prefix(n, max_m)
        return A0 if m is None else self._values[m]

    def __call__(self, n: int) -> Fraction:
        return self.at(n)

    def output(self, m: int) -> Optional[Fraction]:
        """a_{phi_e(m)} if already observed."""
        return self._values[m] if m < len(self._values) else None

    def terms(self, n_max: int) -> List[Fraction]:
        return [self.at(n) for n in range(n_max + 1)]


def beta_decode(q: QuasiIndex) -> QuasiSequence:
    return QuasiSequence(q)


# --- program builders -----------------------------------------------------


def constant_program(index: int) -> Program:
    """n -> index (an alpha-index of the constant a_index)."""
    asm = Asm()
    asm.clear(0)
    asm.load(0, index)
    asm.halt()
    return asm.assemble()


def _emit_dyadic_index(asm: Asm, numer: int, exp: int) -> None:
    """reg0 <- index of numer / 2**exp, for registers holding numer and exp."""
    out = asm.reg()
    asm.move(numer, (out, 8))
    asm.inc(out)
    asm.times_pow2(out, exp)
    after = asm.fresh_label("minus_one")
    asm.decjz(out, after)
    asm.label(after)
    asm.clear(0)
    asm.move(out, (0, 1))


def _emit_scaled_sqrt2(asm: Asm, m: int, p: int, k: int, offset: int) -> None:
    """reg0 <- index of isqrt(2 p^2 4^(m+offset)) / 2^(m+offset+k)."""
    if offset + k < 3:
        # keeps clear of the swapped positions 0 and 35 of the enumeration
        raise ValueError("offset + k must be at least 3")
    num, cnt = asm.reg(), asm.reg()
    asm.load(num, 2 * p * p)
    asm.copy(m, cnt)
    asm.inc(cnt, offset)
    top, done = asm.here("scale"), asm.fresh_label("scale_done")
    asm.decjz(cnt, done)
    asm.double(num)
    asm.double(num)
    asm.jmp(top)
    asm.label(done)
    res = asm.reg()
    asm.isqrt(num, res)
    exp = asm.reg()
    asm.copy(m, exp)
    asm.inc(exp, offset + k)
    _emit_dyadic_index(asm, res, exp)


def sqrt2_scaled_program(p: int, k: int, offset: int = 2) -> Program:
    """m -> index of a rational within 2**-(m+offset+k) of sqrt(2) p / 2**k."""
    asm = Asm()
    m = asm.reg()
    asm.move(0, (m, 1))
    _emit_scaled_sqrt2(asm, m, p, k, offset)
    asm.halt()
    return asm.assemble()


def sqrt2_alpha_program(offset: int = 3) -> Program:
    """A standard index for sqrt(2); ``offset >= 2`` keeps it a k=1 quasi-index too."""
    return sqrt2_scaled_program(1, 0, offset)


def dyadic_tail_program() -> Program:
    """m -> index of 2**-(m+3), an alpha-index of 0 that is never constant."""
    asm = Asm()
    m = asm.reg()
    asm.move(0, (m, 1))
    one, exp = asm.reg(), asm.reg()
    asm.inc(one)
    asm.copy(m, exp)
    asm.inc(exp, 3)
    _emit_dyadic_index(asm, one, exp)
    asm.halt()
    return asm.assemble()


def zeta_program(x: int) -> Program:
    """n -> a_0 when n = 0; for n >= 1, 2 a_0 once phi_x(x) halts (else diverge).

    The program for x is spliced in directly, so the result computes the
    same function as S^1_1(e*, x) for the two-argument program e* that would
    simulate phi_x(x).
    """
    px = decode(x)
    asm = Asm(base=px.max_register + 1)
    asm.decjz(0, "zero_input")
    asm.clear(0)
    asm.load(0, x)
    asm.inline(px, then="after")
    asm.label("after")
    asm.clear(0)
    asm.load(0, TWO_A0_INDEX)
    asm.halt()
    asm.label("zero_input")
    asm.halt()
    return asm.assemble()


def zeta(x: int) -> QuasiIndex:
    """The quasi-index zeta^x = <e_x, 1>; its limit is 2 a_0 iff phi_x(x) halts."""
    return QuasiIndex.of(zeta_program(x), 1)


# --- realizers of y -> sqrt(2) y on quasi-indices -------------------------

Oracle = Callable[[QuasiIndex], QuasiIndex]


def _dyadic_parts(v: Fraction) -> Tuple[int, int]:
    den = v.denominator
    if den & (den - 1) or v < 0:
        raise NotImplementedError(f"only non-negative dyadic values are supported, got {v}")
    return v.numerator, den.bit_length() - 1


def bounded_halting_oracle(budget: int = 1 << 64, depth: int = 64, offset: int = 2) -> Oracle:
    """A realizer that cheats: it settles the input's limit by bounded search.

    It reads the quasi-sequence up to ``depth`` outputs within ``budget``
    steps and emits a fixed program for sqrt(2) times that value.
    """

    def oracle(q: QuasiIndex) -> QuasiIndex:
        seq = QuasiSequence(q)
        p, k = _dyadic_parts(seq.at(budget, max_m=depth))
        if p == 0:
            return QuasiIndex.of(constant_program(DENSE.index(0)), 1)
        return QuasiIndex.of(sqrt2_scaled_program(p, k, offset), 1)

    oracle.__name__ = "bounded_halting_oracle"
    return oracle


def naive_sqrt2_oracle(offset: int = 2) -> Oracle:
    """The obvious realizer: run the input program and rescale each output.

    Supports inputs whose outputs are a_0 or 2 a_0 (enough for zeta^x);
    on any other output the produced program spins.
    """

    def oracle(q: QuasiIndex) -> QuasiIndex:
        pe = q.prog
        asm = Asm(base=pe.max_register + 1)
        m, v = asm.reg(), asm.reg()
        asm.move(0, (m, 1))
        asm.copy(m, 0)
        asm.inline(pe, then="dispatch")
        asm.label("dispatch")
        asm.move(0, (v, 1))
        asm.branch_eq_const(v, A0_INDEX, "case_a0", "not_a0")
        asm.label("not_a0")
        asm.branch_eq_const(v, TWO_A0_INDEX, "case_2a0", "other")
        asm.label("other")
        asm.loop_forever()
        asm.label("case_a0")
        _emit_scaled_sqrt2(asm, m, 1, 2, offset)
        asm.halt()
        asm.label("case_2a0")
        _emit_scaled_sqrt2(asm, m, 1, 1, offset)
        asm.halt()
        return QuasiIndex.of(asm.assemble(), q.k)

    oracle.__name__ = "naive_sqrt2_oracle"
    return oracle


# --- the reduction --------------------------------------------------------


class Verdict:
    HALTS = "Halts"
    DIVERGES = "Diverges"


def separation_condition_holds(n: int, a0: Fraction = A0) -> bool:
    """|sqrt(2) a_0 - 2 sqrt(2) a_0| = sqrt(2)|a_0| > 2**-(n-1), decided exactly."""
    return 2 * a0 * a0 > pow2(-2 * (n - 1))


def _check_quasi_index(obj) -> QuasiIndex:
    if not isinstance(obj, QuasiIndex) or obj.e < 0 or obj.k < 1:
        raise ProtocolError(f"oracle returned {obj!r}, not a quasi-index")
    if obj.program is not None and encode(obj.program) != obj.e:
        raise ProtocolError("oracle's program does not match its index")
    return obj


@dataclass
class ReductionContext:
    """References (sqrt(2) a_0)_n and (2 sqrt(2) a_0)_n for one oracle."""

    oracle: Oracle
    low: QuasiSequence
    high: QuasiSequence

    @classmethod
    def for_oracle(cls, oracle: Oracle) -> "ReductionContext":
        low = _check_quasi_index(oracle(QuasiIndex.of(constant_program(A0_INDEX))))
        high = _check_quasi_index(oracle(QuasiIndex.of(constant_program(TWO_A0_INDEX))))
        return cls(oracle, QuasiSequence(low), QuasiSequence(high))

    def separated(self, n: int) -> bool:
        return abs(self.low.at(n) - self.high.at(n)) > pow2(-(n - 1))


def choose_separation_stage(ctx: ReductionContext, start: int = 8, limit: int = 1 << 24) -> int:
    """Smallest n = start * 2**j at which the two reference sequences are separated."""
    n = start
    while n <= limit:
        if ctx.separated(n) and ctx.low.prefix(n) and ctx.high.prefix(n):
            return n
        n *= 2
    raise BudgetExhausted(f"references not separated by stage {limit}")


def sqrt2_quasi_reduction(
    x: int,
    oracle: Union[Oracle, ReductionContext],
    n: Optional[int] = None,
) -> str:
    """Decide phi_x(x) from a claimed realizer of y -> sqrt(2) y.

    Returns ``Verdict.DIVERGES`` when ``|(F zeta^x)_n - (sqrt(2) a_0)_n| < 2**-n``
    and ``Verdict.HALTS`` otherwise.  A correct realizer would make this a
    halting decider, so on some x every realizer must answer wrongly.
    """
    ctx = oracle if isinstance(oracle, ReductionContext) else ReductionContext.for_oracle(oracle)
    if n is None:
        n = choose_separation_stage(ctx)
    if not ctx.separated(n):
        raise ValueError(f"precondition fails: references not separated at stage {n}")
    image = QuasiSequence(_check_quasi_index(ctx.oracle(zeta(x))))
    close = abs(image.at(n) - ctx.low.at(n)) < pow2(-n)
    return Verdict.DIVERGES if close else Verdict.HALTS


@dataclass(frozen=True)
class ReductionRow:
    name: str
    x: int
    truth: str
    verdict: str

    @property
    def correct(self) -> bool:
        return self.truth == self.verdict


def reduction_table(oracle: Oracle, corpus: Sequence["CorpusEntry"], n: Optional[int] = None) -> Tuple[int, List[ReductionRow]]:
    ctx = ReductionContext.for_oracle(oracle)
    if n is None:
        n = choose_separation_stage(ctx)
    rows = []
    for entry in corpus:
        truth = Verdict.HALTS if entry.halts else Verdict.DIVERGES
        rows.append(ReductionRow(entry.name, entry.index, truth, sqrt2_quasi_reduction(entry.index, ctx, n)))
    return n, rows


# --- constant runs --------------------------------------------------------


@dataclass(frozen=True)
class TailReport:
    probe_depth: int
    max_run: int
    runs: Tuple[int, ...]
    last_run: int
    quiet_after: int  # first index after which no run reaches ``run_length``
    flagged: bool  # the last run reaches the probe end: looks like a limit in A
    certificate_violation: bool  # flagged although the caller asserted limit not in A


def constant_tail_detector(
    seq,
    limit_not_in_a: bool = True,
    probe_depth: int = 64,
    run_length: int = 4,
) -> TailReport:
    """Measure runs of equal consecutive terms of a sequence up to ``probe_depth``.

    With a limit outside A every constant run is finite.  A run that is still
    going at the probe end and covers at least half the window is flagged,
    since that is what a limit inside A looks like.
    """
    at = seq.at if hasattr(seq, "at") else seq
    terms = [at(n) for n in range(probe_depth)]
    runs: List[int] = []
    starts: List[int] = []
    for i, t in enumerate(terms):
        if i and t == terms[i - 1]:
            runs[-1] += 1
        else:
            runs.append(1)
            starts.append(i)
    quiet = 0
    for s, r in zip(starts, runs):
        if r >= run_length:
            quiet = s + r
    last = runs[-1] if runs else 0
    flagged = bool(runs) and 2 * last >= probe_depth
    return TailReport(
        probe_depth, max(runs, default=0), tuple(runs), last, quiet, flagged, flagged and limit_not_in_a
    )


# --- the curated corpus ---------------------------------------------------

CORPUS_ENV = "COMPREAL_CORPUS"
CORPUS_FORMAT = "compana-halting-corpus"
CORPUS_VERSION = 1
_DEFAULT_CORPUS = Path(__file__).with_name("data") / "curated_corpus.jsonl"


@dataclass(frozen=True)
class CorpusEntry:
    """A program with a known answer to "does phi_x(x) halt?"."""

    name: str
    program: Program
    halts: bool
    budget: int
    steps: Optional[int] = None
    evidence: str = ""

    @property
    def index(self) -> int:
        return encode(self.program)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "program": format_program(self.program),
            "halts_on_self": self.halts,
            "budget": self.budget,
            "steps": self.steps,
            "evidence": self.evidence,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CorpusEntry":
        return cls(
            obj["name"],
            parse_program(obj["program"]),
            bool(obj["halts_on_self"]),
            int(obj["budget"]),
            obj.get("steps"),
            obj.get("evidence", ""),
        )


def classify(p: Program, budget: int) -> Optional[Tuple[bool, Optional[int], str]]:
    """(halts, steps, evidence) for phi_x(x) with x = encode(p), or None if undecided."""
    x = encode(p)
    r = run(p, {0: x}, budget)
    if r.halted:
        return True, r.steps, "halted"
    if r.diverges:
        return False, None, "loop-proof"
    return None


_HANDMADE = {
    "countdown": "DECJZ 0 2\nDECJZ 2 0",
    "parity-halt-on-even": "DECJZ 0 3\nDECJZ 0 4\nDECJZ 2 0\nHALT\nDECJZ 2 4",
    "parity-halt-on-odd": "DECJZ 0 4\nDECJZ 0 5\nDECJZ 2 0\nHALT\nDECJZ 2 4\nHALT",
    "double-then-halt": "DECJZ 0 4\nINC 1\nINC 1\nDECJZ 2 0\nHALT",
    "grow-forever": "INC 0\nDECJZ 2 0",
    "move-then-spin": "DECJZ 0 3\nINC 1\nDECJZ 2 0\nDECJZ 2 3",
    "copy-twice": "DECJZ 0 4\nINC 1\nINC 3\nDECJZ 2 0\nDECJZ 1 6\nDECJZ 2 4\nHALT",
    "third-halt-on-multiple": "DECJZ 0 5\nDECJZ 0 4\nDECJZ 0 4\nDECJZ 2 0\nDECJZ 2 4\nHALT",
    "drain-into-spin": "DECJZ 0 2\nDECJZ 2 0\nINC 1\nDECJZ 2 3",
    "halt-if-zero": "DECJZ 0 2\nDECJZ 2 1\nHALT",
}


def build_corpus(size: int = 50, budget: int = 10**18) -> List[CorpusEntry]:
    """Hand-made programs plus the smallest decided indices, balanced by status."""
    entries: List[CorpusEntry] = []
    seen = set()
    for name, text in _HANDMADE.items():
        p = parse_program(text)
        c = classify(p, budget)
        if c is None:
            continue
        halts, steps, evidence = c
        entries.append(CorpusEntry(name, p, halts, steps if halts else budget, steps, evidence))
        seen.add(p)
    want = {True: (size + 1) // 2, False: size // 2}
    have = {True: sum(e.halts for e in entries), False: sum(not e.halts for e in entries)}
    e = 0
    while have[True] < want[True] or have[False] < want[False]:
        p = decode(e)
        e += 1
        if p in seen or encode(p) != e - 1:
            continue
        c = classify(p, budget)
        if c is None:
            continue
        halts, steps, evidence = c
        if have[halts] >= want[halts]:
            continue
        seen.add(p)
        have[halts] += 1
        entries.append(CorpusEntry(f"index-{e - 1}", p, halts, steps if halts else budget, steps, evidence))
    return entries


def write_corpus(path, entries: Sequence[CorpusEntry]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        header = {"format": CORPUS_FORMAT, "version": CORPUS_VERSION, "encoding_version": 1}
        fh.write(json.dumps(header) + "\n")
        for entry in entries:
            fh.write(json.dumps(entry.to_json()) + "\n")


def load_corpus(path=None) -> List[CorpusEntry]:
    """Read the curated corpus; ``$COMPREAL_CORPUS`` overrides the bundled file."""
    path = Path(path or os.environ.get(CORPUS_ENV) or _DEFAULT_CORPUS)
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh if ln.strip()]
    header = json.loads(lines[0])
    if header.get("format") != CORPUS_FORMAT or header.get("version") != CORPUS_VERSION:
        raise ValueError(f"{path}: unsupported corpus header {header}")
    return [CorpusEntry.from_json(json.loads(ln)) for ln in lines[1:]]


if __name__ == "__main__":
    _DEFAULT_CORPUS.parent.mkdir(exist_ok=True)
    write_corpus(_DEFAULT_CORPUS, build_corpus())
    print(f"wrote {_DEFAULT_CORPUS}")
