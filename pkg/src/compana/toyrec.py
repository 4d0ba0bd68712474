"""A toy model of partial computable functions: Minsky register machines.

Three instructions are available::

    INC r          r += 1, continue
    DECJZ r l      if r == 0 jump to l, else r -= 1 and continue
    HALT           stop

Falling off the end of the program also halts.  The input goes in register
0 and the output is read from register 0.  Two-argument programs take the
parameter in register 1 and the argument in register 0, which makes s-m-n a
matter of prefixing ``INC 1`` instructions.

Program indices (encoding version 1)
------------------------------------
Each instruction gets a code: ``HALT -> 0``, ``INC r -> 2r + 1``,
``DECJZ r l -> 2 cantor(r, l) + 2``.  A program is the concatenation of the
Elias-gamma codes of ``code + 1``, and the bitstring ``w`` maps to the index
``int('1' + w, 2) - 1``.  Every natural number decodes to some program:
bitstrings that do not parse, or that jump past the end, decode to the
diverging program ``DECJZ 2 0``.

Evaluation counts one step per executed instruction.  Straight runs of
``INC`` and straight-line counting loops are executed in bulk with the exact
same step count, which keeps large budgets cheap without changing results.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

ENCODING_VERSION = 1

__all__ = [
    "ENCODING_VERSION",
    "Inc",
    "Decjz",
    "Halt",
    "Program",
    "StepEval",
    "CeStage",
    "encode",
    "decode",
    "DIVERGING",
    "parse_program",
    "format_program",
    "run",
    "step_eval",
    "step_eval2",
    "s11",
    "halting_stage",
    "HaltingTable",
    "Asm",
    "cantor_pair",
    "cantor_unpair",
]


@dataclass(frozen=True)
class Inc:
    reg: int

    def __str__(self):
        return f"INC {self.reg}"


@dataclass(frozen=True)
class Decjz:
    reg: int
    target: int

    def __str__(self):
        return f"DECJZ {self.reg} {self.target}"


@dataclass(frozen=True)
class Halt:
    def __str__(self):
        return "HALT"


Instruction = Union[Inc, Decjz, Halt]


@dataclass(frozen=True, eq=True)
class Program:
    instructions: Tuple[Instruction, ...]

    def __post_init__(self):
        object.__setattr__(self, "instructions", tuple(self.instructions))
        n = len(self.instructions)
        for ins in self.instructions:
            if isinstance(ins, Decjz) and not 0 <= ins.target <= n:
                raise ValueError(f"jump target {ins.target} outside [0, {n}]")
            if isinstance(ins, (Inc, Decjz)) and ins.reg < 0:
                raise ValueError("negative register")

    def __len__(self):
        return len(self.instructions)

    @property
    def max_register(self) -> int:
        regs = [ins.reg for ins in self.instructions if not isinstance(ins, Halt)]
        return max(regs, default=0)

    @functools.cached_property
    def analysis(self) -> "_Analysis":
        return _Analysis.of(self)

    def __str__(self):
        return format_program(self)


# register 2 is never an input register, so this spins on any input
DIVERGING = Program((Decjz(2, 0),))


# --- pairing and encoding -------------------------------------------------


def cantor_pair(a: int, b: int) -> int:
    return (a + b) * (a + b + 1) // 2 + b


def cantor_unpair(z: int) -> Tuple[int, int]:
    w = (math.isqrt(8 * z + 1) - 1) // 2
    b = z - w * (w + 1) // 2
    return w - b, b


def _instr_code(ins: Instruction) -> int:
    if isinstance(ins, Halt):
        return 0
    if isinstance(ins, Inc):
        return 2 * ins.reg + 1
    return 2 * cantor_pair(ins.reg, ins.target) + 2


def _instr_from_code(c: int) -> Instruction:
    if c == 0:
        return Halt()
    if c % 2 == 1:
        return Inc((c - 1) // 2)
    r, l = cantor_unpair((c - 2) // 2)
    return Decjz(r, l)


def _gamma(v: int) -> str:
    b = bin(v)[2:]
    return "0" * (len(b) - 1) + b


def encode(p: Program) -> int:
    """Index of a program (encoding version 1)."""
    bits = "".join(_gamma(_instr_code(ins) + 1) for ins in p.instructions)
    return int("1" + bits, 2) - 1


@functools.lru_cache(maxsize=4096)
def decode(e: int) -> Program:
    """Program with index e; total, with invalid codes decoding to DIVERGING."""
    if e < 0:
        raise ValueError("program indices are natural numbers")
    w = bin(e + 1)[3:]
    instrs = []
    i, n = 0, len(w)
    while i < n:
        zeros = 0
        while i < n and w[i] == "0":
            zeros += 1
            i += 1
        if i + zeros + 1 > n:
            return DIVERGING
        v = int(w[i:i + zeros + 1], 2)
        i += zeros + 1
        instrs.append(_instr_from_code(v - 1))
    try:
        return Program(tuple(instrs))
    except ValueError:
        return DIVERGING


def format_program(p: Program) -> str:
    return "\n".join(str(ins) for ins in p.instructions)


def parse_program(text: str) -> Program:
    """Parse one-instruction-per-line text; blank lines and ``#`` comments are skipped."""
    instrs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        op = parts[0].upper()
        try:
            if op == "HALT" and len(parts) == 1:
                instrs.append(Halt())
            elif op == "INC" and len(parts) == 2:
                instrs.append(Inc(int(parts[1])))
            elif op == "DECJZ" and len(parts) == 3:
                instrs.append(Decjz(int(parts[1]), int(parts[2])))
            else:
                raise ValueError
        except ValueError:
            raise ValueError(f"line {lineno}: cannot parse {raw!r}") from None
    return Program(tuple(instrs))


# --- static analysis for bulk execution -----------------------------------


@dataclass
class _Loop:
    zero_reg: int
    length: int
    deltas: Dict[int, int]
    # (register, decrements of that register earlier in the same iteration)
    checks: List[Tuple[int, int]]


@dataclass
class _Analysis:
    inc_runs: List[int]
    loops: Dict[int, _Loop]

    @classmethod
    def of(cls, p: Program) -> "_Analysis":
        ins = p.instructions
        n = len(ins)
        runs = [0] * n
        for pc in range(n - 1, -1, -1):
            if isinstance(ins[pc], Inc):
                nxt = pc + 1
                same = nxt < n and isinstance(ins[nxt], Inc) and ins[nxt].reg == ins[pc].reg
                runs[pc] = 1 + (runs[nxt] if same else 0)
        loops = {}
        for end in range(n):
            back = ins[end]
            if not (isinstance(back, Decjz) and back.target < end):
                continue
            start = back.target
            if start in loops:
                continue
            body = ins[start:end]
            if any(isinstance(b, Halt) for b in body):
                continue
            if any(b.reg == back.reg for b in body):
                continue
            deltas: Dict[int, int] = {}
            checks = []
            for b in body:
                if isinstance(b, Inc):
                    deltas[b.reg] = deltas.get(b.reg, 0) + 1
                else:
                    checks.append((b.reg, deltas.get(b.reg, 0)))
                    deltas[b.reg] = deltas.get(b.reg, 0) - 1
            loops[start] = _Loop(back.reg, end - start + 1, deltas, checks)
        return cls(runs, loops)


def _full_iterations(loop: _Loop, regs: Dict[int, int]) -> Optional[int]:
    """How many whole loop iterations run without any DECJZ seeing zero.

    Returns None when the loop can never exit (a proof of divergence).
    """
    bound = None
    for reg, before in loop.checks:
        # value seen by this DECJZ in iteration j: v + j*d + before, must be >= 1
        v = regs.get(reg, 0) + before
        if v < 1:
            return 0
        d = loop.deltas.get(reg, 0)
        if d < 0:
            j_max = (v - 1) // (-d) + 1
            bound = j_max if bound is None else min(bound, j_max)
    return bound


# --- evaluation -----------------------------------------------------------


@dataclass(frozen=True)
class RunResult:
    halted: bool
    steps: int
    registers: Dict[int, int]
    diverges: bool = False  # a proof that no budget would suffice

    @property
    def value(self) -> Optional[int]:
        return self.registers.get(0, 0) if self.halted else None


def run(p: Program, inputs: Union[Dict[int, int], Sequence[int]], budget: int) -> RunResult:
    """Run p from the given registers for at most ``budget`` steps."""
    if isinstance(inputs, dict):
        regs = {r: v for r, v in inputs.items() if v}
    else:
        regs = {r: v for r, v in enumerate(inputs) if v}
    ins = p.instructions
    n = len(ins)
    an = p.analysis
    loops = an.loops
    pc = 0
    steps = 0
    while True:
        if pc == n:
            return RunResult(True, steps, regs)
        if steps >= budget:
            return RunResult(False, steps, regs)
        loop = loops.get(pc)
        if loop is not None and regs.get(loop.zero_reg, 0) == 0:
            j = _full_iterations(loop, regs)
            if j is None:
                return RunResult(False, steps, regs, diverges=True)
            j = min(j, (budget - steps) // loop.length)
            if j > 1:
                for reg, d in loop.deltas.items():
                    if d:
                        regs[reg] = regs.get(reg, 0) + j * d
                steps += j * loop.length
                continue
        cur = ins[pc]
        if isinstance(cur, Inc):
            k = min(an.inc_runs[pc], budget - steps)
            regs[cur.reg] = regs.get(cur.reg, 0) + k
            steps += k
            pc += k
            continue
        if isinstance(cur, Halt):
            return RunResult(True, steps + 1, regs)
        if cur.target == pc and regs.get(cur.reg, 0) == 0:
            # jumps to itself forever
            return RunResult(False, steps, regs, diverges=True)
        v = regs.get(cur.reg, 0)
        steps += 1
        if v == 0:
            pc = cur.target
        else:
            regs[cur.reg] = v - 1
            pc += 1


@dataclass(frozen=True)
class StepEval:
    """Outcome of running program e on input x with a step budget."""

    e: int
    x: int
    budget: int
    halted: bool
    value: Optional[int]
    steps: int
    diverges: bool = False

    @property
    def running(self) -> bool:
        return not self.halted


def _as_program(e) -> Tuple[int, Program]:
    if isinstance(e, Program):
        return -1, e
    return e, decode(e)


def step_eval(e, x: int, s: int) -> StepEval:
    """phi_{e,s}(x).  ``e`` may be an index or a Program."""
    idx, p = _as_program(e)
    r = run(p, {0: x}, s)
    return StepEval(idx, x, s, r.halted, r.value, r.steps, r.diverges)


def step_eval2(e, x: int, y: int, s: int) -> StepEval:
    """Two-argument phi_{e,s}(x, y): parameter x in register 1, y in register 0."""
    idx, p = _as_program(e)
    r = run(p, {0: y, 1: x}, s)
    return StepEval(idx, y, s, r.halted, r.value, r.steps, r.diverges)


def _shift_targets(instrs: Iterable[Instruction], offset: int) -> List[Instruction]:
    out = []
    for ins in instrs:
        if isinstance(ins, Decjz):
            out.append(Decjz(ins.reg, ins.target + offset))
        else:
            out.append(ins)
    return out


def s11_program(p: Program, x: int) -> Program:
    return Program(tuple([Inc(1)] * x + _shift_targets(p.instructions, x)))


def s11(e: int, x: int) -> int:
    """Index e' with phi_{e'}(y) = phi_e(x, y), by prefixing x copies of INC 1.

    The specialised program takes exactly x more steps than the original.
    """
    return encode(s11_program(decode(e), x))


# --- the halting set and its stages ---------------------------------------


@dataclass(frozen=True)
class CeStage:
    """K_n = {e <= n : phi_{e,n}(e) halts}."""

    n: int
    members: FrozenSet[int]

    def __contains__(self, e):
        return e in self.members


class HaltingTable:
    """Self-halting times phi_e(e), cached so that stage sequences stay cheap."""

    def __init__(self):
        self._times: Dict[int, Tuple[int, Optional[int]]] = {}

    def halting_time(self, e: int, budget: int) -> Optional[int]:
        """Steps phi_e(e) needs if that is at most ``budget``, else None."""
        tried, t = self._times.get(e, (-1, None))
        if t is not None:
            return t if t <= budget else None
        if tried >= budget:
            return None
        r = step_eval(e, e, budget)
        if r.halted:
            self._times[e] = (budget, r.steps)
            return r.steps
        self._times[e] = (math.inf if r.diverges else budget, None)
        return None

    def stage(self, n: int) -> CeStage:
        members = frozenset(e for e in range(n + 1) if self.halting_time(e, n) is not None)
        return CeStage(n, members)


_DEFAULT_TABLE = HaltingTable()


def halting_stage(n: int, table: Optional[HaltingTable] = None) -> CeStage:
    return (table or _DEFAULT_TABLE).stage(n)


# --- a small assembler ----------------------------------------------------


class Asm:
    """Builds programs with symbolic labels and a few counter macros.

    Registers below ``base`` are left to the caller (e.g. an inlined
    program); macros allocate scratch registers above it.  One register is
    reserved as a permanent zero so that ``jmp`` is a DECJZ that always jumps.
    """

    def __init__(self, base: int = 1):
        self._code: List[tuple] = []
        self._labels: Dict[str, int] = {}
        self._next_reg = base
        self._next_label = 0
        self.zero = self.reg()

    def reg(self) -> int:
        r = self._next_reg
        self._next_reg += 1
        return r

    def fresh_label(self, hint: str = "L") -> str:
        self._next_label += 1
        return f"{hint}#{self._next_label}"

    def label(self, name: str) -> None:
        if name in self._labels:
            raise ValueError(f"duplicate label {name}")
        self._labels[name] = len(self._code)

    def here(self, hint: str = "L") -> str:
        name = self.fresh_label(hint)
        self.label(name)
        return name

    def inc(self, r: int, times: int = 1) -> None:
        self._code.extend([("INC", r)] * times)

    def decjz(self, r: int, target: str) -> None:
        self._code.append(("DECJZ", r, target))

    def halt(self) -> None:
        self._code.append(("HALT",))

    def jmp(self, target: str) -> None:
        self.decjz(self.zero, target)

    def loop_forever(self) -> None:
        top = self.here("forever")
        self.jmp(top)

    def clear(self, r: int) -> None:
        top, done = self.here("clr"), self.fresh_label("clr_done")
        self.decjz(r, done)
        self.jmp(top)
        self.label(done)

    def move(self, src: int, *targets: Tuple[int, int]) -> None:
        """src -> sum of mult * src into each target; src ends at zero."""
        top, done = self.here("mv"), self.fresh_label("mv_done")
        self.decjz(src, done)
        for dst, mult in targets:
            self.inc(dst, mult)
        self.jmp(top)
        self.label(done)

    def copy(self, src: int, dst: int) -> None:
        """dst += src, keeping src."""
        tmp = self.reg()
        self.move(src, (dst, 1), (tmp, 1))
        self.move(tmp, (src, 1))

    def load(self, r: int, value: int) -> None:
        """r += value; long constants go through repeated doubling."""
        if value < 64:
            self.inc(r, value)
            return
        acc = self.reg()
        for bit in bin(value)[2:]:
            self.double(acc)
            if bit == "1":
                self.inc(acc)
        self.move(acc, (r, 1))

    def double(self, r: int) -> None:
        tmp = self.reg()
        self.move(r, (tmp, 2))
        self.move(tmp, (r, 1))

    def halve(self, r: int) -> None:
        """r = floor(r / 2)."""
        tmp = self.reg()
        top, done = self.here("half"), self.fresh_label("half_done")
        self.decjz(r, done)
        self.decjz(r, done)
        self.inc(tmp)
        self.jmp(top)
        self.label(done)
        self.move(tmp, (r, 1))

    def times_pow2(self, r: int, count: int) -> None:
        """r = r * 2**count where ``count`` is a register (left intact)."""
        c = self.reg()
        self.copy(count, c)
        top, done = self.here("pow"), self.fresh_label("pow_done")
        self.decjz(c, done)
        self.double(r)
        self.jmp(top)
        self.label(done)

    def branch_ge(self, a: int, b: int, if_ge: str, if_lt: str) -> None:
        """Jump on a >= b, leaving both registers intact."""
        ta, tb = self.reg(), self.reg()
        self.copy(a, ta)
        self.copy(b, tb)
        top = self.here("cmp")
        ge, lt = self.fresh_label("cmp_ge"), self.fresh_label("cmp_lt")
        self.decjz(tb, ge)
        self.decjz(ta, lt)
        self.jmp(top)
        self.label(ge)
        self.clear(ta)
        self.jmp(if_ge)
        self.label(lt)
        self.clear(tb)
        self.jmp(if_lt)

    def branch_eq_const(self, r: int, c: int, if_eq: str, if_ne: str) -> None:
        """Jump on r == c, leaving r intact."""
        t = self.reg()
        self.copy(r, t)
        ne = self.fresh_label("ne")
        for _ in range(c):
            self.decjz(t, ne)
        eq = self.fresh_label("eq")
        self.decjz(t, eq)
        self.label(ne)
        self.clear(t)
        self.jmp(if_ne)
        self.label(eq)
        self.jmp(if_eq)

    def sub(self, dst: int, src: int) -> None:
        """dst -= src (requires dst >= src), keeping src."""
        tmp = self.reg()
        top, done = self.here("sub"), self.fresh_label("sub_done")
        self.decjz(src, done)
        self.decjz(dst, done)
        self.inc(tmp)
        self.jmp(top)
        self.label(done)
        self.move(tmp, (src, 1))

    def isqrt(self, num: int, res: int) -> None:
        """res = floor(sqrt(num)) by the digit-by-digit method; num is left holding num - res**2."""
        bit, four, t = self.reg(), self.reg(), self.reg()
        self.inc(bit)
        grow, grown = self.here("isq_grow"), self.fresh_label("isq_grown")
        self.clear(four)
        self.copy(bit, four)
        self.double(four)
        self.double(four)
        bigger = self.fresh_label("isq_bigger")
        self.branch_ge(num, four, bigger, grown)
        self.label(bigger)
        self.clear(bit)
        self.move(four, (bit, 1))
        self.jmp(grow)
        self.label(grown)
        self.clear(four)
        step, done = self.here("isq_step"), self.fresh_label("isq_done")
        self.decjz(bit, done)
        self.inc(bit)
        self.clear(t)
        self.copy(res, t)
        self.copy(bit, t)
        take, skip = self.fresh_label("isq_take"), self.fresh_label("isq_skip")
        self.branch_ge(num, t, take, skip)
        self.label(take)
        self.sub(num, t)
        self.halve(res)
        self.copy(bit, res)
        nxt = self.fresh_label("isq_next")
        self.jmp(nxt)
        self.label(skip)
        self.halve(res)
        self.label(nxt)
        self.halve(bit)
        self.halve(bit)
        self.jmp(step)
        self.label(done)
        self.clear(t)

    def inline(self, p: Program, then: str) -> None:
        """Splice p in place; HALT and falling off its end continue at ``then``."""
        start = len(self._code)
        n = len(p)
        end_label = self.fresh_label("inline_end")
        for ins in p.instructions:
            if isinstance(ins, Inc):
                self._code.append(("INC", ins.reg))
            elif isinstance(ins, Halt):
                self._code.append(("DECJZ", self.zero, end_label))
            elif ins.target == n:
                self._code.append(("DECJZ", ins.reg, end_label))
            else:
                self._code.append(("DECJZ", ins.reg, start + ins.target))
        self.label(end_label)
        self.jmp(then)

    def assemble(self) -> Program:
        instrs: List[Instruction] = []
        for item in self._code:
            if item[0] == "INC":
                instrs.append(Inc(item[1]))
            elif item[0] == "HALT":
                instrs.append(Halt())
            else:
                tgt = item[2]
                instrs.append(Decjz(item[1], tgt if isinstance(tgt, int) else self._labels[tgt]))
        return Program(tuple(instrs))
