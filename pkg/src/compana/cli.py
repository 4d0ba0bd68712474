"""Command-line front end.

Subcommands print JSON lines (or an aligned table with ``--table``).  Every
approximation is printed next to its exact error bound.  Defaults may come
from a JSON config file given with ``--config``; the curated corpus path
may be overridden by ``$COMPREAL_CORPUS``.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence

from .creal import (
    CReal,
    DomainViolation,
    possible_ternary_digits,
    creal_abs,
    creal_from_rational,
    creal_max,
    creal_min,
    creal_scale,
    creal_sqrt,
    diagonal_real,
    fixture_row,
    ternary_query_precision,
)
from .numberings import (
    BudgetExhausted,
    bounded_halting_oracle,
    load_corpus,
    naive_sqrt2_oracle,
    reduction_table,
)
from .operators import (
    const_program,
    findim_norm,
    halting_norm_entry,
    halting_norm_operator,
    halting_thetas,
    matrix_operator,
    norm_bound_refuter,
    norm_pathology_PQ,
    norm_pathology_RS,
    successor_program,
)
from .roots import RootBudgetError, CertificateError, find_roots, parse_poly
from .scalars import parse_gaussian, pow2, serialize_gaussian, serialize_rational
from .toyrec import halting_stage

DEFAULTS = {"bits": 20, "stages": 8, "k": 10, "M": 2, "budget": None, "oracle": "cheating"}


class ExprError(ValueError):
    pass


# --- expressions ----------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d+)?)|([A-Za-z_]+)|(.))")


def _tokenize(text: str) -> List[str]:
    out = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        tok = m.group(1) or m.group(2) or m.group(3)
        if tok is None:
            break
        out.append(tok)
        pos = m.end()
    return out


class _Parser:
    """expr := term (('+'|'-') term)*;  term := unary (('*'|'/') unary)*;
    unary := '-' unary | atom;  atom := number | fn '(' args ')' | '(' expr ')'.

    Values are exact Fractions while possible and CReals otherwise; a divisor
    must be an exact rational.
    """

    FUNCS = {"sqrt": 1, "abs": 1, "min": 2, "max": 2}

    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> Optional[str]:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expected: Optional[str] = None) -> str:
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise ExprError(f"expected {expected or 'a token'} at token {self.i}, found {tok!r}")
        self.i += 1
        return tok

    def parse(self):
        if not self.toks:
            raise ExprError("empty expression")
        v = self.expr()
        if self.peek() is not None:
            raise ExprError(f"unexpected {self.peek()!r} at token {self.i}")
        return v

    def expr(self):
        v = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            w = self.term()
            v = _add(v, w) if op == "+" else _add(v, _neg(w))
        return v

    def term(self):
        v = self.unary()
        while self.peek() in ("*", "/"):
            op = self.take()
            w = self.unary()
            if op == "*":
                v = _mul(v, w)
            else:
                if not isinstance(w, Fraction):
                    raise ExprError("divisors must be rational constants")
                if w == 0:
                    raise ExprError("division by zero")
                v = _mul(v, 1 / w)
        return v

    def unary(self):
        if self.peek() == "-":
            self.take()
            return _neg(self.unary())
        if self.peek() == "+":
            self.take()
            return self.unary()
        return self.atom()

    def atom(self):
        tok = self.take()
        if tok == "(":
            v = self.expr()
            self.take(")")
            return v
        if re.fullmatch(r"\d+(?:\.\d+)?", tok):
            return Fraction(tok)
        if tok in self.FUNCS:
            self.take("(")
            args = [self.expr()]
            while self.peek() == ",":
                self.take()
                args.append(self.expr())
            self.take(")")
            if len(args) != self.FUNCS[tok]:
                raise ExprError(f"{tok} takes {self.FUNCS[tok]} argument(s)")
            return _apply(tok, args)
        raise ExprError(f"unexpected {tok!r}")


def _lift(v) -> CReal:
    return v if isinstance(v, CReal) else creal_from_rational(v)


def _add(a, b):
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a + b
    return _lift(a) + _lift(b)


def _neg(a):
    return -a


def _mul(a, b):
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a * b
    if isinstance(a, Fraction):
        return creal_scale(a, b)
    if isinstance(b, Fraction):
        return creal_scale(b, a)
    return a * b


def _apply(name: str, args):
    if name == "abs":
        return abs(args[0]) if isinstance(args[0], Fraction) else creal_abs(args[0])
    if name == "sqrt":
        if isinstance(args[0], Fraction) and args[0] < 0:
            raise DomainViolation(f"sqrt of the negative rational {args[0]}")
        return creal_sqrt(_lift(args[0]))
    a, b = args
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return min(a, b) if name == "min" else max(a, b)
    return (creal_min if name == "min" else creal_max)(_lift(a), _lift(b))


def parse_expr(text: str):
    """Parse an expression into an exact Fraction or a CReal."""
    return _Parser(text).parse()


def evaluate(text: str, bits: int) -> Fraction:
    v = parse_expr(text)
    return v if isinstance(v, Fraction) else v.approx(bits)


# --- output ---------------------------------------------------------------


def _decimal(q: Fraction, digits: int = 12) -> str:
    sign = "-" if q < 0 else ""
    q = abs(q)
    whole = q.numerator // q.denominator
    frac = q - whole
    scaled = frac.numerator * 10 ** digits // frac.denominator
    return f"{sign}{whole}.{scaled:0{digits}d}"


def _approx_record(q: Fraction, bits: int) -> dict:
    """A rational approximation with its bound; the decimal is a truncation of it."""
    return {"approx": serialize_rational(q), "decimal": _decimal(q), "error_bound": f"2^-{bits}"}


class _Out:
    def __init__(self, stream, table: bool):
        self.stream = stream
        self.table = table
        self.rows: List[dict] = []

    def emit(self, record: dict) -> None:
        if self.table:
            self.rows.append(record)
        else:
            self.stream.write(json.dumps(record, sort_keys=False) + "\n")

    def close(self) -> None:
        if not self.table or not self.rows:
            return
        # one table per run of records sharing the same keys
        groups: List[List[dict]] = []
        for r in self.rows:
            if groups and list(groups[-1][0]) == list(r):
                groups[-1].append(r)
            else:
                groups.append([r])
        for gi, grp in enumerate(groups):
            keys = list(grp[0])
            cells = [[_cell(r[k]) for k in keys] for r in grp]
            widths = [max(len(k), *(len(c[i]) for c in cells)) for i, k in enumerate(keys)]
            if gi:
                self.stream.write("\n")
            self.stream.write("  ".join(k.ljust(w) for k, w in zip(keys, widths)).rstrip() + "\n")
            for c in cells:
                self.stream.write("  ".join(v.ljust(w) for v, w in zip(c, widths)).rstrip() + "\n")


def _cell(v) -> str:
    if isinstance(v, str):
        return v
    return json.dumps(v)


# --- subcommands ----------------------------------------------------------


def cmd_eval(args, out: _Out) -> int:
    q = evaluate(args.expr, args.bits)
    out.emit({"expr": args.expr, "bits": args.bits, **_approx_record(q, args.bits)})
    return 0


def cmd_roots(args, out: _Out) -> int:
    p = parse_poly(args.poly)
    clusters = find_roots(p, args.bits)
    for c in clusters:
        out.emit({
            "center": serialize_gaussian(c.center),
            "center_decimal": f"{_decimal(c.center.re, 8)}{'+' if c.center.im >= 0 else '-'}{_decimal(abs(c.center.im), 8)}i",
            "radius": serialize_rational(c.radius),
            "multiplicity": c.multiplicity,
        })
    return 0


def parse_matrix(text: str):
    """Rows separated by ';', entries by ','; entries are rational or Gaussian-rational text."""
    rows = [r for r in text.replace(" ", "").split(";") if r]
    if not rows:
        raise ValueError("empty matrix")
    return [[parse_gaussian(a) for a in r.split(",")] for r in rows]


def cmd_norm(args, out: _Out) -> int:
    T = matrix_operator(parse_matrix(args.matrix))
    q = findim_norm(T).approx(args.bits)
    out.emit({"matrix": args.matrix, "bits": args.bits, **_approx_record(q, args.bits)})
    return 0


def _parse_g(text: str):
    t = text.strip().lower()
    m = re.fullmatch(r"const\s+(\d+)", t)
    if m:
        return const_program(int(m.group(1)))
    if t in ("succ", "successor"):
        return successor_program()
    m = re.fullmatch(r"index\s+(\d+)", t)
    if m:
        return int(m.group(1))
    raise ValueError(f"unknown g {text!r}; use 'const N', 'succ' or 'index E'")


def demo_halting_norm(args, out: _Out) -> int:
    prev = None
    monotone = True
    for n in range(1, args.stages + 1):
        stage = halting_stage(n)
        entry = halting_norm_entry(stage)
        if prev is not None and entry < prev:
            monotone = False
        prev = entry
        out.emit({"stage": n, "K_n": sorted(stage.members), "entry": serialize_rational(entry)})
    out.emit({"summary": "halting-norm", "stages": args.stages, "monotone": monotone, "bound": "1"})
    return 0


def demo_refuter(args, out: _Out) -> int:
    report = norm_bound_refuter(_parse_g(args.g), args.budget)
    out.emit({"g": args.g, **report.to_json()})
    return 0


def demo_sqrt2(args, out: _Out) -> int:
    oracle = naive_sqrt2_oracle() if args.oracle == "naive" else bounded_halting_oracle()
    corpus = load_corpus(args.corpus)
    n, rows = reduction_table(oracle, corpus)
    for r in rows:
        out.emit({"name": r.name, "x": str(r.x), "truth": r.truth, "verdict": r.verdict, "correct": r.correct})
    wrong = [r.name for r in rows if not r.correct]
    out.emit({"summary": "sqrt2-quasi", "oracle": args.oracle, "stage": n, "programs": len(rows),
              "correct": len(rows) - len(wrong), "witnesses": wrong})
    return 0


def demo_diagonal(args, out: _Out) -> int:
    b = diagonal_real(fixture_row)
    for k in range(1, args.k + 1):
        n = ternary_query_precision(k)
        a = b.row_norm(k).approx(n)
        eps = pow2(-n)
        possible = sorted(possible_ternary_digits(a - eps, a + eps, k))
        out.emit({
            "k": k,
            "digit": b.digit(k),
            "row_abs_approx": serialize_rational(a),
            "error_bound": f"2^-{n}",
            "possible_row_digits": possible,
        })
    q = b.partial_sum(args.k)
    out.emit({"summary": "total-numbering-diagonal", "digits": b.digits(args.k),
              "b_approx": serialize_rational(q), "error_bound": f"3^-{args.k}"})
    return 0


def demo_rs(args, out: _Out) -> int:
    T = halting_norm_operator()
    R, S = norm_pathology_RS(T, args.M)
    for j in range(args.stages):
        r, s, t = R.shape.entries(j), S.shape.entries(j), T.shape.entries(j)
        out.emit({"j": j, "r": serialize_gaussian(r), "s": serialize_gaussian(s), "t": serialize_rational(t),
                  "sum_equals_t": (r + s) == t})
    out.emit({"summary": "rs-pathology", "norm_R": str(R.exact_norm), "norm_S": str(S.exact_norm),
              "norm_R_plus_S": "r_K (not computable)"})
    return 0


def demo_pq(args, out: _Out) -> int:
    pq = norm_pathology_PQ(halting_thetas())
    bits = args.bits
    prev = None
    monotone = True
    for n in range(1, args.stages + 1):
        v = pq.stage_norm(n).approx(bits)
        if prev is not None and not pq.stage_leq(prev, n):
            monotone = False
        prev = n
        out.emit({"stage": n, "theta": serialize_rational(pq.thetas(n)), "abs_exp_plus_1": serialize_rational(v),
                  "decimal": _decimal(v), "error_bound": f"2^-{bits}"})
    out.emit({"summary": "pq-pathology", "norm_P": "1", "norm_Q": "1", "stage_values_nondecreasing": monotone})
    return 0


DEMOS: Dict[str, Callable] = {
    "halting-norm": demo_halting_norm,
    "norm-bound-refuter": demo_refuter,
    "sqrt2-quasi": demo_sqrt2,
    "total-numbering-diagonal": demo_diagonal,
    "rs-pathology": demo_rs,
    "pq-pathology": demo_pq,
}


def cmd_demo(args, out: _Out) -> int:
    return DEMOS[args.name](args, out)


# --- entry point ----------------------------------------------------------


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def build_parser(defaults: Dict) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="compana", description="Computable analysis toolkit.")
    parser.add_argument("--config", help="JSON file with default flag values")
    parser.add_argument("--table", action="store_true", help="aligned table instead of JSON lines")
    # the global flags are also accepted after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    common.add_argument("--table", action="store_true", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="evaluate a real expression to N bits")
    p.add_argument("expr")
    p.add_argument("--bits", type=_nonneg, default=defaults["bits"])
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("roots", parents=[common], help="isolate the roots of a polynomial")
    p.add_argument("--poly", required=True, help="coefficients low degree first, e.g. -2,0,1")
    p.add_argument("--bits", type=_nonneg, default=defaults["bits"])
    p.set_defaults(func=cmd_roots)

    p = sub.add_parser("norm", parents=[common], help="operator norm of a matrix")
    p.add_argument("--matrix", required=True, help="rows separated by ';', e.g. '1,1;0,1'")
    p.add_argument("--bits", type=_nonneg, default=defaults["bits"])
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("demo", parents=[common], help="run one of the counterexample constructions")
    p.add_argument("name", choices=sorted(DEMOS))
    p.add_argument("--stages", type=_nonneg, default=defaults["stages"])
    p.add_argument("--bits", type=_nonneg, default=defaults["bits"])
    p.add_argument("--k", type=_nonneg, default=defaults["k"])
    p.add_argument("--M", type=int, default=defaults["M"])
    p.add_argument("--g", default="const 1000")
    p.add_argument("--budget", type=int, default=defaults["budget"])
    p.add_argument("--oracle", choices=("cheating", "naive"), default=defaults["oracle"])
    p.add_argument("--corpus", default=None, help="curated corpus path")
    p.set_defaults(func=cmd_demo)
    return parser


def _load_config(argv: Sequence[str]) -> Dict:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    cfg = dict(DEFAULTS)
    if known.config:
        with open(known.config, encoding="utf-8") as fh:
            data = json.load(fh)
        unknown = set(data) - set(DEFAULTS)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(data)
    return cfg


def _glue_values(argv: List[str]) -> List[str]:
    """Attach values such as ``--poly -2,0,1`` so argparse does not read them as flags."""
    out: List[str] = []
    i = 0
    while i < len(argv):
        if argv[i] in ("--poly", "--matrix") and i + 1 < len(argv):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = _glue_values(list(sys.argv[1:] if argv is None else argv))
    try:
        defaults = _load_config(argv)
    except (OSError, ValueError) as exc:
        print(f"compana: config: {exc}", file=sys.stderr)
        return 2
    args = build_parser(defaults).parse_args(argv)
    out = _Out(sys.stdout, args.table)
    try:
        code = args.func(args, out)
    except ExprError as exc:
        print(f"compana: parse error: {exc}", file=sys.stderr)
        return 2
    except DomainViolation as exc:
        print(f"compana: domain error: {exc}", file=sys.stderr)
        return 1
    except (BudgetExhausted, RootBudgetError) as exc:
        print(f"compana: budget exhausted: {exc}", file=sys.stderr)
        return 1
    except (CertificateError, ValueError, OSError) as exc:
        print(f"compana: error: {exc}", file=sys.stderr)
        return 2
    out.close()
    return code


if __name__ == "__main__":
    sys.exit(main())
