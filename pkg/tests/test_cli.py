import json
import subprocess
import sys
from fractions import Fraction

import pytest

from compana.cli import evaluate, main, parse_expr
from compana.scalars import parse_gaussian, parse_rational, pow2


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def lines(out):
    return [json.loads(ln) for ln in out.splitlines() if ln.strip()]


# --- eval ------------------------------------------------------------------


def test_eval_sqrt2(capsys):
    code, out, _ = run_cli(capsys, "eval", "sqrt(2)", "--bits", "10")
    (rec,) = lines(out)
    q = parse_rational(rec["approx"])
    assert code == 0 and rec["error_bound"] == "2^-10"
    assert abs(q * q - 2) <= 3 * pow2(-10)


def test_eval_exact_sum(capsys):
    code, out, _ = run_cli(capsys, "eval", "1/3 + 1/6", "--bits", "4")
    assert code == 0 and lines(out)[0]["approx"] == "1/2"


def test_eval_domain_error(capsys):
    code, out, err = run_cli(capsys, "eval", "sqrt(-1)")
    assert code != 0 and out == "" and err


def test_eval_parse_error(capsys):
    code, _, err = run_cli(capsys, "eval", "2 +* 3")
    assert code == 2 and "error" in err


@pytest.mark.parametrize(
    "text, value",
    [
        ("min(3, 1/2) * 4", Fraction(2)),
        ("abs(-7/2) - max(1, 2)", Fraction(3, 2)),
        ("-(1.25)", Fraction(-5, 4)),
        ("2*(3+4)/7", Fraction(2)),
    ],
)
def test_expression_grammar(text, value):
    assert evaluate(text, 20) == value


def test_division_needs_rational_divisor():
    with pytest.raises(ValueError):
        parse_expr("1/sqrt(2)")


# --- roots and norm --------------------------------------------------------


def test_roots_sqrt2(capsys):
    code, out, _ = run_cli(capsys, "roots", "--poly", "-2,0,1", "--bits", "20")
    recs = lines(out)
    assert code == 0 and len(recs) == 2
    centers = [parse_gaussian(r["center"]).re for r in recs]
    assert centers == sorted(centers)
    for c in centers:
        assert abs(abs(c) - Fraction(141421, 100000)) < Fraction(1, 10**4)


def test_roots_i(capsys):
    _, out, _ = run_cli(capsys, "roots", "--poly", "1,0,1", "--bits", "10")
    ims = sorted(parse_gaussian(r["center"]).im for r in lines(out))
    assert ims == [-1, 1]


def test_roots_degree_zero(capsys):
    code, _, err = run_cli(capsys, "roots", "--poly", "0")
    assert code != 0 and "degree" in err


def test_norm(capsys):
    code, out, _ = run_cli(capsys, "norm", "--matrix", "1,1;0,1", "--bits", "20")
    q = parse_rational(lines(out)[0]["approx"])
    assert code == 0 and abs(q - Fraction(16180339887, 10**10)) <= pow2(-19)


# --- demos -----------------------------------------------------------------


def test_demo_halting_norm(capsys):
    _, out, _ = run_cli(capsys, "demo", "halting-norm", "--stages", "8")
    recs = lines(out)
    entries = [parse_rational(r["entry"]) for r in recs if "stage" in r]
    assert len(entries) == 8 and entries == sorted(entries)
    assert recs[-1]["monotone"] is True


def test_demo_refuter(capsys):
    _, out, _ = run_cli(capsys, "demo", "norm-bound-refuter", "--g", "const 1000")
    (rec,) = lines(out)
    assert rec["inequality"] == "1001 > 1000" and rec["violated"]


def test_demo_total_numbering(capsys):
    _, out, _ = run_cli(capsys, "demo", "total-numbering-diagonal", "--k", "10")
    recs = lines(out)
    digits = [r for r in recs if "digit" in r]
    assert len(digits) == 10
    assert all(r["digit"] not in r["possible_row_digits"] for r in digits)


def test_demo_sqrt2_quasi_naive_finds_witness(capsys):
    _, out, _ = run_cli(capsys, "demo", "sqrt2-quasi", "--oracle", "naive")
    recs = [r for r in lines(out) if "verdict" in r]
    assert len(recs) == 50 and any(not r["correct"] for r in recs)


def test_demo_pathologies(capsys):
    _, out, _ = run_cli(capsys, "demo", "rs-pathology", "--stages", "6")
    assert all(r["sum_equals_t"] for r in lines(out) if "j" in r)
    _, out, _ = run_cli(capsys, "demo", "pq-pathology", "--stages", "6")
    assert lines(out)[-1]["stage_values_nondecreasing"] is True


def test_unknown_demo(capsys):
    with pytest.raises(SystemExit) as info:
        main(["demo", "no-such-demo"])
    assert info.value.code == 2


def test_table_mode(capsys):
    code, out, _ = run_cli(capsys, "demo", "halting-norm", "--stages", "3", "--table")
    assert code == 0 and not out.lstrip().startswith("{")
    assert "entry" in out.splitlines()[0]


def test_config_defaults(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bits": 7}))
    _, out, _ = run_cli(capsys, "--config", str(cfg), "eval", "sqrt(2)")
    assert lines(out)[0]["error_bound"] == "2^-7"
    cfg.write_text(json.dumps({"nonsense": 1}))
    code, _, _ = run_cli(capsys, "--config", str(cfg), "eval", "1")
    assert code == 2


def test_determinism(capsys):
    argv = ["demo", "pq-pathology", "--stages", "5"]
    _, a, _ = run_cli(capsys, *argv)
    _, b, _ = run_cli(capsys, *argv)
    assert a == b


def test_module_entry_point():
    r = subprocess.run(
        [sys.executable, "-m", "compana", "eval", "sqrt(2)", "--bits", "30"],
        capture_output=True, text=True, check=True,
    )
    q = parse_rational(json.loads(r.stdout)["approx"])
    assert abs(q * q - 2) <= pow2(-28)
