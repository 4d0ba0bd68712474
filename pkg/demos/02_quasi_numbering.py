"""Two numberings of reals by programs, and why one of them is total.

Run with ``python demos/02_quasi_numbering.py``.
"""

from compana.numberings import (
    A0,
    QuasiIndex,
    alpha_decode,
    beta_decode,
    bounded_halting_oracle,
    load_corpus,
    naive_sqrt2_oracle,
    reduction_table,
    sqrt2_alpha_program,
    zeta,
    zeta_program,
)
from compana.toyrec import encode, run

prog = sqrt2_alpha_program()
print("The partial numbering alpha reads a program's outputs as a fast Cauchy sequence.")
x = alpha_decode(encode(prog), 1 << 80)
print(f"  alpha value of the sqrt(2) program at n=20: {float(x.approx(20))}")

print("\nThe quasi-numbering beta turns every index into some sequence.")
s = beta_decode(QuasiIndex.of(prog, 1))
print(f"  beta prefix at a huge stage: {s.prefix(1 << 70, max_m=22)} outputs trusted")
print(f"  beta value there: {float(s.at(1 << 70, max_m=22))}")
print(f"  a program that never halts decodes to the constant a_0 = {A0}: {beta_decode(QuasiIndex(5, 1)).at(50)}")

corpus = load_corpus()
print(f"\nzeta(x) has limit 2 a_0 when program x halts on itself and a_0 otherwise ({len(corpus)} programs):")
for entry in corpus[:4]:
    # read past the halting time when there is one; a diverging run is proven so
    z = run(zeta_program(entry.index), {0: 1}, 10**19)
    stage = z.steps + 2 if z.halted else 1 << 64
    value = beta_decode(zeta(entry.index)).at(stage)
    print(f"  {entry.name:24s} halts={entry.halts!s:5s} value at stage {stage:.3g}: {value}")

print("\nAn oracle deciding 'limit = sqrt 2' would solve halting on the corpus.")
for name, oracle in (("cheating", bounded_halting_oracle()), ("naive", naive_sqrt2_oracle())):
    n, rows = reduction_table(oracle, corpus)
    wrong = sum(not r.correct for r in rows)
    print(f"  {name:8s} oracle at stage {n}: {len(rows) - wrong}/{len(rows)} verdicts right")
print("The cheating oracle only succeeds because it runs the interpreter itself.")
