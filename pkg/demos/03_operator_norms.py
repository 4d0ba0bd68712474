"""Operator norms: computable in finite dimensions, not in general.

Run with ``python demos/03_operator_norms.py``.
"""

from compana.operators import (
    const_program,
    findim_norm,
    halting_norm_operator,
    halting_thetas,
    matrix_operator,
    norm_bound_refuter,
    norm_pathology_PQ,
    norm_pathology_RS,
)
from compana.roots import CPoly, find_roots

print("In finite dimensions the norm is the root of the top eigenvalue of A*A.")
q = findim_norm(matrix_operator([[1, 1], [0, 1]])).approx(30)
print(f"  ||[[1,1],[0,1]]|| ~ {float(q):.12f} (the golden ratio)")

print("\nThose eigenvalues come from certified root isolation:")
for c in find_roots(CPoly.from_coeffs([1, -3, 1]), 20):
    print(f"  cluster centre {float(c.center.re):.8f}, radius 2^-20, multiplicity {c.multiplicity}")

print("\nA diagonal operator built from the halting problem has bound 1 but no computable norm.")
T = halting_norm_operator()
for n in (0, 3, 5, 20, 100):
    print(f"  entry {n:3d}: {T.shape.entries(n)}")
print("The entries climb to a left-computable real whose value no program can pin down.")

print("\nNo program bounds every operator's norm. Against g = const 1000:")
rep = norm_bound_refuter(const_program(1000))
print(f"  witness c has {rep.c.bit_length()} bits; its operator has norm {rep.norm} > {rep.claimed_bound}")

print("\nSums behave badly too. R and S have norm exactly 2, yet R + S is the operator above.")
R, S = norm_pathology_RS(T, 2)
print(f"  ||R|| = {R.exact_norm}, ||S|| = {S.exact_norm}, entry 5 of R+S = {(R.shape.entries(5) + S.shape.entries(5)).re}")

pq = norm_pathology_PQ(halting_thetas())
print("\nP is unitary with halting-driven angles and Q = I. The stage values of ||P + Q|| only rise:")
print("  " + ", ".join(f"{float(pq.stage_norm(n).approx(20)):.6f}" for n in (0, 2, 5, 10)))
