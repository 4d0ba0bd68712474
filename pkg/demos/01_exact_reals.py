"""A tour of computable reals: rational streams with a 2^-n error budget.

Run with ``python demos/01_exact_reals.py``.
"""

from fractions import Fraction

from compana.creal import (
    CSeq,
    creal_from_rational,
    creal_mul,
    creal_sqrt,
    cseq_add,
    diagonal_real,
    fixture_row,
    lim_star,
)
from compana.scalars import pow2

print("A computable real is a function n -> q_n with |q_n - x| <= 2^-n.")
root2 = creal_sqrt(creal_from_rational(2))
for n in (4, 16, 30):
    q = root2.approx(n)
    print(f"  sqrt(2) at n={n:2d}: {q}   |q^2 - 2| = {float(abs(q * q - 2)):.3e}")

print("\nProducts keep the same contract; sqrt(2) * sqrt(2) reads back as 2.")
two = creal_mul(root2, root2)
print(f"  error at n=40: {float(abs(two.approx(40) - 2)):.3e} (budget {float(pow2(-40)):.3e})")

print("\nLimits need a modulus. The partial sums of sum 3^-k converge to 1/2:")
partial = CSeq(lambda k: creal_from_rational(sum(Fraction(1, 3**j) for j in range(1, k + 1))), lambda N: N)
tail = CSeq(lambda k: creal_from_rational(Fraction(1, 2) + pow2(-k)), lambda N: N)
total = lim_star(cseq_add(partial, tail))
print(f"  lim(partial + (1/2 + 2^-k)) at n=20: {float(total.approx(20))} (exact limit 1)")

print("\nA modulus-giving matrix of rationals cannot list every real.")
b = diagonal_real(fixture_row)
digits = b.digits(12)
print(f"  ternary digits of the diagonal real: {digits}")
for k in (1, 2, 3):
    limit = b.row_norm(k).approx(30)
    print(f"  row {k} has |limit| ~ {float(limit):.6f}; digit {k} of b is {digits[k - 1]}, which no expansion of it uses")
