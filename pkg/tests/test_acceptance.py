"""The twelve primary acceptance criteria, each with its runtime limit.

Each test prints one ``criterion N PASS|FAIL`` line; the lines are repeated
in the terminal summary.
"""

import json
import math
import random
from fractions import Fraction

from compana.cli import main as cli_main
from compana.creal import (
    CSeq,
    creal_from_rational,
    creal_sqrt,
    cseq_add,
    cseq_scale,
    diagonal_real,
    fixture_row,
    lim_star,
    lim_star_diag,
)
from compana.numberings import (
    A0,
    DENSE,
    AlphaIndex,
    QuasiIndex,
    alpha_decode,
    beta_decode,
    constant_program,
    dyadic_tail_program,
    load_corpus,
    sqrt2_alpha_program,
    sqrt2_scaled_program,
    zeta,
    zeta_program,
)
from compana.operators import (
    const_program,
    diagonal_operator,
    finite_rank_norm,
    finite_rank_operator,
    findim_norm,
    gram_product,
    h_index,
    halting_norm_operator,
    matrix_operator,
    norm_bound_refuter,
    norm_pathology_RS,
    op_adjoint_matrix,
    op_apply,
    op_compose,
    successor_program,
)
from compana.roots import CPoly, find_roots
from compana.scalars import GaussianRational as G, parse_rational, pow2
from compana.spaces import (
    FinDim,
    L2,
    basis_vector,
    combo,
    cvector_linear,
    double_sum_direct,
    inner_product,
    merge_double_sum,
    norm_upper,
    vector_from_combo,
)
from compana.toyrec import HaltingTable, encode, halting_stage, run, step_eval
from oracles import expansion_digits, power_iteration_norm, sqrt_expansion_digits


def rand_rat(rng, lo=-5, hi=5, den=8):
    d = rng.randint(1, den)
    return Fraction(rng.randint(lo * d, hi * d), d)


def const(q):
    return creal_from_rational(q)


# --- 1 ---------------------------------------------------------------------


def test_c01_modulus_calculus(criterion):
    with criterion(1, "modulus calculus: sum, scalar and diagonal lim* on 500 sequences", 10):
        rng = random.Random(1)
        for inst in range(500):
            L1, L2_, c = rand_rat(rng), rand_rat(rng), rand_rat(rng)
            d1, d2 = rand_rat(rng, -1, 1), rand_rat(rng, -1, 1)
            s = CSeq(lambda k, L=L1, d=d1: const(L + d * pow2(-k)), lambda N: N)
            t = CSeq(lambda k, L=L2_, d=d2: const(L + d * pow2(-k)), lambda N: N)
            kind = inst % 3
            if kind == 0:
                x, limit = lim_star(cseq_add(s, t)), L1 + L2_
            elif kind == 1:
                x, limit = lim_star(cseq_scale(c, s)), c * L1
            else:
                x = lim_star_diag(
                    lambda k, l, L=L1, a=d1, b=d2: const(L + a * pow2(-k) + b * pow2(-l)),
                    lambda k, N: N,
                    lambda N: N,
                )
                limit = L1
            for n in (0, 4, 13, 30):
                assert abs(x.approx(n) - limit) <= pow2(-n), (inst, n)


# --- 2 ---------------------------------------------------------------------


def test_c02_sqrt2_certification(criterion, capsys):
    with criterion(2, "sqrt(2) certified to 30 bits, library and CLI", 1):
        q = creal_sqrt(const(2)).approx(30)
        assert abs(q * q - 2) <= pow2(-28)
        assert cli_main(["eval", "sqrt(2)", "--bits", "30"]) == 0
        out = capsys.readouterr().out
        p = parse_rational(json.loads(out)["approx"])
        assert abs(p * p - 2) <= pow2(-28)


# --- 3 ---------------------------------------------------------------------


def test_c03_heaviside_reindexing(criterion):
    with criterion(3, "merge_double_sum equals brute-force double sums (200 instances)", 1):
        rng = random.Random(3)
        for _ in range(200):
            x = rng.randint(0, 5)
            bounds = [rng.randint(0, 5) for _ in range(x + 1)]
            table = [[G(rand_rat(rng), rand_rat(rng)) for _ in range(x + 1)] for _ in range(6)]
            merged = merge_double_sum(x, bounds, table)
            direct = double_sum_direct(x, bounds, table)
            assert len(merged) == max(bounds) + 1
            for i, c in enumerate(merged):
                assert c == direct.get(i, G())


# --- 4 ---------------------------------------------------------------------


def test_c04_findim_norm(criterion):
    with criterion(4, "finite-dimensional norm vs power iteration (1 + 50 matrices)", 60):
        q = findim_norm(matrix_operator([[1, 1], [0, 1]])).approx(20)
        expected = (1 + creal_sqrt(const(5)).approx(40)) / 2  # sqrt((3+sqrt5)/2) = (1+sqrt5)/2
        assert abs(q - expected) <= pow2(-10)
        oracle = creal_sqrt(const(power_iteration_norm([[1, 1], [0, 1]]))).approx(30)
        assert abs(q - oracle) <= pow2(-10)
        rng = random.Random(4)
        for _ in range(50):
            n = rng.choice([2, 3])
            rows = [[rand_rat(rng, -5, 5, 4) for _ in range(n)] for _ in range(n)]
            q = findim_norm(matrix_operator(rows)).approx(20)
            ref = creal_sqrt(const(power_iteration_norm(rows))).approx(30)
            assert abs(q - ref) <= pow2(-10), rows


# --- 5 ---------------------------------------------------------------------


def test_c05_effective_fta(criterion):
    with criterion(5, "effective FTA: sqrt 2, triple root, exhaustive quadratic sweep", 120):
        cls = find_roots(CPoly.from_coeffs([-2, 0, 1]), 30)
        assert len(cls) == 2
        assert all(abs(c.center.re**2 - c.center.im**2 - 2) <= pow2(-25) for c in cls)
        assert all(abs(2 * c.center.re * c.center.im) <= pow2(-25) for c in cls)
        cube = find_roots(CPoly.from_coeffs([-1, 3, -3, 1]), 10)
        assert len(cube) == 1 and cube[0].multiplicity == 3 and cube[0].contains(G(1))
        swept = 0
        for a in range(-5, 6):
            if a == 0:
                continue
            for b in range(-5, 6):
                for c in range(-5, 6):
                    D = b * b - 4 * a * c
                    if D < 0 or math.isqrt(D) ** 2 != D:
                        continue
                    s = math.isqrt(D)
                    roots = [Fraction(-b - s, 2 * a), Fraction(-b + s, 2 * a)]
                    N = 16
                    cls = find_roots(CPoly.from_coeffs([c, b, a]), N)
                    assert sum(cl.multiplicity for cl in cls) == 2
                    for r in roots:
                        assert any(cl.contains(G(r)) for cl in cls), (a, b, c)
                    for cl in cls:
                        assert cl.radius <= pow2(-N)
                        assert cl.multiplicity == sum(cl.contains(G(r)) for r in roots)
                    swept += 1
        assert swept > 100


# --- 6 ---------------------------------------------------------------------


def test_c06_rank_one_norm_law(criterion):
    with criterion(6, "rank-1 law ||x (.) y|| = ||x|| ||y||, exact radicands (100 combos)", None):
        rng = random.Random(6)
        for _ in range(100):
            def rand_combo():
                return combo(
                    (rng.randint(0, 6), G(rand_rat(rng), rand_rat(rng) if rng.random() < 0.5 else 0))
                    for _ in range(rng.randint(1, 4))
                )

            x, y = rand_combo(), rand_combo()
            vx, vy = vector_from_combo(L2(), x), vector_from_combo(L2(), y)
            ((entry,),) = gram_product([vx], [vy])
            assert entry == G(x.norm2() * y.norm2())
            q = finite_rank_norm([vx], [vy]).approx(20)
            ref = creal_sqrt(const(x.norm2() * y.norm2())).approx(30)
            assert abs(q - ref) <= pow2(-20) + pow2(-30)


# --- 7 ---------------------------------------------------------------------


def test_c07_halting_norm_operator(criterion):
    with criterion(7, "halting-norm operator: exact stage entries, monotone, exact action (n <= 200)", 30):
        T = halting_norm_operator(lambda n, table=HaltingTable(): halting_stage(n, table))
        prev = Fraction(0)
        for n in range(201):
            K_n = [e for e in range(n + 1) if step_eval(e, e, n).halted]
            expect = sum((Fraction(1, 2**k) for k in K_n if k >= 1), Fraction(0))
            entry = T.shape.entries(n)
            assert entry == expect
            assert prev <= entry <= 1
            prev = entry
            if n % 10 == 0:
                assert op_apply(T, basis_vector(L2(), n)).approx(12) == combo([(n, entry)])


# --- 8 ---------------------------------------------------------------------


def test_c08_norm_bound_refutation(criterion):
    with criterion(8, "norm-bound refuter: exact g(h(c,c)) + 1 > g(h(c,c)) for const 1000 and successor", 60):
        for g in (const_program(1000), successor_program()):
            rep = norm_bound_refuter(g)
            budget = 1 << (2 * rep.c.bit_length() + 256)
            claim = run(g, {0: h_index(rep.c, rep.c)}, budget).value
            phi = run(rep.program, {0: rep.c}, budget).value
            assert rep.claimed_bound == claim and rep.norm == phi == claim + 1
            assert rep.norm > rep.claimed_bound
        assert norm_bound_refuter(const_program(1000)).norm == 1001


# --- 9 ---------------------------------------------------------------------


def test_c09_quasi_numbering(criterion):
    with criterion(9, "beta totality, alpha-beta agreement to 2^-20, zeta dichotomy on 50 programs", 120):
        for e in range(201):
            for k in (1, 2, 4):
                terms = beta_decode(QuasiIndex(e, k)).terms(300)
                assert len(terms) == 301 and all(isinstance(t, Fraction) for t in terms)
        corpus = [
            sqrt2_alpha_program(),
            dyadic_tail_program(),
            sqrt2_scaled_program(3, 2),
            sqrt2_scaled_program(5, 3),
            constant_program(DENSE.index(Fraction(1, 3))),
            constant_program(DENSE.index(Fraction(-7, 2))),
        ]
        for p in corpus:
            a = alpha_decode(AlphaIndex(encode(p), program=p), 1 << 80)
            for n in range(21):  # the certificate survives every query made
                a.approx(n)
            s = beta_decode(QuasiIndex.of(p, 1))
            assert s.prefix(1 << 70, max_m=22) == 22
            assert abs(s.at(1 << 70, max_m=22) - a.approx(20)) <= pow2(-20)
        entries = load_corpus()
        assert len(entries) == 50
        assert sum(e.halts for e in entries) == 25
        for entry in entries:
            z = run(zeta_program(entry.index), {0: 1}, 10**19)
            assert z.halted == entry.halts and (z.halted or z.diverges)
            stage = z.steps + 2 if z.halted else 1 << 64
            limit = beta_decode(zeta(entry.index)).at(stage)
            assert limit == (2 * A0 if entry.halts else A0)


# --- 10 --------------------------------------------------------------------


def test_c10_total_numbering_diagonal(criterion):
    with criterion(10, "diagonal real avoids every expansion digit of 20 row limits", 10):
        for i in range(1, 21):
            for j in range(60):
                assert abs(fixture_row(i, j) - fixture_row(i, j + 1)) < pow2(-j)
        b = diagonal_real(fixture_row)
        for k in range(1, 21):
            if k % 3 == 1:
                valid = sqrt_expansion_digits(k, k)
            elif k % 3 == 0:
                valid = expansion_digits(Fraction(k, 27), k)
            else:
                valid = expansion_digits(Fraction(k, 5), k)
            assert b.digit(k) not in valid, k


# --- 11 --------------------------------------------------------------------


def test_c11_rs_pathology(criterion):
    with criterion(11, "R + S = T entrywise with ||R|| = ||S|| = 2 exactly", None):
        T = halting_norm_operator()
        R, S = norm_pathology_RS(T, 2)
        r, s, t = R.shape.entries, S.shape.entries, T.shape.entries
        assert R.exact_norm == S.exact_norm == 2 and R.bound == S.bound == 2
        # diagonal sup rule: |r_0| = 2 and every other entry is at most 1/2
        assert r(0).abs2() == s(0).abs2() == 4
        for j in range(201):
            assert r(j) + s(j) == G(t(j))
            if j:
                assert r(j).abs2() <= Fraction(1, 4) and s(j).abs2() <= Fraction(1, 4)


# --- 12 --------------------------------------------------------------------


def test_c12_operator_invariants(criterion):
    with criterion(12, "operator linearity, bound, adjoint pairing, associativity (200 samples)", 60):
        rng = random.Random(12)
        ops = [
            diagonal_operator(L2(), lambda j: pow2(-j), bound=1),
            halting_norm_operator(),
            finite_rank_operator(
                [vector_from_combo(L2(), combo([(0, 1), (2, Fraction(1, 2))])), basis_vector(L2(), 1)],
                [basis_vector(L2(), 0), vector_from_combo(L2(), combo([(1, 1), (3, -1)]))],
            ),
        ]
        ops.append(op_compose(ops[0], ops[2]))

        def rand_combo(top):
            return combo((rng.randint(0, top), rand_rat(rng)) for _ in range(rng.randint(0, 4)))

        def rand_vec(space, top):
            return vector_from_combo(space, rand_combo(top))

        for sample in range(200):
            N = rng.randint(0, 30)
            kind = sample % 4
            if kind == 0:
                T = rng.choice(ops)
                x, y = rand_vec(L2(), 6), rand_vec(L2(), 6)
                a, b = rand_rat(rng), rand_rat(rng)
                lhs = op_apply(T, cvector_linear([x, y], [a, b])).approx(N)
                rhs = cvector_linear([op_apply(T, x), op_apply(T, y)], [a, b]).approx(N)
                assert (lhs - rhs).norm2() <= (4 * pow2(-N)) ** 2
            elif kind == 1:
                T = rng.choice(ops)
                c = rand_combo(6)
                y = op_apply(T, vector_from_combo(L2(), c)).approx(N)
                limit = T.bound * (norm_upper(c, 16) + 1) + pow2(-N)
                assert y.norm2() <= limit * limit
            elif kind == 2:
                n = rng.choice([2, 3])
                M = matrix_operator([[G(rand_rat(rng), rand_rat(rng)) for _ in range(n)] for _ in range(n)])
                x, y = rand_vec(FinDim(n), n - 1), rand_vec(FinDim(n), n - 1)
                u = inner_product(op_apply(op_adjoint_matrix(M), y), x).approx(N)
                v = inner_product(y, op_apply(M, x)).approx(N)
                assert (u - v).abs2() <= (4 * pow2(-N)) ** 2
            else:
                F, Gop, H = (rng.choice(ops) for _ in range(3))
                j = rng.randint(0, 5)
                left = op_compose(op_compose(F, Gop), H).images(j).approx(N)
                right = op_compose(F, op_compose(Gop, H)).images(j).approx(N)
                assert (left - right).norm2() <= (4 * pow2(-N)) ** 2
