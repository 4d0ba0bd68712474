from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from compana.creal import creal_from_rational, creal_scale, creal_sqrt
from compana.operators import (
    BasicNbhd,
    Membership,
    PreconditionError,
    UnsupportedShape,
    const_program,
    continuity_modulus,
    diagonal_operator,
    eff_compact_norm,
    exp_i,
    finite_rank_norm,
    finite_rank_operator,
    findim_norm,
    gram_product,
    h_index,
    halting_norm_entry,
    halting_norm_operator,
    halting_thetas,
    identity_operator,
    matrix_operator,
    nbhd_member_semidecide,
    norm_bound_refuter,
    norm_pathology_PQ,
    norm_pathology_RS,
    oex_operator,
    op_adjoint_matrix,
    op_apply,
    op_compose,
    op_from_json,
    op_to_json,
    seminorm_eval,
    strong_seminorm,
    successor_program,
    triangle_function,
    weak_seminorm,
    zero_operator,
)
from compana.scalars import GaussianRational as G, pow2
from compana.spaces import (
    FinDim,
    L2,
    SpaceMismatch,
    basis_vector,
    combo,
    cvector_linear,
    cvector_lim_star,
    inner_product,
    norm_upper,
    vector_from_combo,
)
from compana.toyrec import DIVERGING, HaltingTable, halting_stage, run
from oracles import mat_mul, power_iteration_norm

rat = st.fractions(min_value=-5, max_value=5, max_denominator=4)


# --- oracles ---------------------------------------------------------------


def dist2(a, b):
    return (a - b).norm2()


def close(x, y, N, slack=4):
    """||x.approx(N) - y.approx(N)|| <= slack 2^-N, on squares."""
    return dist2(x.approx(N), y.approx(N)) <= (slack * pow2(-N)) ** 2


# --- sample operators ------------------------------------------------------


def halving_diagonal():
    return diagonal_operator(L2(), lambda j: pow2(-j), bound=1, label="2^-j")


def computable_diagonal():
    # entries sqrt(2)/2^(j+1): exercises the non-exact path
    s2 = creal_sqrt(creal_from_rational(2))
    return diagonal_operator(L2(), lambda j: creal_scale(pow2(-j - 1), s2), bound=1)


def rank_two():
    xs = [vector_from_combo(L2(), combo([(0, 1), (2, Fraction(1, 2))])), basis_vector(L2(), 1)]
    ys = [basis_vector(L2(), 0), vector_from_combo(L2(), combo([(1, 1), (3, -1)]))]
    return finite_rank_operator(xs, ys)


L2_OPERATORS = {
    "halving": halving_diagonal,
    "computable": computable_diagonal,
    "rank_two": rank_two,
    "halting": halting_norm_operator,
    "composite": lambda: op_compose(computable_diagonal(), rank_two()),
}


l2_combos = st.lists(st.tuples(st.integers(0, 6), rat), max_size=4).map(combo)


# --- application -----------------------------------------------------------


def test_identity_applies_as_identity():
    x = vector_from_combo(L2(), combo([(0, 1), (5, Fraction(-2, 3))]))
    assert op_apply(identity_operator(L2()), x).approx(12) == x.approx(12)


def test_halving_diagonal_on_e1():
    y = op_apply(halving_diagonal(), basis_vector(L2(), 1))
    assert y.approx(9) == combo([(1, Fraction(1, 2))])


def test_swap_matrix_exact():
    T = matrix_operator([[0, 1], [1, 0]])
    y = op_apply(T, vector_from_combo(FinDim(2), combo([(0, 1), (1, 2)])))
    for n in (0, 7, 30):
        assert y.approx(n) == combo([(0, 2), (1, 1)])


def test_apply_to_limit_vector():
    geo = cvector_lim_star(
        lambda k: vector_from_combo(L2(), combo((j, pow2(-j)) for j in range(k + 1))), lambda N: N + 1
    )
    y = op_apply(halving_diagonal(), geo)  # sum 4^-j e_j
    for n in (0, 10, 20):
        assert dist2(y.approx(n), combo((j, pow2(-2 * j)) for j in range(n + 2))) <= 4 * pow2(-2 * n)


def test_space_mismatch_on_apply():
    with pytest.raises(SpaceMismatch):
        op_apply(matrix_operator([[1, 0], [0, 1]]), basis_vector(L2(), 0))


@settings(max_examples=30)
@given(st.sampled_from(sorted(L2_OPERATORS)), l2_combos, l2_combos, rat, rat, st.integers(0, 30))
def test_linearity(name, x, y, a, b, N):
    T = L2_OPERATORS[name]()
    vx, vy = vector_from_combo(L2(), x), vector_from_combo(L2(), y)
    lhs = op_apply(T, cvector_linear([vx, vy], [a, b]))
    rhs = cvector_linear([op_apply(T, vx), op_apply(T, vy)], [a, b])
    assert close(lhs, rhs, N)


@settings(max_examples=30)
@given(st.sampled_from(sorted(L2_OPERATORS)), l2_combos, st.integers(0, 30))
def test_bound_certificate(name, x, N):
    T = L2_OPERATORS[name]()
    y = op_apply(T, vector_from_combo(L2(), x)).approx(N)
    limit = T.bound * (norm_upper(x, 16) + 1) + pow2(-N)
    assert y.norm2() <= limit * limit


def test_spot_check():
    assert halving_diagonal().spot_check(range(6), 20)
    liar = diagonal_operator(L2(), [3, 1], bound=1)
    assert not liar.spot_check([0], 10)


# --- composition and adjoints ----------------------------------------------


def test_compose_scalars():
    two = diagonal_operator(L2(), lambda j: 2, bound=2)
    three = diagonal_operator(L2(), lambda j: 3, bound=3)
    T = op_compose(two, three)
    assert T.bound == 6
    assert op_apply(T, basis_vector(L2(), 0)).approx(10) == combo([(0, 6)])


def test_compose_with_identity():
    T = rank_two()
    TI = op_compose(T, identity_operator(L2()))
    for j in range(4):
        assert close(TI.images(j), T.images(j), 15, slack=2)


matrices = st.integers(1, 3).flatmap(
    lambda n: st.lists(st.lists(rat, min_size=n, max_size=n), min_size=n, max_size=n)
)


@settings(max_examples=30)
@given(matrices, st.data())
def test_compose_matrices_is_product(A, data):
    n = len(A)
    B = data.draw(st.lists(st.lists(rat, min_size=n, max_size=n), min_size=n, max_size=n))
    P = op_compose(matrix_operator(A), matrix_operator(B))
    prod = mat_mul([[G(a) for a in r] for r in A], [[G(b) for b in r] for r in B])
    for j in range(n):
        assert P.images(j).approx(20) == combo((i, prod[i][j]) for i in range(n))


@settings(max_examples=20)
@given(st.integers(0, 5), st.integers(0, 25))
def test_compose_associative(j, N):
    F, Gop, H = halving_diagonal(), rank_two(), computable_diagonal()
    left = op_compose(op_compose(F, Gop), H)
    right = op_compose(F, op_compose(Gop, H))
    assert close(left.images(j), right.images(j), N)


def test_adjoint_examples():
    T = op_adjoint_matrix(matrix_operator([[0, 1], [0, 0]]))
    assert T.shape.rows == ((G(0), G(0)), (G(1), G(0)))
    i = G(0, 1)
    U = op_adjoint_matrix(matrix_operator([[i, 0], [0, 0]]))
    assert U.shape.rows[0][0] == -i


@given(st.lists(st.lists(st.builds(G, rat, rat), min_size=2, max_size=2), min_size=3, max_size=3))
def test_adjoint_involution(rows):
    T = matrix_operator(rows)
    assert op_adjoint_matrix(op_adjoint_matrix(T)).shape.rows == T.shape.rows


@given(
    st.lists(st.lists(st.builds(G, rat, rat), min_size=2, max_size=2), min_size=2, max_size=2),
    st.lists(st.builds(G, rat, rat), min_size=2, max_size=2),
    st.lists(st.builds(G, rat, rat), min_size=2, max_size=2),
    st.integers(0, 30),
)
def test_adjoint_pairing(rows, xs, ys, N):
    T = matrix_operator(rows)
    x = vector_from_combo(FinDim(2), combo(enumerate(xs)))
    y = vector_from_combo(FinDim(2), combo(enumerate(ys)))
    a = inner_product(op_apply(op_adjoint_matrix(T), y), x).approx(N)
    b = inner_product(y, op_apply(T, x)).approx(N)
    assert (a - b).abs2() <= (4 * pow2(-N)) ** 2


def test_adjoint_needs_matrix():
    with pytest.raises(UnsupportedShape):
        op_adjoint_matrix(halving_diagonal())


# --- norms -----------------------------------------------------------------


def test_findim_norm_examples():
    assert findim_norm(matrix_operator([[3, 0], [0, 4]])).approx(20) == 4
    assert findim_norm(matrix_operator([[0, 0], [0, 0]])).approx(20) == 0
    q = findim_norm(matrix_operator([[1, 1], [0, 1]])).approx(20)
    # squared norm is the top root of x^2 - 3x + 1
    assert abs(q * q - (3 + creal_sqrt(creal_from_rational(5)).approx(40)) / 2) <= pow2(-17)
    assert abs(q * q - power_iteration_norm([[1, 1], [0, 1]])) <= pow2(-17)


def test_findim_norm_against_power_iteration_sample():
    import random

    rng = random.Random(7)
    for _ in range(8):
        n = rng.choice([2, 3])
        rows = [[Fraction(rng.randint(-20, 20), rng.randint(1, 4)) for _ in range(n)] for _ in range(n)]
        q = findim_norm(matrix_operator(rows)).approx(20)
        ref = power_iteration_norm(rows)
        assert abs(q - creal_sqrt(creal_from_rational(ref)).approx(30)) <= pow2(-10)


def test_findim_norm_large_exact_matrix():
    # beyond the characteristic-polynomial cap the exact bisection path is used
    rows = [[Fraction(int(i == j) * (j + 1)) for j in range(10)] for i in range(10)]
    assert abs(findim_norm(matrix_operator(rows)).approx(20) - 10) <= pow2(-20)


def test_finite_rank_examples():
    e0, e1 = basis_vector(L2(), 0), basis_vector(L2(), 1)
    x = vector_from_combo(L2(), combo([(0, 2)]))
    y = vector_from_combo(L2(), combo([(1, 3)]))
    assert finite_rank_norm([x], [y]).approx(20) == 6
    q = finite_rank_norm([e0, e1], [e0, e0]).approx(25)
    assert abs(q * q - 2) <= pow2(-22)
    assert finite_rank_norm([e0], [e0]).approx(20) == 1


def test_finite_rank_length_mismatch():
    with pytest.raises(ValueError):
        finite_rank_norm([basis_vector(L2(), 0)], [])


@given(l2_combos, l2_combos)
def test_rank_one_radicand_law(x, y):
    vx, vy = vector_from_combo(L2(), x), vector_from_combo(L2(), y)
    (entry,), = gram_product([vx], [vy])
    assert entry == G(x.norm2() * y.norm2())


def test_finite_rank_against_matrix_norm():
    # rank-two operator restricted to span(e_0..e_3) as an explicit matrix
    T = rank_two()
    cols = [T.images(j).approx(0) for j in range(4)]
    rows = [[cols[j].coeff(i) for j in range(4)] for i in range(4)]
    a = finite_rank_norm(T.shape.xs, T.shape.ys).approx(20)
    b = findim_norm(matrix_operator(rows)).approx(20)
    assert abs(a - b) <= pow2(-19)


def test_eff_compact_norm_examples():
    e = [basis_vector(L2(), j) for j in range(40)]

    def partial(k):
        return [vector_from_combo(L2(), combo([(j, pow2(-j))])) for j in range(k + 1)], e[: k + 1]

    assert abs(eff_compact_norm(partial, lambda N: N + 1).approx(10) - 1) <= pow2(-10)
    const = eff_compact_norm(lambda k: ([e[0]], [e[2]]), lambda N: 0)
    assert const.approx(10) == 1
    zero = eff_compact_norm(lambda k: ([vector_from_combo(L2(), combo())], [e[0]]), lambda N: 0)
    assert zero.approx(10) == 0


def test_continuity_modulus_examples():
    assert continuity_modulus(identity_operator(L2()), 5) == pow2(-5)
    assert continuity_modulus(diagonal_operator(L2(), [8]), 5) == pow2(-8)


@given(l2_combos, l2_combos, st.integers(0, 12))
def test_continuity_modulus_sampled(x, y, N):
    T = halving_diagonal()
    delta = continuity_modulus(T, N)
    # move y to within delta of x
    d = y - x
    if d.norm2() > delta * delta:
        scale = delta / (norm_upper(d, 32) + 1)
        y = x + d.scale(scale)
    tx = op_apply(T, vector_from_combo(L2(), x)).approx(N + 20)
    ty = op_apply(T, vector_from_combo(L2(), y)).approx(N + 20)
    assert dist2(tx, ty) <= (pow2(-N) + 2 * pow2(-N - 20)) ** 2


# --- seminorms and neighbourhoods ------------------------------------------


def test_seminorm_examples():
    D = diagonal_operator(L2(), [2, 1])
    e0, e1 = basis_vector(L2(), 0), basis_vector(L2(), 1)
    assert seminorm_eval(strong_seminorm(e0), D).approx(20) == 2
    assert seminorm_eval(weak_seminorm(e0, e1), identity_operator(L2())).approx(20) == 0
    assert abs(seminorm_eval(weak_seminorm(e0, e0), D).approx(20) - 2) <= pow2(-20)


def test_membership_examples():
    e0 = basis_vector(L2(), 0)
    center = diagonal_operator(L2(), [1, 1])
    B = BasicNbhd.strong(center, 1, [e0])
    assert nbhd_member_semidecide(B, center, 5) is Membership.INSIDE
    far = diagonal_operator(L2(), [3, 1])
    assert nbhd_member_semidecide(B, far, 20) is Membership.OUTSIDE
    edge = diagonal_operator(L2(), [2, 1])
    for budget in (5, 30):
        assert nbhd_member_semidecide(B, edge, budget) is Membership.UNRESOLVED


def test_weak_membership():
    e0, e1 = basis_vector(L2(), 0), basis_vector(L2(), 1)
    B = BasicNbhd.weak(zero_operator(L2()), Fraction(1, 2), [(e0, e1)])
    assert nbhd_member_semidecide(B, identity_operator(L2())) is Membership.INSIDE
    swap_like = finite_rank_operator([e1], [e0])  # e_0 -> e_1
    assert nbhd_member_semidecide(B, swap_like) is Membership.OUTSIDE


def test_radius_must_be_positive():
    with pytest.raises(ValueError):
        BasicNbhd.strong(zero_operator(L2()), 0, [])


# --- the halting-norm operator ---------------------------------------------


def test_halting_entry_stage_five():
    # K_5 = {0, 2} on this machine, and the sum starts at k = 1
    assert sorted(halting_stage(5).members) == [0, 2]
    assert halting_norm_operator().shape.entries(5) == Fraction(1, 4)


def test_halting_entries_monotone_and_exact():
    table = HaltingTable()
    T = halting_norm_operator(lambda n: halting_stage(n, table))
    prev = Fraction(0)
    for n in range(0, 201, 10):
        stage = halting_stage(n, table)
        expect = sum((Fraction(1, 2**k) for k in stage.members if k >= 1), Fraction(0))
        entry = T.shape.entries(n)
        assert entry == expect == halting_norm_entry(stage)
        assert prev <= entry <= 1
        prev = entry
        assert op_apply(T, basis_vector(L2(), n)).approx(15) == combo([(n, entry)])


# --- O^{ex} and the refuter -------------------------------------------------


def test_oex_never_halting_is_zero():
    O = oex_operator(DIVERGING, 3, 1000)
    assert O.exact_norm == 0
    assert op_apply(O, basis_vector(L2(), 7)).approx(5) == combo()


def test_oex_halting():
    O = oex_operator(successor_program(), 4, 1000)
    t = O.halting_time
    assert O.exact_norm == 5
    assert O.shape.entries(t - 1) == 0 and O.shape.entries(t) == 5


def test_h_index_is_injective():
    seen = {h_index(e, x) for e in range(30) for x in range(30)}
    assert len(seen) == 900


@pytest.mark.parametrize("g", [const_program(1000), successor_program()])
def test_refuter(g):
    rep = norm_bound_refuter(g)
    assert rep.violated
    assert rep.operator_index == h_index(rep.c, rep.c) == 2 * rep.c
    # independent checks with the interpreter
    budget = 1 << (2 * rep.c.bit_length() + 256)
    claim = run(g, {0: rep.operator_index}, budget)
    phi = run(rep.program, {0: rep.c}, budget)
    assert claim.value == rep.claimed_bound
    assert phi.value == rep.phi_c_c == rep.norm == claim.value + 1
    assert rep.to_json()["inequality"] == f"{rep.norm} > {rep.claimed_bound}"


def test_refuter_const_value():
    assert norm_bound_refuter(const_program(1000)).norm == 1001


# --- R, S and P, Q ---------------------------------------------------------


def test_rs_on_halting_operator():
    T = halting_norm_operator()
    R, S = norm_pathology_RS(T, 2)
    assert R.exact_norm == S.exact_norm == 2
    t, r, s = T.shape.entries, R.shape.entries, S.shape.entries
    assert r(0) == G(2) and s(0) == G(-2)
    for j in range(0, 201, 5):
        assert r(j) + s(j) == G(t(j))
        assert r(j).abs2() <= 4 and s(j).abs2() <= 4


def test_rs_on_zero():
    R, S = norm_pathology_RS(zero_operator(L2()), 3)
    assert R.exact_norm == 3
    assert all(R.shape.entries(j) + S.shape.entries(j) == 0 for j in range(1, 10))


def test_rs_preconditions():
    with pytest.raises(PreconditionError):
        norm_pathology_RS(halting_norm_operator(), 1)
    with pytest.raises(UnsupportedShape):
        norm_pathology_RS(rank_two(), 5)


@given(st.fractions(min_value=-4, max_value=4, max_denominator=64), st.integers(0, 60))
def test_exp_i_unit_modulus(theta, n):
    z = exp_i(theta, n)
    assert abs(z.abs2() - 1) <= 5 * pow2(-n)


def test_pq_constant_angle():
    pq = norm_pathology_PQ(lambda j: Fraction(3, 4))
    assert pq.stage_abs2(0) == pq.stage_abs2(9)
    assert pq.stage_norm(0).approx(20) == pq.stage_norm(9).approx(20)


def test_pq_halting_stages_monotone():
    pq = norm_pathology_PQ(halting_thetas())
    for n in range(0, 40):
        assert pq.stage_leq(n, n + 1)
    for j in range(5):
        e = pq.P.shape.entries(j).approx(30)
        assert abs(e.abs2() - 1) <= pow2(-27)


def test_pq_rejects_increasing_angles():
    with pytest.raises(PreconditionError):
        norm_pathology_PQ(lambda j: Fraction(1, j + 2) if j < 3 else Fraction(1))
    with pytest.raises(PreconditionError):
        norm_pathology_PQ(lambda j: Fraction(3))


# --- triangle functions ----------------------------------------------------


def test_triangle_examples():
    t = triangle_function(0, 2, Fraction(1, 2))
    assert t.at(1) == Fraction(1, 2)
    assert t.at(10) == 0 and t.at(0) == 0 and t.at(2) == 0
    assert t(creal_from_rational(1)).approx(10) == Fraction(1, 2)


def test_triangle_on_computable_input():
    t = triangle_function(1, 2, 4)
    y = t(creal_sqrt(creal_from_rational(2)))  # slope 8, value 4 - 8|sqrt2 - 3/2|
    exact = 4 - 8 * (Fraction(3, 2) - creal_sqrt(creal_from_rational(2)).approx(60))
    for n in (0, 10, 30):
        assert abs(y.approx(n) - exact) <= pow2(-n) + 8 * pow2(-60)


def test_triangle_preconditions():
    with pytest.raises(PreconditionError):
        triangle_function(2, 1, 1)
    with pytest.raises(PreconditionError):
        triangle_function(0, 1, 0)


# --- JSON -------------------------------------------------------------------


def test_json_round_trips():
    for T in (
        matrix_operator([[1, G(0, 1)], [Fraction(2, 3), 0]]),
        diagonal_operator(L2(), [1, Fraction(-1, 2), 0, 3]),
        rank_two(),
    ):
        U = op_from_json(op_to_json(T))
        for j in range(2):
            assert U.images(j).approx(10) == T.images(j).approx(10)


def test_json_refuses_rules():
    with pytest.raises(UnsupportedShape):
        op_to_json(halving_diagonal())
