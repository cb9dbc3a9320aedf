import random
from fractions import Fraction

import pytest

from quiverpoisson.contraction import (
    contract_bivector,
    contract_quiver,
    plan_multi,
    plan_single,
)
from quiverpoisson.necklace import is_poisson
from quiverpoisson.parsing import parse_necklace
from quiverpoisson.quiver import (
    QuiverError,
    build_quiver,
    kronecker_quiver,
    loop_quiver,
)
from quiverpoisson.representation import induced_field

KRON = kronecker_quiver("xy")
Q3 = kronecker_quiver("xyz")

GL3_SRC = "[x y', x x'] + [x z', y x'] + [y z', x x'] + [y z', y y']"


def nk(src, q):
    return parse_necklace(src, q)


# -- quiver surgery ----------------------------------------------------------

def test_contract_kronecker_gives_one_loop():
    res = contract_quiver(KRON, plan_single("x"))
    assert res.quiver.num_vertices == 1
    assert [(a.name, a.tail, a.head) for a in res.quiver.arrows] == [("y", 1, 1)]


def test_contract_q3_gives_two_loops():
    res = contract_quiver(Q3, plan_single("x"))
    assert res.quiver.num_vertices == 1
    assert [a.name for a in res.quiver.arrows] == ["y", "z"]
    assert all(a.tail == a.head == 1 for a in res.quiver.arrows)


def test_contract_rejects_loops():
    q = loop_quiver("x")
    with pytest.raises(QuiverError):
        contract_quiver(q, plan_single("x"))


def test_multi_contract_produces_two_loops_and_opposite_arrows():
    q = build_quiver("vertices:3/arrow p 1->3/arrow q 1->3/"
                     "arrow u 2->3/arrow w 2->3")
    res = contract_quiver(q, plan_multi(["p", "u"]))
    got = [(a.name, a.tail, a.head) for a in res.quiver.arrows]
    assert got == [("q_1", 1, 1), ("q_2", 1, 2), ("w_1", 2, 1), ("w_2", 2, 2)]


def test_multi_contract_splits_loops_into_s_squared():
    q = build_quiver("vertices:3/arrow p 1->3/arrow u 2->3/arrow c 3->3")
    res = contract_quiver(q, plan_multi(["p", "u"]))
    names = [a.name for a in res.quiver.arrows]
    assert names == ["c_1_1", "c_1_2", "c_2_1", "c_2_2"]
    ends = {a.name: (a.tail, a.head) for a in res.quiver.arrows}
    # c_{m,mp} runs from v_mp to v_m
    assert ends["c_1_2"] == (2, 1)
    assert ends["c_2_1"] == (1, 2)


def test_multi_contract_validates_plan():
    q = build_quiver("vertices:3/arrow p 1->3/arrow q 1->3")
    with pytest.raises(QuiverError, match="distinct tails"):
        contract_quiver(q, plan_multi(["p", "q"]))
    q2 = build_quiver("vertices:2/arrow p 1->2/arrow u 2->1")
    with pytest.raises(QuiverError, match="share"):
        contract_quiver(q2, plan_multi(["p", "u"]))


# -- pushing bivectors through ----------------------------------------------

def test_kronecker_contract_x_head_side():
    pi = nk("[x y', x x']", KRON)
    out, res = contract_bivector(pi, plan_single("x", side="head"))
    # the substitution applied to the full commutator doubles the classical
    # one-word presentation y y' y'
    assert out == nk("2 y y' y'", res.quiver)
    assert is_poisson(out)[0]


def test_kronecker_contract_x_tail_side():
    pi = nk("[x y', x x']", KRON)
    out, res = contract_bivector(pi, plan_single("x", side="tail"))
    assert out == nk("-2 y y' y'", res.quiver)
    assert is_poisson(out)[0]


def test_kronecker_contract_y_gives_cubic():
    pi = nk("[x y', x x']", KRON)
    out, res = contract_bivector(pi, plan_single("y", side="head"))
    assert out == nk("[x x', x x x']", res.quiver)
    assert is_poisson(out)[0]


GL3_CONTRACTED = {
    # printed contractions of the three-arrow structure, verbatim
    "x": "- [y', y y' + z z'] - [z', y y y' + y z z'] - [y z', z z']",
    "y": "- [x x x' + x z z', x x'] + [z', x' x - z z']",
    "z": "[x y', x x'] - [x x x' + x y y', y x'] "
         "- [y x x' + y y y', x x' + y y']",
}


@pytest.mark.parametrize("arrow", ["x", "y", "z"])
def test_gl3_contractions_match_printed_forms(arrow):
    pi = nk(GL3_SRC, Q3)
    out, res = contract_bivector(pi, plan_single(arrow, side="head"))
    assert out == nk(GL3_CONTRACTED[arrow], res.quiver)
    assert is_poisson(out)[0]


def test_poisson_preserved_on_regressions():
    cases = [
        (nk("[x y', x x']", KRON), plan_single("x")),
        (nk("[x y', x x']", KRON), plan_single("y")),
        (nk("[x y', x x']", KRON), plan_single("x", side="tail")),
        (nk(GL3_SRC, Q3), plan_single("x")),
        (nk(GL3_SRC, Q3), plan_single("y", side="tail")),
    ]
    for pi, plan in cases:
        assert is_poisson(pi)[0]
        out, _ = contract_bivector(pi, plan)
        assert is_poisson(out)[0]


def test_multi_contraction_preserves_poisson_with_eps():
    # two parallel pairs into the two-loop butterfly; Poisson survives for
    # arbitrary nonzero eps
    q = build_quiver("vertices:3/arrow p 1->3/arrow q 1->3/"
                     "arrow u 2->3/arrow w 2->3")
    pi = nk("[p q', p p'] + [u w', u u']", q)
    assert is_poisson(pi)[0]
    for eps in [None, (1, 1), (2, Fraction(1, 3))]:
        plan = plan_multi(["p", "u"], eps=eps)
        out, res = contract_bivector(pi, plan)
        assert not out.is_zero()
        assert is_poisson(out)[0]


def test_multi_with_s1_matches_single_up_to_renaming():
    pi = nk("[x y', x x']", KRON)
    single, res_s = contract_bivector(pi, plan_single("x", side="head"))
    multi, res_m = contract_bivector(pi, plan_multi(["x"]))
    # multi renames y -> y_1; map the words across
    assert [a.name for a in res_m.quiver.arrows] == ["y_1"]
    renamed = nk(str(single).replace("y", "y_1"), res_m.quiver)
    assert multi == renamed


# -- geometric consistency ---------------------------------------------------

def test_contracted_bracket_equals_moment_restriction():
    """The contracted structure must equal the restriction of the original
    one to the gauge slice: at points with the x-matrix gauged to identity,
    pairing the original field with covectors that annihilate the gauge
    orbit reproduces the contracted field's pairing."""
    n = 2
    pi = nk("[x y', x x']", KRON)
    out, res = contract_bivector(pi, plan_single("x", side="head"))
    big = induced_field(pi, (n, n))
    small = induced_field(out, (n,))
    cb = big.coords
    cs = small.coords
    rng = random.Random(77)

    def frac():
        return Fraction(rng.randint(-4, 4))

    for _ in range(10):
        Y = [[frac() for _ in range(n)] for _ in range(n)]
        point_big = [Fraction(0)] * cb.n_vars
        for r in range(n):
            for c in range(n):
                point_big[cb.var(0, r, c)] = Fraction(1 if r == c else 0)
                point_big[cb.var(1, r, c)] = Y[r][c]
        point_small = [Fraction(0)] * cs.n_vars
        for r in range(n):
            for c in range(n):
                point_small[cs.var(0, r, c)] = Y[r][c]

        covs_small = []
        covs_big = []
        for _ in range(2):
            B = [[frac() for _ in range(n)] for _ in range(n)]
            # the x-slot covector solving the annihilation condition
            # X_x A + X_y B = 0 at X_x = 1: A = -Y B
            A = [[-sum(Y[i][t] * B[t][j] for t in range(n))
                  for j in range(n)] for i in range(n)]
            cov_s = [Fraction(0)] * cs.n_vars
            cov_b = [Fraction(0)] * cb.n_vars
            for r in range(n):
                for c in range(n):
                    # <d/d(a)_{rc}, Y> = (Y_a)_{cr}
                    cov_s[cs.var(0, r, c)] = B[c][r]
                    cov_b[cb.var(1, r, c)] = B[c][r]
                    cov_b[cb.var(0, r, c)] = A[c][r]
            covs_small.append(cov_s)
            covs_big.append(cov_b)

        lhs = small.eval_apply(point_small, covs_small)
        rhs = big.eval_apply(point_big, covs_big)
        assert lhs == rhs
