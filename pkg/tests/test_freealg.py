import random
from fractions import Fraction

import pytest

from quiverpoisson.freealg import FreeElement, MatrixPoint, evaluate
from quiverpoisson.parsing import parse_element
from quiverpoisson.quiver import (
    QuiverError,
    kronecker_quiver,
    loop_quiver,
    word_grade,
)

KRON = kronecker_quiver("xy")
LOOPS = loop_quiver("xy")


def test_idempotent_action():
    dq = KRON.double()
    x = FreeElement.word(dq, (0,))
    e1 = FreeElement.idempotent(dq, 1)
    e2 = FreeElement.idempotent(dq, 2)
    assert (e1 * x).is_zero()  # x ends at vertex 2
    assert e2 * x == x
    assert x * e1 == x
    assert (x * e2).is_zero()
    assert e1 * e1 == e1
    assert (e1 * e2).is_zero()


def test_concat_product():
    dq = KRON.double()
    x = FreeElement.word(dq, (0,))
    yd = FreeElement.word(dq, (3,))
    assert x * yd == FreeElement.word(dq, (0, 3))
    # non-composable concatenations vanish
    assert (x * x).is_zero()


def test_bilinear_concatenation_on_loops():
    q = LOOPS
    f = parse_element("x y' - y x'", q)
    g = parse_element("x", q)
    assert f * g == parse_element("x y' x - y x' x", q)


def test_grade_counts_duals():
    dq = LOOPS.double()
    w = parse_element("x y' x x'", LOOPS)
    (word,) = [next(iter(w.terms))]
    assert word_grade(dq, word) == 2
    assert word_grade(dq, (0, 0, 2, 0, 2)) == 2  # x x x' x x'
    assert word_grade(dq, (-1,)) == 0


def test_grade_additive_under_multiplication():
    dq = LOOPS.double()
    rng = random.Random(7)
    letters = list(range(dq.num_letters))
    for _ in range(50):
        u = tuple(rng.choice(letters) for _ in range(rng.randint(1, 3)))
        w = tuple(rng.choice(letters) for _ in range(rng.randint(1, 3)))
        prod = FreeElement.word(dq, u) * FreeElement.word(dq, w)
        if prod.is_zero():
            continue
        (key,) = prod.terms
        assert word_grade(dq, key) == word_grade(dq, u) + word_grade(dq, w)


def test_evaluate_single_arrow():
    point = MatrixPoint(KRON, (1, 1), {"x": [[3]], "y": [[0]]})
    el = FreeElement.word(KRON.double(), (0,))
    mat = evaluate(el, point)
    assert mat == [[0, 0], [3, 0]]  # block (head=2, tail=1)


def test_evaluate_idempotent_is_block_identity():
    point = MatrixPoint(KRON, (2, 1), {"x": [[1, 2]], "y": [[0, 0]]})
    dq = KRON.double()
    e1 = evaluate(FreeElement.idempotent(dq, 1), point)
    e2 = evaluate(FreeElement.idempotent(dq, 2), point)
    assert e1 == [[1, 0, 0], [0, 1, 0], [0, 0, 0]]
    assert e2 == [[0, 0, 0], [0, 0, 0], [0, 0, 1]]
    total = [[e1[i][j] + e2[i][j] for j in range(3)] for i in range(3)]
    assert total == [[1 if i == j else 0 for j in range(3)] for i in range(3)]


def test_evaluate_dual_slot_consumes_covector():
    # P = x y' at alpha=(1,1) with X_x = 2 and covector Y_y = 5: block (2,2) is 10
    point = MatrixPoint(KRON, (1, 1), {"x": [[2]], "y": [[7]]})
    el = parse_element("x y'", KRON)
    mat = evaluate(el, point, covectors=[[[5]]])
    assert mat == [[0, 0], [0, 10]]


def test_evaluate_requires_covectors_for_duals():
    point = MatrixPoint(KRON, (1, 1), {"x": [[2]], "y": [[7]]})
    el = parse_element("x y'", KRON)
    with pytest.raises(QuiverError):
        evaluate(el, point)
    with pytest.raises(QuiverError):
        evaluate(el, point, covectors=[[[5]], [[6]]])


def _random_matrix(rng, rows, cols):
    return [[Fraction(rng.randint(-4, 4)) for _ in range(cols)]
            for _ in range(rows)]


def _random_dual_free(dq, rng, n_terms=3):
    el = FreeElement.zero(dq)
    letters = list(range(dq.m))
    for _ in range(n_terms):
        word = tuple(rng.choice(letters) for _ in range(rng.randint(1, 3)))
        try:
            term = FreeElement.word(dq, word, rng.randint(-3, 3))
        except Exception:
            continue
        el = el + term
    return el


@pytest.mark.parametrize("alpha", [(1, 1), (2, 1), (2, 2)])
def test_evaluate_is_algebra_map_on_dual_free_elements(alpha):
    rng = random.Random(hash(alpha) & 0xFFFF)
    q = KRON
    dq = q.double()
    for _ in range(10):
        point = MatrixPoint(q, alpha, {
            "x": _random_matrix(rng, alpha[1], alpha[0]),
            "y": _random_matrix(rng, alpha[1], alpha[0]),
        })
        f = _random_dual_free(dq, rng)
        g = _random_dual_free(dq, rng)
        lhs = evaluate(f * g, point)
        mf, mg = evaluate(f, point), evaluate(g, point)
        n = len(mf)
        rhs = [[sum(mf[i][t] * mg[t][j] for t in range(n)) for j in range(n)]
               for i in range(n)]
        assert lhs == rhs
