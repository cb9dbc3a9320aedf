import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quiverpoisson.freealg import FreeElement
from quiverpoisson.necklace import (
    CyclicElement,
    GradeError,
    NecklaceElement,
    commutator_pairs,
    compatible_pair_check,
    cyclic_derivative,
    double_bracket,
    h0_bracket,
    homogeneous_parts,
    induced_derivation,
    is_poisson,
    normalize,
    schouten,
    signed_rotations,
    superderivative,
)
from quiverpoisson.parsing import parse_element, parse_necklace
from quiverpoisson.quiver import (
    build_quiver,
    kronecker_quiver,
    loop_quiver,
    word_grade,
)

KRON = kronecker_quiver("xy")
LOOPS2 = loop_quiver("xy")
LOOPS3 = loop_quiver("xyz")
LOOPS4 = loop_quiver("xayb")
Q3 = kronecker_quiver("xyz")


def nk(src, quiver):
    return parse_necklace(src, quiver)


# -- canonical forms ------------------------------------------------------

def test_open_paths_die():
    assert nk("x", KRON).is_zero()
    assert nk("x y' x", KRON).is_zero()


def test_trivial_paths_survive():
    el = nk("3/2 e1", KRON)
    assert list(el.terms.values()) == [Fraction(3, 2)]


def brute_force_classes(dq, word):
    """Oracle: identify the signed rotation orbit by stepwise single moves."""
    total = word_grade(dq, word)
    seen = {}
    cur, sign = word, 1
    for _ in range(len(word)):
        seen.setdefault(cur, set()).add(sign)
        g = 1 if dq.is_dual(cur[0]) else 0
        if g and (total - g) % 2:
            sign = -sign
        cur = cur[1:] + cur[:1]
    return seen


@pytest.mark.parametrize("src,target,expected_sign", [
    ("y' y y'", "y y' y'", -1),
    ("y' y' y", "y y' y'", +1),
    ("x y' x x'", "x x' x y'", -1),
    ("x' x x'", "x x' x'", -1),
])
def test_rotation_signs_frozen(src, target, expected_sign):
    got = nk(src, LOOPS2)
    want = nk(target, LOOPS2).scale(expected_sign)
    assert got == want
    # cross-check against the stepwise oracle
    dq = LOOPS2.double()
    word = next(iter(parse_element(src, LOOPS2).terms))
    tgt = next(iter(parse_element(target, LOOPS2).terms))
    classes = brute_force_classes(dq, word)
    assert classes[tgt] == {expected_sign}


def test_halfturn_symmetric_word_is_zero():
    # x x' x x' rotated by half returns itself with sign -1
    assert nk("x x' x x'", LOOPS2).is_zero()
    dq = LOOPS2.double()
    classes = brute_force_classes(dq, (0, 2, 0, 2))
    assert classes[(0, 2, 0, 2)] == {1, -1}


def test_grade2_commutator_doubles():
    el = nk("[x y', x x']", LOOPS2)
    assert el == nk("x y' x x'", LOOPS2).scale(2)


@given(st.lists(st.integers(0, 3), min_size=1, max_size=7))
@settings(max_examples=150, deadline=None)
def test_normalize_is_representative_independent(letters):
    dq = LOOPS2.double()
    word = tuple(letters)
    el = normalize(FreeElement(dq, {word: Fraction(1)}))
    for rot, sign in signed_rotations(dq, word):
        el2 = normalize(FreeElement(dq, {rot: Fraction(sign)}))
        assert el2 == el


@given(st.lists(st.integers(0, 3), min_size=1, max_size=6),
       st.lists(st.integers(0, 3), min_size=1, max_size=6))
@settings(max_examples=100, deadline=None)
def test_normalize_annihilates_commutator_defect(w1, w2):
    # u v - (-1)^{grade u * grade v} v u lies in the defining relations
    dq = LOOPS2.double()
    u = FreeElement(dq, {tuple(w1): Fraction(1)})
    v = FreeElement(dq, {tuple(w2): Fraction(1)})
    from quiverpoisson.quiver import word_grade
    sign = (-1) ** (word_grade(dq, tuple(w1)) * word_grade(dq, tuple(w2)))
    assert normalize(u * v - (v * u).scale(sign)).is_zero()


# -- superderivatives ------------------------------------------------------

def test_superderivative_uniform_monomial():
    # On the four-loop quiver, rho = x a' y b'.
    q = LOOPS4
    dq = q.double()
    rho = nk("x a' y b'", q)
    x, a, y, b = (q.arrow_index(n) for n in "xayb")
    m = dq.m
    assert superderivative(dq, x, rho) == parse_element("a' y b'", q)
    assert superderivative(dq, y, rho) == parse_element("- b' x a'", q)
    assert superderivative(dq, a + m, rho) == parse_element("- y b' x", q)
    assert superderivative(dq, b + m, rho) == parse_element("x a' y", q)
    # letters that do not occur differentiate to zero
    assert superderivative(dq, q.arrow_index("a"), rho).is_zero()


def test_superderivative_single_letter_leaves_idempotent():
    q = LOOPS2
    dq = q.double()
    gamma = nk("x x'", q)
    dxd = superderivative(dq, dq.letter("x'"), gamma)
    assert dxd == parse_element("x", q)
    dx = superderivative(dq, dq.letter("x"), gamma)
    assert dx == parse_element("x'", q)
    lone = nk("x", LOOPS2)
    assert superderivative(dq, 0, lone) == parse_element("e1", q)


def test_superderivative_of_deformation_field():
    gamma = nk("y x y y'", LOOPS2)
    dq = LOOPS2.double()
    assert superderivative(dq, dq.letter("y'"), gamma) == \
        parse_element("y x y", LOOPS2)
    assert superderivative(dq, dq.letter("x"), gamma) == \
        parse_element("y y' y", LOOPS2)
    assert superderivative(dq, dq.letter("y"), gamma) == \
        parse_element("x y y' + y' y x", LOOPS2)


# -- the Schouten bracket --------------------------------------------------

LIN_PART = "[x x', x'] + [y x', y']"
CUBIC_PART = "[y y', y x x' + y y y']"


def test_deformation_lemma_exactly():
    gamma = nk("y x y y'", LOOPS2)
    pi0 = nk(LIN_PART, LOOPS2)
    pi_inf = nk(CUBIC_PART, LOOPS2)
    assert schouten(gamma, pi0) == pi_inf
    assert schouten(gamma, pi_inf).is_zero()


def test_constant_structures_are_poisson():
    # any grade-2 element with words of length 2 brackets to zero with itself
    q = build_quiver("vertices:2/arrow a 1->1/arrow b 2->2/"
                     "arrow x 1->2/arrow y 2->1")
    pi = nk("x' y' + 2 a' a'", q)
    ok, residual = is_poisson(pi)
    assert ok and residual.is_zero()


def test_gl2_structure_is_poisson():
    ok, _ = is_poisson(nk("x y' x x' - x x' x y'", LOOPS2))
    assert ok


def test_gl3_structure_is_poisson_on_both_quivers():
    src = "[x y', x x'] + [x z', y x'] + [y z', x x'] + [y z', y y']"
    for q in (Q3, LOOPS3):
        ok, _ = is_poisson(nk(src, q))
        assert ok


def test_random_dense_grade2_is_generically_not_poisson():
    rng = random.Random(11)
    dq = LOOPS2.double()
    words = [w for w in itertools.product(range(4), repeat=4)
             if word_grade(dq, w) == 2]
    terms = {w: Fraction(rng.randint(1, 5)) for w in rng.sample(words, 6)}
    pi = normalize(FreeElement(dq, terms))
    ok, residual = is_poisson(pi)
    assert not ok and not residual.is_zero()


def test_is_poisson_rejects_wrong_grade():
    with pytest.raises(GradeError, match="grade"):
        is_poisson(nk("x x' + x x' x'", LOOPS2))


def random_homogeneous(q, rng, grade, length, n_terms=2):
    dq = q.double()
    el = FreeElement.zero(dq)
    tries = 0
    while len(normalize(el).terms) < n_terms and tries < 200:
        tries += 1
        duals = rng.sample(range(length), grade)
        word = tuple(
            rng.randrange(dq.m) + (dq.m if i in duals else 0)
            for i in range(length))
        try:
            term = FreeElement.word(dq, word, rng.randint(1, 4))
        except Exception:
            continue
        el = el + term
    return normalize(el)


@pytest.mark.parametrize("quiver", [LOOPS2, Q3])
def test_graded_antisymmetry_randomized(quiver):
    rng = random.Random(5)
    for _ in range(25):
        r = rng.randint(1, 3)
        s = rng.randint(1, 3)
        a = random_homogeneous(quiver, rng, r, rng.randint(max(r, 1), 6))
        b = random_homogeneous(quiver, rng, s, rng.randint(max(s, 1), 6))
        sign = (-1) ** ((r - 1) * (s - 1))
        assert schouten(a, b) == schouten(b, a).scale(-sign)


@pytest.mark.parametrize("quiver", [LOOPS2, Q3])
def test_graded_jacobi_randomized(quiver):
    rng = random.Random(6)
    for _ in range(10):
        r, s, t = (rng.randint(1, 3) for _ in range(3))
        a = random_homogeneous(quiver, rng, r, rng.randint(max(r, 1), 5))
        b = random_homogeneous(quiver, rng, s, rng.randint(max(s, 1), 5))
        c = random_homogeneous(quiver, rng, t, rng.randint(max(t, 1), 5))
        lhs = (schouten(a, schouten(b, c)).scale((-1) ** ((r - 1) * (t - 1)))
               + schouten(b, schouten(c, a)).scale((-1) ** ((s - 1) * (r - 1)))
               + schouten(c, schouten(a, b)).scale((-1) ** ((t - 1) * (s - 1))))
        assert lhs.is_zero()


def test_bracket_is_representative_independent():
    dq = LOOPS2.double()
    rng = random.Random(9)
    gamma = nk("y x y y'", LOOPS2)
    pi0 = nk(LIN_PART, LOOPS2)
    expected = schouten(gamma, pi0)
    for _ in range(10):
        # replace each monomial by a random signed rotation before bracketing
        terms = {}
        for w, c in gamma.terms.items():
            rots = list(signed_rotations(dq, w))
            rot, sign = rng.choice(rots)
            terms[rot] = terms.get(rot, 0) + c * sign
        gamma2 = NecklaceElement(dq, terms)
        assert schouten(gamma2, pi0) == expected


# -- grade-1 elements are derivations -------------------------------------

def apply_derivation(dq, images, elem):
    """Extend a map on generators (arrow index -> FreeElement) to a
    B-derivation of the undoubled path algebra via Leibniz."""
    out = FreeElement.zero(dq)
    for word, coeff in elem.terms.items():
        if word[0] < 0:
            continue
        for i, letter in enumerate(word):
            img = images.get(letter)
            if img is None or img.is_zero():
                continue
            left = (FreeElement.word(dq, word[:i]) if word[:i]
                    else FreeElement.idempotent(dq, dq.head(letter)))
            right = (FreeElement.word(dq, word[i + 1:]) if word[i + 1:]
                     else FreeElement.idempotent(dq, dq.tail(letter)))
            out = out + (left * img * right).scale(coeff)
    return out


def derivation_of_grade1(gamma):
    """Unique P_a from the representation sum of P_a a' (a ranging over Q)."""
    dq = gamma.dq
    images = {}
    for word, coeff in gamma.terms.items():
        (pos,) = [i for i, x in enumerate(word) if dq.is_dual(x)]
        rotated = word[pos + 1:] + word[:pos]
        a = dq.base_index(word[pos])
        P = (FreeElement.word(dq, rotated, coeff) if rotated
             else FreeElement.idempotent(dq, dq.head(word[pos]), coeff))
        # rotating a grade-1 word never changes sign
        images[a] = images.get(a, FreeElement.zero(dq)) + P
    return images


def test_grade1_bracket_matches_derivation_commutator():
    rng = random.Random(21)
    q = LOOPS2
    dq = q.double()
    for _ in range(15):
        g1 = random_homogeneous(q, rng, 1, rng.randint(1, 4))
        g2 = random_homogeneous(q, rng, 1, rng.randint(1, 4))
        br = schouten(g1, g2)
        assert br.grades() <= {1}
        d1 = derivation_of_grade1(g1)
        d2 = derivation_of_grade1(g2)
        dbr = derivation_of_grade1(br)
        for a in range(dq.m):
            gen = FreeElement.word(dq, (a,))
            lhs = (apply_derivation(dq, d1, apply_derivation(dq, d2, gen))
                   - apply_derivation(dq, d2, apply_derivation(dq, d1, gen)))
            rhs = dbr.get(a, FreeElement.zero(dq))
            assert lhs == rhs


# -- homogeneous parts and compatibility ----------------------------------

def test_parts_of_affine_structure():
    q = build_quiver("vertices:2/arrow a 1->1/arrow b 2->2/"
                     "arrow x 1->2/arrow y 2->1")
    pi = nk("a a' a' + b b' b' + x' y'", q)
    parts = homogeneous_parts(pi)
    assert [p for p, _ in parts] == [0, 1]
    const = dict(parts)[0]
    lin = dict(parts)[1]
    assert const == nk("x' y'", q)
    assert lin == nk("a a' a' + b b' b'", q)
    for _, part in parts:
        assert is_poisson(part)[0]
    assert compatible_pair_check(const, lin)[0]


def test_single_homogeneous_part():
    pi = nk("x y' x x' - x x' x y'", LOOPS2)
    parts = homogeneous_parts(pi)
    assert len(parts) == 1 and parts[0][0] == 2
    assert compatible_pair_check(pi, pi)[0]


# -- H0 bracket and double bracket -----------------------------------------

def canonical_symplectic_setup():
    # the doubled one-loop quiver: u plus its partner v, with the constant
    # symplectic pairing of the cotangent construction
    q = loop_quiver("uv")
    pi = parse_necklace("[u', v']", q)
    return q, pi


def cyc(src, q):
    return CyclicElement.project(parse_element(src, q))


def test_h0_bracket_matches_direct_expansion_oracle():
    q, pi = canonical_symplectic_setup()
    dq = q.double()
    u, v = 0, 1
    rng = random.Random(13)
    words = ["u v", "u u v v", "u", "v", "u v u v", "u u", "v v u"]
    for _ in range(20):
        f = cyc(rng.choice(words), q)
        g = cyc(rng.choice(words), q)
        got = h0_bracket(f, g, pi)
        # oracle: the direct expansion D_u(f) D_v(g) - D_v(f) D_u(g)
        expected = CyclicElement.project(
            cyclic_derivative(dq, u, f) * cyclic_derivative(dq, v, g)
            - cyclic_derivative(dq, v, f) * cyclic_derivative(dq, u, g))
        assert got == expected


def test_h0_bracket_vanishes_without_occurrences():
    q, pi = canonical_symplectic_setup()
    f = cyc("e1", q)
    g = cyc("u v", q)
    assert h0_bracket(f, g, pi).is_zero()


def test_h0_bracket_antisymmetric():
    rng = random.Random(17)
    pi = nk("x y' x x' - x x' x y'", LOOPS2)
    words = ["x y", "x x y", "x", "y y", "x y x y"]
    for _ in range(15):
        f = cyc(rng.choice(words), LOOPS2)
        g = cyc(rng.choice(words), LOOPS2)
        assert h0_bracket(f, g, pi) == -h0_bracket(g, f, pi)


def test_induced_derivation_implements_bracket():
    q, pi = canonical_symplectic_setup()
    dq = q.double()
    f = cyc("u v", q)
    d_f = induced_derivation(f, pi)
    for g_src in ("u", "v", "u v", "u u v"):
        g_free = parse_element(g_src, q)
        expected = h0_bracket(f, CyclicElement.project(g_free), pi)
        assert CyclicElement.project(
            apply_derivation(dq, d_f, g_free)) == expected


def test_double_bracket_skew():
    pi = nk("x y' x x' - x x' x y'", LOOPS2)
    x, y = 0, 1
    for a, b in [(x, y), (y, x), (x, x), (y, y)]:
        assert double_bracket(pi, a, b) == -double_bracket(pi, b, a).flip()
    assert double_bracket(pi, y, y).is_zero()


def test_double_bracket_of_constant_symplectic_is_idempotent_tensor():
    q, pi = canonical_symplectic_setup()
    u, v = 0, 1
    tb = double_bracket(pi, u, v)
    assert tb.terms == {((-1,), (-1,)): Fraction(1)}
    assert double_bracket(pi, v, u).terms == {((-1,), (-1,)): Fraction(-1)}


def test_commutator_pairs_reassemble():
    rng = random.Random(23)
    for q in (LOOPS2, Q3):
        dq = q.double()
        for _ in range(10):
            pi = random_homogeneous(q, rng, 2, rng.randint(2, 5))
            rebuilt = FreeElement.zero(dq)
            for coeff, P, a, R, b in commutator_pairs(pi):
                word = FreeElement(dq, {P: Fraction(1)})
                word = word * FreeElement.word(dq, (a + dq.m,))
                word = word * FreeElement(dq, {R: Fraction(1)})
                word = word * FreeElement.word(dq, (b + dq.m,))
                rebuilt = rebuilt + word.scale(coeff)
            assert normalize(rebuilt) == pi
