"""The graded necklace Lie algebra of a quiver.

Closed words in the doubled quiver, taken modulo cyclic rotation with the
super sign rule: splitting a word as PQ with P of grade p and Q of grade q
(grade = number of dual arrows), PQ and (-1)^{pq} QP are identified.  Open
words are zero.  Grade-r elements behave like r-vector fields; the Schouten
bracket below makes the whole thing a graded Lie superalgebra.

Canonical form: every closed word is rewritten to the lexicographically
minimal rotation (letters ordered base arrows first, then duals, each in
declaration order), accumulating the rotation sign into the coefficient.  A
word some rotation of which returns itself with sign -1 is identically zero.
"""

from __future__ import annotations

from fractions import Fraction

from .freealg import FreeElement
from .quiver import (
    DoubledQuiver,
    QuiverError,
    is_closed,
    is_trivial,
    trivial_word,
    word_grade,
    word_length,
    word_name,
    word_sort_key,
)


class GradeError(QuiverError):
    """An operation received an element of the wrong grade."""


def signed_rotations(dq: DoubledQuiver, word):
    """All cyclic rotations of a closed word with their signs relative to it.

    Rotating left by one moves the leading letter (grade g) past the rest
    (grade G-g), contributing (-1)^{g(G-g)}.
    """
    if is_trivial(word):
        yield word, 1
        return
    total = word_grade(dq, word)
    cur = word
    sign = 1
    for _ in range(len(word)):
        yield cur, sign
        g = 1 if dq.is_dual(cur[0]) else 0
        sign *= -1 if (g and (total - g) % 2) else 1
        cur = cur[1:] + cur[:1]


def canonical_rotation(dq: DoubledQuiver, word):
    """(canonical word, sign) with word == sign * canonical in the quotient.

    Returns (None, 0) when the cyclic class is forced to zero, i.e. the
    minimal rotation is reached with both signs.
    """
    best = None
    best_signs = set()
    for rot, sign in signed_rotations(dq, word):
        if best is None or rot < best:
            best = rot
            best_signs = {sign}
        elif rot == best:
            best_signs.add(sign)
    if len(best_signs) == 2:
        return None, 0
    return best, best_signs.pop()


class NecklaceElement:
    """A linear combination of canonical closed words."""

    __slots__ = ("dq", "terms")

    def __init__(self, dq, terms=None):
        self.dq = dq
        self.terms: dict[tuple[int, ...], Fraction] = dict(terms or {})

    @classmethod
    def zero(cls, dq):
        return cls(dq)

    def _check_same(self, other):
        if self.dq != other.dq:
            raise QuiverError("elements live over different quivers")

    def __add__(self, other):
        self._check_same(other)
        out = dict(self.terms)
        for w, c in other.terms.items():
            s = out.get(w, 0) + c
            if s:
                out[w] = s
            else:
                out.pop(w, None)
        return NecklaceElement(self.dq, out)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return NecklaceElement(self.dq, {w: -c for w, c in self.terms.items()})

    def scale(self, k):
        k = Fraction(k)
        if not k:
            return NecklaceElement.zero(self.dq)
        return NecklaceElement(self.dq,
                               {w: c * k for w, c in self.terms.items()})

    def __rmul__(self, k):
        return self.scale(k)

    def __eq__(self, other):
        return (isinstance(other, NecklaceElement) and self.dq == other.dq
                and self.terms == other.terms)

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self):
        return not self.terms

    def free(self) -> FreeElement:
        return FreeElement(self.dq, dict(self.terms))

    def grades(self):
        return {word_grade(self.dq, w) for w in self.terms}

    def grade_part(self, r):
        return NecklaceElement(self.dq, {
            w: c for w, c in self.terms.items()
            if word_grade(self.dq, w) == r})

    def sorted_terms(self):
        return sorted(self.terms.items(),
                      key=lambda wc: word_sort_key(self.dq, wc[0]))

    def __str__(self):
        return str(self.free())

    __repr__ = __str__

    def to_json(self):
        return self.free().to_json()


def normalize(elem: FreeElement) -> NecklaceElement:
    """Project a free element to the necklace quotient in canonical form."""
    dq = elem.dq
    out: dict[tuple[int, ...], Fraction] = {}
    for word, coeff in elem.terms.items():
        if not is_closed(dq, word):
            continue
        canon, sign = canonical_rotation(dq, word)
        if canon is None:
            continue
        s = out.get(canon, 0) + sign * coeff
        if s:
            out[canon] = s
        else:
            out.pop(canon, None)
    return NecklaceElement(dq, out)


def superderivative(dq: DoubledQuiver, letter: int, gamma: NecklaceElement) -> FreeElement:
    """Directional superderivative along one letter of the doubled quiver.

    For a closed word x1..xn, every position i with x_i equal to the letter
    contributes (-1)^{lam*mu} x_{i+1}..x_n x_1..x_{i-1}, where lam counts the
    duals among x_{i+1}..x_n and mu those among x_1..x_i.  Deleting the only
    letter of a loop leaves the trivial path at that loop's vertex.
    """
    acc: dict[tuple[int, ...], Fraction] = {}
    for word, coeff in gamma.terms.items():
        if is_trivial(word):
            continue
        n = len(word)
        dual_flags = [1 if dq.is_dual(x) else 0 for x in word]
        total = sum(dual_flags)
        mu = 0
        for i in range(n):
            mu += dual_flags[i]
            if word[i] != letter:
                continue
            lam = total - mu
            sign = -1 if (lam % 2 and mu % 2) else 1
            rest = word[i + 1:] + word[:i]
            if not rest:
                rest = trivial_word(dq.head(letter))
            s = acc.get(rest, 0) + sign * coeff
            if s:
                acc[rest] = s
            else:
                acc.pop(rest, None)
    return FreeElement(dq, acc)


def schouten(gamma: NecklaceElement, delta: NecklaceElement) -> NecklaceElement:
    """Schouten bracket on the necklace algebra.

    For homogeneous gamma of grade r and delta of grade s,
        [gamma, delta] = sum over base arrows a of
            D_{a'}(gamma) D_a(delta)
            - (-1)^{(r-1)(s-1)} D_{a'}(delta) D_a(gamma),
    normalized afterwards.  Inhomogeneous inputs extend bilinearly over
    their homogeneous parts.
    """
    gamma._check_same(delta)
    dq = gamma.dq
    m = dq.m
    gamma_parts = {r: gamma.grade_part(r) for r in gamma.grades()}
    delta_parts = {s: delta.grade_part(s) for s in delta.grades()}
    d_gamma = {(w, r): superderivative(dq, w, part)
               for r, part in gamma_parts.items()
               for w in range(2 * m)}
    d_delta = {(w, s): superderivative(dq, w, part)
               for s, part in delta_parts.items()
               for w in range(2 * m)}
    acc: dict[tuple[int, ...], Fraction] = {}

    def accumulate(product: FreeElement, factor: int):
        for word, coeff in product.terms.items():
            s = acc.get(word, 0) + factor * coeff
            if s:
                acc[word] = s
            else:
                acc.pop(word, None)

    for r in gamma_parts:
        for s in delta_parts:
            sign = -1 if ((r - 1) % 2 and (s - 1) % 2) else 1
            for a in range(m):
                dga = d_gamma[(a + m, r)]
                dda = d_delta[(a, s)]
                if dga and dda:
                    accumulate(dga * dda, 1)
                dgd = d_delta[(a + m, s)]
                ddg = d_gamma[(a, r)]
                if dgd and ddg:
                    accumulate(dgd * ddg, -sign)
    return normalize(FreeElement(dq, acc))


def is_poisson(pi: NecklaceElement):
    """(bracket vanishes?, [pi, pi]) for a grade-2 element."""
    require_grade(pi, 2, "is_poisson")
    residual = schouten(pi, pi)
    return residual.is_zero(), residual


def require_grade(elem: NecklaceElement, r: int, what: str):
    for w in elem.terms:
        if word_grade(elem.dq, w) != r:
            raise GradeError(
                f"{what} needs grade-{r} input; monomial "
                f"{word_name(elem.dq, w)} has grade {word_grade(elem.dq, w)}")


def homogeneous_parts(pi: NecklaceElement):
    """Split by polynomial degree: a closed word of length p+2 has degree p."""
    by_len: dict[int, dict] = {}
    for w, c in pi.terms.items():
        by_len.setdefault(word_length(w), {})[w] = c
    return [(length - 2, NecklaceElement(pi.dq, terms))
            for length, terms in sorted(by_len.items())]


def compatible_pair_check(pi1: NecklaceElement, pi2: NecklaceElement):
    """True iff [pi_i, pi_j] = 0 for all i, j in {1, 2}; returns residuals too."""
    residuals = {
        (1, 1): schouten(pi1, pi1),
        (1, 2): schouten(pi1, pi2),
        (2, 2): schouten(pi2, pi2),
    }
    ok = all(r.is_zero() for r in residuals.values())
    return ok, residuals


# -- presentation of grade-2 elements by commutator pairs ----------------

def commutator_pairs(pi: NecklaceElement):
    """Write a grade-2 element as sum of C * (P a' R b') single words.

    Each canonical word is rotated to its two dual-ending forms, yielding the
    flip-symmetric list of entries (C, P, a, R, b): the element equals the sum
    of C * P a' R b' over entries, and for every entry the mirrored entry
    (-C, R, b, P, a) is present (same cyclic class approached from the other
    dual).  P and R are paths in the undoubled quiver, stored as letter
    tuples; a trivial P is stored as the trivial word at its vertex.
    """
    require_grade(pi, 2, "commutator decomposition")
    dq = pi.dq
    entries = []
    for word, coeff in pi.terms.items():
        dual_positions = [i for i, x in enumerate(word) if dq.is_dual(x)]
        for j in dual_positions:
            rotated, sign = _rotation_ending_at(dq, word, j)
            P, a, R, b = _split_dual_ended(dq, rotated)
            entries.append((coeff * sign / 2, P, a, R, b))
    return entries


def _rotation_ending_at(dq, word, j):
    """Rotate so position j is last; returns (rotated, sign) with
    word == sign * rotated in the quotient."""
    n = len(word)
    shift = (j + 1) % n
    rotated = word[shift:] + word[:shift]
    total = word_grade(dq, word)
    pre = sum(1 for x in word[:shift] if dq.is_dual(x))
    sign = -1 if (pre % 2 and (total - pre) % 2) else 1
    return rotated, sign


def _split_dual_ended(dq, word):
    """Split P a' R b' (word ends with b'); trivial P, R get vertex tags."""
    duals = [i for i, x in enumerate(word) if dq.is_dual(x)]
    i, j = duals
    assert j == len(word) - 1
    a = dq.base_index(word[i])
    b = dq.base_index(word[j])
    P = word[:i] or trivial_word(dq.head(word[i]))
    R = word[i + 1:j] or trivial_word(dq.head(word[j]))
    return P, a, R, b


# -- the induced Lie bracket on cyclic functions (H0 picture) ------------

class CyclicElement:
    """An element of the path algebra modulo commutators: closed words up to
    plain (sign-free) rotation; open words vanish."""

    __slots__ = ("dq", "terms")

    def __init__(self, dq, terms=None):
        self.dq = dq
        self.terms: dict[tuple[int, ...], Fraction] = dict(terms or {})

    @classmethod
    def project(cls, elem: FreeElement) -> "CyclicElement":
        dq = elem.dq
        out: dict[tuple[int, ...], Fraction] = {}
        for word, coeff in elem.terms.items():
            if not is_closed(dq, word):
                continue
            canon = word if is_trivial(word) else min(
                word[i:] + word[:i] for i in range(len(word)))
            s = out.get(canon, 0) + coeff
            if s:
                out[canon] = s
            else:
                out.pop(canon, None)
        return cls(dq, out)

    def __add__(self, other):
        out = dict(self.terms)
        for w, c in other.terms.items():
            s = out.get(w, 0) + c
            if s:
                out[w] = s
            else:
                out.pop(w, None)
        return CyclicElement(self.dq, out)

    def __neg__(self):
        return CyclicElement(self.dq, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        return (isinstance(other, CyclicElement) and self.dq == other.dq
                and self.terms == other.terms)

    def is_zero(self):
        return not self.terms

    def __str__(self):
        return str(FreeElement(self.dq, dict(self.terms))) or "0"

    __repr__ = __str__


def cyclic_derivative(dq: DoubledQuiver, letter: int, f: CyclicElement) -> FreeElement:
    """Sign-free directional derivative on cyclic words."""
    out = FreeElement.zero(dq)
    for word, coeff in f.terms.items():
        if is_trivial(word):
            continue
        for i, x in enumerate(word):
            if x != letter:
                continue
            rest = word[i + 1:] + word[:i]
            if not rest:
                rest = trivial_word(dq.head(letter))
            out = out + FreeElement(dq, {rest: coeff})
    return out


def h0_bracket(f: CyclicElement, g: CyclicElement, pi: NecklaceElement) -> CyclicElement:
    """Lie bracket on cyclic functions induced by a grade-2 structure:
    {f, g} = sum of C * P D_a(f) R D_b(g) over the commutator presentation,
    taken modulo commutators."""
    dq = pi.dq
    total = FreeElement.zero(dq)
    for coeff, P, a, R, b in commutator_pairs(pi):
        da_f = cyclic_derivative(dq, a, f)
        if da_f.is_zero():
            continue
        db_g = cyclic_derivative(dq, b, g)
        if db_g.is_zero():
            continue
        prod = FreeElement(dq, {P: Fraction(1)}) * da_f
        prod = prod * FreeElement(dq, {R: Fraction(1)})
        prod = prod * db_g
        total = total + prod.scale(coeff)
    return CyclicElement.project(total)


def induced_derivation(f: CyclicElement, pi: NecklaceElement):
    """The derivation d_f implementing {f, .}, as a map on generators:
    arrow index b -> sum of C * P D_a(f) R over entries whose second slot is b."""
    dq = pi.dq
    images: dict[int, FreeElement] = {}
    for coeff, P, a, R, b in commutator_pairs(pi):
        da_f = cyclic_derivative(dq, a, f)
        if da_f.is_zero():
            continue
        img = FreeElement(dq, {P: Fraction(1)}) * da_f
        img = img * FreeElement(dq, {R: Fraction(1)})
        images[b] = images.get(b, FreeElement.zero(dq)) + img.scale(coeff)
    return {b: el for b, el in images.items() if not el.is_zero()}


class TensorElement:
    """An element of CQ (x) CQ: pairs of paths with rational coefficients."""

    __slots__ = ("dq", "terms")

    def __init__(self, dq, terms=None):
        self.dq = dq
        self.terms: dict[tuple, Fraction] = dict(terms or {})

    def add_term(self, left, right, coeff):
        key = (left, right)
        s = self.terms.get(key, 0) + coeff
        if s:
            self.terms[key] = s
        else:
            self.terms.pop(key, None)

    def flip(self) -> "TensorElement":
        return TensorElement(self.dq, {
            (r, l): c for (l, r), c in self.terms.items()})

    def __neg__(self):
        return TensorElement(self.dq, {k: -c for k, c in self.terms.items()})

    def __eq__(self, other):
        return (isinstance(other, TensorElement) and self.dq == other.dq
                and self.terms == other.terms)

    def is_zero(self):
        return not self.terms

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for (l, r), c in sorted(
                self.terms.items(),
                key=lambda kv: (word_sort_key(self.dq, kv[0][0]),
                                word_sort_key(self.dq, kv[0][1]))):
            pre = "" if c == 1 else ("- " if c == -1 else f"{c} ")
            parts.append(f"{pre}({word_name(self.dq, l)}) (x) "
                         f"({word_name(self.dq, r)})")
        return " + ".join(parts).replace("+ -", "-")

    __repr__ = __str__


def double_bracket(pi: NecklaceElement, a: int, b: int) -> TensorElement:
    """The generator-pair tensor {{a, b}} read off the commutator
    presentation: entries with slots (a, b) contribute C * P (x) R."""
    dq = pi.dq
    out = TensorElement(dq)
    for coeff, P, ea, R, eb in commutator_pairs(pi):
        if ea == a and eb == b:
            out.add_term(P, R, coeff)
    return out
