"""The free path algebra of a doubled quiver, with exact rational coefficients.

Elements are finite linear combinations of composable words.  Multiplication
is concatenation (zero when endpoints do not match); trivial paths act as
the orthogonal idempotents e_v.  Matrix evaluation realises a word as a
product of block-embedded matrices: base arrows consume the matrices of a
representation point, dual arrows consume covector matrices, one per dual
occurrence in order.
"""

from __future__ import annotations

from fractions import Fraction

from .quiver import (
    DoubledQuiver,
    NonComposable,
    QuiverError,
    check_dimensions,
    is_composable,
    is_trivial,
    trivial_word,
    word_endpoints,
    word_grade,
    word_name,
    word_sort_key,
)


class FreeElement:
    """A noncommutative polynomial in the arrows of a doubled quiver."""

    __slots__ = ("dq", "terms")

    def __init__(self, dq: DoubledQuiver, terms=None):
        self.dq = dq
        self.terms: dict[tuple[int, ...], Fraction] = {}
        if terms:
            for word, coeff in terms.items():
                c = Fraction(coeff)
                if c:
                    self.terms[word] = c

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, dq):
        return cls(dq)

    @classmethod
    def word(cls, dq, word, coeff=1):
        word = tuple(word)
        if not is_composable(dq, word):
            raise NonComposable(f"word {word_name(dq, word)} does not compose")
        return cls(dq, {word: Fraction(coeff)})

    @classmethod
    def idempotent(cls, dq, vertex, coeff=1):
        return cls(dq, {trivial_word(vertex): Fraction(coeff)})

    @classmethod
    def unit(cls, dq):
        """Sum of all trivial paths; the identity of the path algebra."""
        el = cls(dq)
        for v in dq.base.vertices:
            el.terms[trivial_word(v)] = Fraction(1)
        return el

    @classmethod
    def from_tokens(cls, dq, tokens, coeff=1):
        word = tuple(dq.letter(t) for t in tokens)
        return cls.word(dq, word, coeff)

    # -- ring structure -----------------------------------------------

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
        return FreeElement(self.dq, out)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return FreeElement(self.dq, {w: -c for w, c in self.terms.items()})

    def scale(self, k) -> "FreeElement":
        k = Fraction(k)
        if not k:
            return FreeElement.zero(self.dq)
        return FreeElement(self.dq, {w: c * k for w, c in self.terms.items()})

    def __rmul__(self, k):
        return self.scale(k)

    def __mul__(self, other):
        if not isinstance(other, FreeElement):
            return self.scale(other)
        self._check_same(other)
        dq = self.dq
        out: dict[tuple[int, ...], Fraction] = {}
        # stored words are composable, so endpoints come from end letters
        lefts = [(u, cu, -u[0] if u[0] < 0 else dq.tail(u[-1]))
                 for u, cu in self.terms.items()]
        rights = [(w, cw, -w[0] if w[0] < 0 else dq.head(w[0]))
                  for w, cw in other.terms.items()]
        for u, cu, tu in lefts:
            u_trivial = u[0] < 0
            for w, cw, hw in rights:
                if tu != hw:
                    continue
                if u_trivial:
                    key = w
                elif w[0] < 0:
                    key = u
                else:
                    key = u + w
                s = out.get(key, 0) + cu * cw
                if s:
                    out[key] = s
                else:
                    out.pop(key, None)
        return FreeElement(dq, out)

    def __eq__(self, other):
        return (isinstance(other, FreeElement) and self.dq == other.dq
                and self.terms == other.terms)

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    # -- inspection ---------------------------------------------------

    def sorted_terms(self):
        return sorted(self.terms.items(),
                      key=lambda wc: word_sort_key(self.dq, wc[0]))

    def grades(self) -> set[int]:
        return {word_grade(self.dq, w) for w in self.terms}

    def grade_part(self, r: int) -> "FreeElement":
        return FreeElement(self.dq, {
            w: c for w, c in self.terms.items()
            if word_grade(self.dq, w) == r})

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for word, coeff in self.sorted_terms():
            body = word_name(self.dq, word)
            if coeff == 1:
                txt = body
            elif coeff == -1:
                txt = f"- {body}"
            else:
                txt = f"{coeff} {body}"
            parts.append(txt)
        out = " + ".join(parts)
        return out.replace("+ -", "-")

    __repr__ = __str__

    def to_json(self):
        dq = self.dq
        return [
            {"word": (["e%d" % -w[0]] if is_trivial(w)
                      else [dq.name(x) for x in w]),
             "coeff": str(c)}
            for w, c in self.sorted_terms()
        ]


class MatrixPoint:
    """A representation point: one matrix per base arrow, shapes from alpha."""

    def __init__(self, quiver, alpha, matrices):
        self.quiver = quiver
        self.alpha = check_dimensions(quiver, alpha)
        self.matrices = {}
        for a in quiver.arrows:
            try:
                mat = matrices[a.name]
            except KeyError:
                raise QuiverError(f"missing matrix for arrow {a.name!r}")
            rows, cols = self.alpha.of_vertex(a.head), self.alpha.of_vertex(a.tail)
            mat = [list(row) for row in mat]
            if len(mat) != rows or any(len(r) != cols for r in mat):
                raise QuiverError(
                    f"matrix for {a.name!r} must be {rows}x{cols}")
            self.matrices[a.name] = mat

    def block_offsets(self):
        offs = [0]
        for n in self.alpha.alpha:
            offs.append(offs[-1] + n)
        return offs


def _mat_mul(a, b):
    if not a or not b:
        return [[0] * (len(b[0]) if b else 0) for _ in a]
    n, k, m = len(a), len(b), len(b[0])
    out = [[0] * m for _ in range(n)]
    for i in range(n):
        ai = a[i]
        oi = out[i]
        for t in range(k):
            c = ai[t]
            if c:
                bt = b[t]
                for j in range(m):
                    oi[j] += c * bt[j]
    return out


def _identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def evaluate(elem: FreeElement, point: MatrixPoint, covectors=None):
    """Evaluate an element at a representation point as a |alpha| x |alpha| matrix.

    Base arrows use the point's matrices.  The i-th dual occurrence in each
    word consumes ``covectors[i]``, a matrix of shape alpha_t(a) x alpha_h(a)
    for that word's i-th dual arrow a.  Words with r duals require exactly r
    covectors; dual-free evaluation passes covectors=None.
    """
    dq = elem.dq
    q = dq.base
    point_alpha = point.alpha
    covectors = list(covectors) if covectors is not None else []
    total = point_alpha.total
    offs = point.block_offsets()
    result = [[Fraction(0)] * total for _ in range(total)]

    for word, coeff in elem.terms.items():
        r = word_grade(dq, word)
        if r != len(covectors):
            raise QuiverError(
                f"word {word_name(dq, word)} has {r} dual slots but "
                f"{len(covectors)} covectors were supplied")
        tail, head = word_endpoints(dq, word)
        if is_trivial(word):
            v = -word[0]
            block = _identity(point_alpha.of_vertex(v))
        else:
            block = None
            slot = 0
            for letter in word:
                a = q.arrows[dq.base_index(letter)]
                if dq.is_dual(letter):
                    mat = covectors[slot]
                    slot += 1
                    rows, cols = (point_alpha.of_vertex(a.tail),
                                  point_alpha.of_vertex(a.head))
                else:
                    mat = point.matrices[a.name]
                    rows, cols = (point_alpha.of_vertex(a.head),
                                  point_alpha.of_vertex(a.tail))
                mat = [list(rw) for rw in mat]
                if len(mat) != rows or any(len(rw) != cols for rw in mat):
                    raise QuiverError(
                        f"matrix for letter {dq.name(letter)} must be "
                        f"{rows}x{cols}")
                block = mat if block is None else _mat_mul(block, mat)
        oh, ot = offs[head - 1], offs[tail - 1]
        for i, row in enumerate(block):
            for j, val in enumerate(row):
                if val:
                    result[oh + i][ot + j] += coeff * val
    return result
