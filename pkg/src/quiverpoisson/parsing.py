"""Parser for the element expression grammar.

    element  := term (('+'|'-') term)*
    term     := [rational] factor+
    factor   := arrowName ["'"] | 'e' vertexId | '[' element ',' element ']'
                | '(' element ')'
    rational := integer ['/' positiveInteger]

Juxtaposition of factors is the concatenation product, ``[P,Q]`` expands to
PQ - QP, and a trailing apostrophe marks the dual arrow.  A token matching
``e<digits>`` is a trivial path unless the quiver declares an arrow of that
exact name.  As an extension, a bare rational is accepted as a term and
means that multiple of the algebra unit (the sum of all trivial paths), so
printed elements, including ``0``, read back in.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .freealg import FreeElement
from .necklace import NecklaceElement, normalize
from .quiver import Quiver, is_composable, word_name

_TOKEN_RE = re.compile(r"""
    (?P<rational>\d+(?:/\d+)?)
  | (?P<name>[A-Za-z][A-Za-z0-9_]*'?)
  | (?P<punct>[\[\](),+-])
  | (?P<ws>\s+)
  | (?P<bad>.)
""", re.VERBOSE)

_E_RE = re.compile(r"e(\d+)'?$")


class ParseError(ValueError):
    pass


def _tokenize(src: str):
    tokens = []
    for m in _TOKEN_RE.finditer(src):
        kind = m.lastgroup
        if kind == "ws":
            continue
        if kind == "bad":
            raise ParseError(f"unexpected character {m.group()!r} "
                             f"at position {m.start()}")
        tokens.append((kind, m.group(), m.start()))
    return tokens


class _Parser:
    def __init__(self, tokens, quiver: Quiver):
        self.tokens = tokens
        self.pos = 0
        self.quiver = quiver
        self.dq = quiver.double()
        self.arrow_names = {a.name for a in quiver.arrows}

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input")
        self.pos += 1
        return tok

    def expect(self, text):
        tok = self.take()
        if tok[1] != text:
            raise ParseError(f"expected {text!r} at position {tok[2]}, "
                             f"got {tok[1]!r}")

    def parse_element(self) -> FreeElement:
        sign = 1
        tok = self.peek()
        if tok and tok[1] in "+-":
            self.take()
            sign = -1 if tok[1] == "-" else 1
        result = self.parse_term().scale(sign)
        while True:
            tok = self.peek()
            if tok is None or tok[1] not in "+-":
                break
            self.take()
            term = self.parse_term()
            result = result - term if tok[1] == "-" else result + term
        return result

    def parse_term(self) -> FreeElement:
        coeff = Fraction(1)
        saw_rational = False
        tok = self.peek()
        if tok and tok[0] == "rational":
            self.take()
            coeff = Fraction(tok[1])
            saw_rational = True
        factors = []
        plain_run = []  # (letter, position) for bare-letter composability check
        only_letters = True
        while True:
            tok = self.peek()
            if tok is None or tok[1] in "+-,])":
                break
            factor, letter = self.parse_factor()
            factors.append(factor)
            if letter is not None:
                plain_run.append((letter, tok[2]))
            else:
                only_letters = False
        if not factors:
            if coeff is not None and saw_rational:
                return FreeElement.unit(self.dq).scale(coeff)
            raise ParseError("a term needs at least one factor"
                             + (f" (position {tok[2]})" if tok else ""))
        if only_letters and len(plain_run) > 1:
            word = tuple(l for l, _ in plain_run)
            if not is_composable(self.dq, word):
                raise ParseError(
                    f"word {word_name(self.dq, word)} does not compose "
                    f"(starting at position {plain_run[0][1]})")
        result = factors[0]
        for f in factors[1:]:
            result = result * f
        return result.scale(coeff)

    def parse_factor(self):
        """Returns (element, letter) with letter set for bare arrow factors."""
        tok = self.take()
        kind, text, pos = tok
        if kind == "name":
            if text.rstrip("'") in self.arrow_names:
                letter = self.dq.letter(text)
                return FreeElement(self.dq, {(letter,): Fraction(1)}), letter
            m = _E_RE.match(text)
            if m and not text.endswith("'"):
                v = int(m.group(1))
                if not 1 <= v <= self.quiver.num_vertices:
                    raise ParseError(f"no vertex {v} (position {pos})")
                return FreeElement.idempotent(self.dq, v), None
            raise ParseError(f"unknown arrow {text!r} at position {pos}")
        if text == "[":
            left = self.parse_element()
            self.expect(",")
            right = self.parse_element()
            self.expect("]")
            return left * right - right * left, None
        if text == "(":
            inner = self.parse_element()
            self.expect(")")
            return inner, None
        raise ParseError(f"unexpected token {text!r} at position {pos}")


def parse_element(src: str, quiver: Quiver) -> FreeElement:
    tokens = _tokenize(src)
    if not tokens:
        raise ParseError("empty expression")
    parser = _Parser(tokens, quiver)
    result = parser.parse_element()
    if parser.peek() is not None:
        tok = parser.peek()
        raise ParseError(f"trailing input at position {tok[2]}: {tok[1]!r}")
    return result


def parse_necklace(src: str, quiver: Quiver) -> NecklaceElement:
    return normalize(parse_element(src, quiver))


def parse_rmatrix(text: str, quiver: Quiver):
    """Parse r-matrix files: one `R x a y b p/q` per line, duals implicit on
    the second and fourth names.  Missing mirror entries are completed by
    skewness; explicitly inconsistent mirrors are an error."""
    from .yangbaxter import RMatrix

    r = RMatrix(quiver)
    explicit = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 6 or parts[0] != "R":
            raise ParseError(f"line {lineno}: expected 'R x a y b coeff'")
        try:
            u = (quiver.arrow_index(parts[1]), quiver.arrow_index(parts[2]))
            v = (quiver.arrow_index(parts[3]), quiver.arrow_index(parts[4]))
        except Exception as exc:
            raise ParseError(f"line {lineno}: {exc}")
        try:
            coeff = Fraction(parts[5])
        except ValueError:
            raise ParseError(f"line {lineno}: bad rational {parts[5]!r}")
        if (u, v) in explicit and explicit[(u, v)] != coeff:
            raise ParseError(f"line {lineno}: duplicate entry disagrees")
        explicit[(u, v)] = coeff
    for (u, v), coeff in explicit.items():
        if (v, u) in explicit and explicit[(v, u)] != -coeff:
            raise ParseError(
                "entries for the mirrored pair are not skew")
    for (u, v), coeff in explicit.items():
        r.set(u, v, coeff)
        if (v, u) not in explicit:
            r.set(v, u, -coeff)
    return r
