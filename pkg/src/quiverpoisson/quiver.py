"""Quivers, doubled quivers and dimension vectors.

A quiver is a finite directed multigraph with vertices 1..k.  The doubled
quiver attaches to every arrow a reverse arrow, written with a trailing
apostrophe (``x`` has dual ``x'``).  Words in the doubled quiver are stored
left-to-right in application order: the leftmost arrow acts last, so a word
``w = x1 ... xn`` is composable iff t(x_i) = h(x_{i+1}) for consecutive
letters, and its endpoints are (t(xn), h(x1)).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

ARROW_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*$")


class QuiverError(ValueError):
    """Malformed quiver description or ill-typed quiver operation."""


class NonComposable(ValueError):
    """A word whose consecutive arrows do not compose."""


@dataclass(frozen=True)
class Arrow:
    name: str
    tail: int
    head: int


@dataclass(frozen=True)
class Quiver:
    """Vertices 1..num_vertices plus an ordered tuple of named arrows."""

    num_vertices: int
    arrows: tuple[Arrow, ...]

    def __post_init__(self):
        if self.num_vertices < 1:
            raise QuiverError("a quiver needs at least one vertex")
        seen = set()
        for a in self.arrows:
            if not ARROW_NAME_RE.match(a.name):
                raise QuiverError(f"bad arrow name {a.name!r}")
            if a.name in seen:
                raise QuiverError(f"duplicate arrow name {a.name!r}")
            seen.add(a.name)
            for v in (a.tail, a.head):
                if not 1 <= v <= self.num_vertices:
                    raise QuiverError(
                        f"arrow {a.name!r} uses undeclared vertex {v}")

    @property
    def vertices(self) -> range:
        return range(1, self.num_vertices + 1)

    def arrow_index(self, name: str) -> int:
        for i, a in enumerate(self.arrows):
            if a.name == name:
                return i
        raise QuiverError(f"unknown arrow {name!r}")

    def double(self) -> "DoubledQuiver":
        return DoubledQuiver(self)


def loop_quiver(names) -> Quiver:
    """One vertex with a loop per name; e.g. loop_quiver('xy') is C<x,y>."""
    return Quiver(1, tuple(Arrow(n, 1, 1) for n in names))


def kronecker_quiver(names) -> Quiver:
    """Two vertices with the named arrows all going 1 -> 2."""
    return Quiver(2, tuple(Arrow(n, 1, 2) for n in names))


class DoubledQuiver:
    """The doubled alphabet of a quiver.

    Letters are integers: 0..m-1 name the base arrows in declaration order
    and m..2m-1 their duals (dual of letter i is m+i; duals of duals are not
    formed).  This ordering is the total order used for canonical cyclic
    rotations.
    """

    def __init__(self, base: Quiver):
        self.base = base
        self.m = len(base.arrows)

    def __eq__(self, other):
        return isinstance(other, DoubledQuiver) and self.base == other.base

    def __hash__(self):
        return hash(self.base)

    @property
    def num_letters(self) -> int:
        return 2 * self.m

    def is_dual(self, letter: int) -> bool:
        return letter >= self.m

    def base_index(self, letter: int) -> int:
        return letter % self.m

    def dual(self, letter: int) -> int:
        if self.is_dual(letter):
            raise QuiverError("duals of dual arrows are not formed")
        return letter + self.m

    def tail(self, letter: int) -> int:
        a = self.base.arrows[self.base_index(letter)]
        return a.head if self.is_dual(letter) else a.tail

    def head(self, letter: int) -> int:
        a = self.base.arrows[self.base_index(letter)]
        return a.tail if self.is_dual(letter) else a.head

    def name(self, letter: int) -> str:
        a = self.base.arrows[self.base_index(letter)]
        return a.name + "'" if self.is_dual(letter) else a.name

    def letter(self, token: str) -> int:
        """Resolve a token like ``x`` or ``x'`` to its letter."""
        if token.endswith("'"):
            return self.base.arrow_index(token[:-1]) + self.m
        return self.base.arrow_index(token)

    def arrows(self) -> list[Arrow]:
        out = list(self.base.arrows)
        out += [Arrow(a.name + "'", a.head, a.tail) for a in self.base.arrows]
        return out


# A word is a tuple of letters; the trivial path at vertex v is (-v,).

def trivial_word(vertex: int) -> tuple[int, ...]:
    return (-vertex,)


def is_trivial(word) -> bool:
    return len(word) == 1 and word[0] < 0


def word_length(word) -> int:
    return 0 if is_trivial(word) else len(word)


def word_endpoints(dq: DoubledQuiver, word) -> tuple[int, int]:
    """(tail, head) of a composable word; raises NonComposable otherwise."""
    if len(word) == 0:
        raise NonComposable("empty word has no endpoints; use a trivial path")
    if is_trivial(word):
        v = -word[0]
        return v, v
    for i in range(len(word) - 1):
        if dq.tail(word[i]) != dq.head(word[i + 1]):
            raise NonComposable(
                f"letters {dq.name(word[i])} and {dq.name(word[i + 1])} "
                f"do not compose at position {i}")
    return dq.tail(word[-1]), dq.head(word[0])


def is_composable(dq: DoubledQuiver, word) -> bool:
    try:
        word_endpoints(dq, word)
        return True
    except NonComposable:
        return False


def is_closed(dq: DoubledQuiver, word) -> bool:
    t, h = word_endpoints(dq, word)
    return t == h


def word_grade(dq: DoubledQuiver, word) -> int:
    """Number of dual arrows in the word."""
    if is_trivial(word):
        return 0
    return sum(1 for x in word if dq.is_dual(x))


def word_name(dq: DoubledQuiver, word) -> str:
    if is_trivial(word):
        return f"e{-word[0]}"
    return " ".join(dq.name(x) for x in word)


def word_sort_key(dq: DoubledQuiver, word):
    """Degree-lexicographic output order; duals sort right after their base."""
    if is_trivial(word):
        return (0, (-word[0],))
    return (len(word),
            tuple((dq.base_index(x), dq.is_dual(x)) for x in word))


_VERTICES_RE = re.compile(r"vertices\s*:\s*(\d+)$")
_ARROW_RE = re.compile(r"arrow\s+(\S+)\s+(\d+)\s*->\s*(\d+)$")


def build_quiver(text: str) -> Quiver:
    """Parse the line-based quiver format.

    ``vertices: <k>`` followed by one ``arrow <name> <i> -> <j>`` per line;
    ``#`` starts a comment.  ``/`` or ``;`` may stand in for newlines so the
    format can be given inline on a command line.
    """
    num_vertices = None
    arrows = []
    lines = re.split(r"[\n/;]", text)
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _VERTICES_RE.match(line)
        if m:
            if num_vertices is not None:
                raise QuiverError(f"line {lineno}: vertices declared twice")
            num_vertices = int(m.group(1))
            continue
        m = _ARROW_RE.match(line)
        if m:
            if num_vertices is None:
                raise QuiverError(
                    f"line {lineno}: arrow before vertices declaration")
            name, i, j = m.group(1), int(m.group(2)), int(m.group(3))
            if not ARROW_NAME_RE.match(name):
                raise QuiverError(f"line {lineno}: bad arrow name {name!r}")
            if any(a.name == name for a in arrows):
                raise QuiverError(f"line {lineno}: duplicate arrow {name!r}")
            if not (1 <= i <= num_vertices and 1 <= j <= num_vertices):
                raise QuiverError(f"line {lineno}: undeclared vertex")
            arrows.append(Arrow(name, i, j))
            continue
        raise QuiverError(f"line {lineno}: cannot parse {line!r}")
    if num_vertices is None:
        raise QuiverError("missing 'vertices:' declaration")
    return Quiver(num_vertices, tuple(arrows))


def quiver_to_text(q: Quiver) -> str:
    lines = [f"vertices: {q.num_vertices}"]
    lines += [f"arrow {a.name} {a.tail} -> {a.head}" for a in q.arrows]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class DimensionVector:
    alpha: tuple[int, ...]

    def __post_init__(self):
        if any(n < 0 for n in self.alpha):
            raise QuiverError("dimension vector entries must be nonnegative")

    @property
    def total(self) -> int:
        return sum(self.alpha)

    def of_vertex(self, v: int) -> int:
        return self.alpha[v - 1]


def check_dimensions(q: Quiver, alpha) -> DimensionVector:
    dv = alpha if isinstance(alpha, DimensionVector) else DimensionVector(tuple(alpha))
    if len(dv.alpha) != q.num_vertices:
        raise QuiverError(
            f"dimension vector has {len(dv.alpha)} entries for "
            f"{q.num_vertices} vertices")
    return dv
