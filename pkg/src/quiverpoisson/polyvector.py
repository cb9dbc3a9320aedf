"""Polynomial polyvector fields on representation spaces.

Coordinates are the matrix entries of the base arrows, ordered by (arrow
declaration index, row, col).  Polynomials are sparse dicts with exact
rational coefficients; a polyvector field maps strictly increasing wedge
tuples of coordinate ids to polynomials.  The Schouten bracket is computed
on decomposable terms by the cyclic-reordering formula

  [X_1...X_r, Y_1...Y_s] =
      sum_{i,j} (-1)^{i(r-i)+(j-1)(s-j+1)} S_i X_i(Y_j) T_j
    - (-1)^{(r-1)(s-1)} (-1)^{j(s-j)+(i-1)(r-i+1)} T_j Y_j(X_i) S_i,

with S_i = X_{i+1}..X_r X_1..X_{i-1} and T_j the same for Y.  On a pair of
vector fields this is the commutator; on a bivector it reproduces twice the
Jacobiator when paired with three exact differentials.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .quiver import Quiver, QuiverError, check_dimensions

# -- sparse multivariate polynomials ---------------------------------------
# monomial: tuple of (var id, exponent) pairs, sorted by var, exponents > 0

_ONE = ()


def _mono_mul(m1, m2):
    out = dict(m1)
    for v, e in m2:
        out[v] = out.get(v, 0) + e
    return tuple(sorted(out.items()))


class Poly:
    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms: dict[tuple, Fraction] = {}
        if terms:
            for mono, coeff in terms.items():
                c = Fraction(coeff)
                if c:
                    self.terms[tuple(mono)] = c

    @classmethod
    def const(cls, c):
        c = Fraction(c)
        return cls({_ONE: c} if c else {})

    @classmethod
    def var(cls, v, exp=1, coeff=1):
        return cls({((v, exp),): Fraction(coeff)})

    def __add__(self, other):
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Poly(out)

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scale(other)
        out: dict[tuple, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                s = out.get(m, 0) + c1 * c2
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return Poly(out)

    def scale(self, k):
        k = Fraction(k)
        if not k:
            return Poly()
        return Poly({m: c * k for m, c in self.terms.items()})

    __rmul__ = scale

    def diff(self, v):
        out = {}
        for mono, coeff in self.terms.items():
            for i, (var, exp) in enumerate(mono):
                if var != v:
                    continue
                rest = mono[:i] + ((var, exp - 1),) + mono[i + 1:]
                rest = tuple(p for p in rest if p[1] > 0)
                out[rest] = out.get(rest, 0) + coeff * exp
                break
        return Poly({m: c for m, c in out.items() if c})

    def eval(self, point):
        """point: var id -> value (Fractions or floats)."""
        total = 0
        for mono, coeff in self.terms.items():
            val = coeff
            for var, exp in mono:
                val *= point[var] ** exp
            total += val
        return total

    def degree(self):
        if not self.terms:
            return -1
        return max((sum(e for _, e in m) for m in self.terms), default=0)

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, Poly) and self.terms == other.terms

    def __bool__(self):
        return bool(self.terms)

    def sorted_terms(self):
        # graded lex: total degree first, then exponent pattern
        def key(mc):
            mono = mc[0]
            return (sum(e for _, e in mono), mono)
        return sorted(self.terms.items(), key=key)

    def format(self, namer=None):
        if not self.terms:
            return "0"
        namer = namer or (lambda v: f"z{v}")
        parts = []
        for mono, coeff in self.sorted_terms():
            body = " ".join(
                namer(v) if e == 1 else f"{namer(v)}^{e}" for v, e in mono)
            if not body:
                parts.append(str(coeff))
            elif coeff == 1:
                parts.append(body)
            elif coeff == -1:
                parts.append(f"- {body}")
            else:
                parts.append(f"{coeff} {body}")
        return " + ".join(parts).replace("+ -", "-")

    def __repr__(self):
        return self.format()


# -- coordinate systems -----------------------------------------------------

class CoordSystem:
    """Matrix-entry coordinates of Rep(Q, alpha), in (arrow, row, col) order."""

    def __init__(self, quiver: Quiver, alpha):
        self.quiver = quiver
        self.alpha = check_dimensions(quiver, alpha)
        self.index: dict[tuple[int, int, int], int] = {}
        self.info: list[tuple[int, int, int]] = []
        for ai, arrow in enumerate(quiver.arrows):
            rows = self.alpha.of_vertex(arrow.head)
            cols = self.alpha.of_vertex(arrow.tail)
            for r in range(rows):
                for c in range(cols):
                    self.index[(ai, r, c)] = len(self.info)
                    self.info.append((ai, r, c))

    def __eq__(self, other):
        return (isinstance(other, CoordSystem) and self.quiver == other.quiver
                and self.alpha == other.alpha)

    @property
    def n_vars(self) -> int:
        return len(self.info)

    def var(self, arrow, row, col) -> int:
        return self.index[(arrow, row, col)]

    def var_name(self, v: int) -> str:
        ai, r, c = self.info[v]
        name = self.quiver.arrows[ai].name
        rows = self.alpha.of_vertex(self.quiver.arrows[ai].head)
        cols = self.alpha.of_vertex(self.quiver.arrows[ai].tail)
        if rows == 1 and cols == 1:
            return name
        return f"{name}[{r + 1},{c + 1}]"

    def symbolic_matrix(self, arrow: int):
        a = self.quiver.arrows[arrow]
        rows = self.alpha.of_vertex(a.head)
        cols = self.alpha.of_vertex(a.tail)
        return [[Poly.var(self.var(arrow, r, c)) for c in range(cols)]
                for r in range(rows)]

    def identity_block(self, vertex: int):
        n = self.alpha.of_vertex(vertex)
        return [[Poly.const(1 if i == j else 0) for j in range(n)]
                for i in range(n)]


def _poly_mat_mul(a, b):
    n, k = len(a), len(b)
    m = len(b[0]) if b else 0
    out = [[Poly() for _ in range(m)] for _ in range(n)]
    for i in range(n):
        for t in range(k):
            c = a[i][t]
            if not c:
                continue
            for j in range(m):
                if b[t][j]:
                    out[i][j] = out[i][j] + c * b[t][j]
    return out


def sort_wedge(vars_in_order):
    """Sort a wedge tuple, returning (sorted tuple, sign); None if repeated."""
    vs = list(vars_in_order)
    if len(set(vs)) != len(vs):
        return None, 0
    sign = 1
    for i in range(len(vs)):
        for j in range(len(vs) - 1 - i):
            if vs[j] > vs[j + 1]:
                vs[j], vs[j + 1] = vs[j + 1], vs[j]
                sign = -sign
    return tuple(vs), sign


class PolyField:
    """A polyvector field: wedge tuples of coordinate ids -> polynomials.

    The empty wedge holds a plain function (grade 0)."""

    __slots__ = ("coords", "terms")

    def __init__(self, coords: CoordSystem, terms=None):
        self.coords = coords
        self.terms: dict[tuple, Poly] = {}
        if terms:
            for wedge, poly in terms.items():
                if poly:
                    self.terms[tuple(wedge)] = poly

    @classmethod
    def zero(cls, coords):
        return cls(coords)

    def add_term(self, vars_in_order, poly: Poly):
        wedge, sign = sort_wedge(vars_in_order)
        if wedge is None or poly.is_zero():
            return
        cur = self.terms.get(wedge, Poly()) + poly.scale(sign)
        if cur:
            self.terms[wedge] = cur
        else:
            self.terms.pop(wedge, None)

    def __add__(self, other):
        self._check(other)
        out = PolyField(self.coords, dict(self.terms))
        for wedge, poly in other.terms.items():
            cur = out.terms.get(wedge, Poly()) + poly
            if cur:
                out.terms[wedge] = cur
            else:
                out.terms.pop(wedge, None)
        return out

    def __neg__(self):
        return PolyField(self.coords,
                         {w: -p for w, p in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k):
        return PolyField(self.coords,
                         {w: p.scale(k) for w, p in self.terms.items()})

    def _check(self, other):
        if self.coords != other.coords:
            raise QuiverError("fields live on different representation spaces")

    def __eq__(self, other):
        return (isinstance(other, PolyField) and self.coords == other.coords
                and self.terms == other.terms)

    def is_zero(self):
        return not self.terms

    def grades(self):
        return {len(w) for w in self.terms}

    def grade_part(self, r):
        return PolyField(self.coords, {
            w: p for w, p in self.terms.items() if len(w) == r})

    def apply(self, covectors) -> Poly:
        """Pair with r constant covectors (each: var id -> rational)."""
        total = Poly()
        for wedge, poly in self.terms.items():
            r = len(wedge)
            if r != len(covectors):
                raise QuiverError(
                    f"term of grade {r} paired with {len(covectors)} covectors")
            det = Fraction(0)
            for perm in itertools.permutations(range(r)):
                sign = _perm_sign(perm)
                prod = Fraction(1)
                for i, pi in enumerate(perm):
                    prod *= covectors[i][wedge[pi]]
                det += sign * prod
            if det:
                total = total + poly.scale(det)
        return total

    def eval_apply(self, point, covectors):
        """Evaluate coefficients at a point, then pair with covectors."""
        total = 0
        for wedge, poly in self.terms.items():
            r = len(wedge)
            if r != len(covectors):
                raise QuiverError(
                    f"term of grade {r} paired with {len(covectors)} covectors")
            det = 0
            for perm in itertools.permutations(range(r)):
                sign = _perm_sign(perm)
                prod = 1
                for i, pi in enumerate(perm):
                    prod *= covectors[i][wedge[pi]]
                det += sign * prod
            if det:
                total += poly.eval(point) * det
        return total

    def map_coefficients(self, fn):
        out = PolyField(self.coords)
        for wedge, poly in self.terms.items():
            p2 = fn(poly)
            if p2:
                out.terms[wedge] = p2
        return out

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda wp: (len(wp[0]), wp[0]))

    def __str__(self):
        if not self.terms:
            return "0"
        namer = self.coords.var_name
        parts = []
        for wedge, poly in self.sorted_terms():
            body = " ^ ".join(f"d/d{namer(v)}" for v in wedge)
            coeff = poly.format(namer)
            if " " in coeff.strip() and len(poly.terms) > 1:
                coeff = f"({coeff})"
            parts.append(f"{coeff} {body}".strip())
        return "  +  ".join(parts)

    __repr__ = __str__

    def to_json(self):
        namer = self.coords.var_name
        return [
            {"wedge": [list(self.coords.info[v]) for v in wedge],
             "wedge_names": [namer(v) for v in wedge],
             "poly": [{"mono": {namer(v): e for v, e in mono},
                       "coeff": str(c)}
                      for mono, c in poly.sorted_terms()]}
            for wedge, poly in self.sorted_terms()
        ]


def _perm_sign(perm):
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j = i
        length = 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def comm_schouten(F: PolyField, G: PolyField) -> PolyField:
    """Schouten bracket of polyvector fields, grades >= 1."""
    F._check(G)
    if 0 in F.grades() or 0 in G.grades():
        raise QuiverError("the Schouten bracket here takes grades >= 1")
    out = PolyField.zero(F.coords)
    for fw, fp in F.terms.items():
        for gw, gp in G.terms.items():
            _st_term(out, fp, fw, gp, gw)
    return out


def _st_term(out: PolyField, fp: Poly, fw, gp: Poly, gw):
    """Bracket of decomposables fp d_{fw} and gp d_{gw} via the cyclic
    formula; the scalar rides on the first vector factor of each."""
    r, s = len(fw), len(gw)
    sign_rs = -1 if ((r - 1) % 2 and (s - 1) % 2) else 1
    for i in range(1, r + 1):
        ci = fw[i - 1]
        f_i = fp if i == 1 else Poly.const(1)
        s_i = fw[i:] + fw[:i - 1]
        s_coeff = fp if i != 1 else Poly.const(1)
        for j in range(1, s + 1):
            dj = gw[j - 1]
            g_j = gp if j == 1 else Poly.const(1)
            t_j = gw[j:] + gw[:j - 1]
            t_coeff = gp if j != 1 else Poly.const(1)

            # S_i X_i(Y_j) T_j
            deriv = f_i * g_j.diff(ci)
            if deriv:
                sign = (-1) ** (i * (r - i) + (j - 1) * (s - j + 1))
                poly = s_coeff * t_coeff * deriv
                out.add_term(s_i + (dj,) + t_j, poly.scale(sign))

            # T_j Y_j(X_i) S_i
            deriv2 = g_j * f_i.diff(dj)
            if deriv2:
                sign = -sign_rs * (-1) ** (j * (s - j) + (i - 1) * (r - i + 1))
                poly = t_coeff * s_coeff * deriv2
                out.add_term(t_j + (ci,) + s_i, poly.scale(sign))
