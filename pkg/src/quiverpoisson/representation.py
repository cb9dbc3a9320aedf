"""The trace map from necklace elements to polyvector fields on Rep(Q, alpha).

A grade-r monomial, rotated to end with a dual arrow and split as
P_1 a_1' P_2 a_2' ... P_r a_r', maps to the field

  lam_v * sum over block indices of
      P_1(X)_{m1 n1} d/d(a_1)_{m2 n1} ^ P_2(X)_{m2 n2} d/d(a_2)_{m3 n2}
      ^ ... ^ P_r(X)_{m_r n_r} d/d(a_r)_{m1 n_r},

where P_i(X) is the symbolic matrix product along the path P_i, the index
m_{r+1} wraps to m_1, and lam_v is the trace weight at the vertex v the
closed word is based at (the diagonal block the trace closes on).

This normalization (coefficient one per index tuple) is the unique scaling
per grade, up to a single global constant, under which the map is a morphism
for the Schouten brackets: a 1/r! "alternating projection" variant fails at
grades (2, 2) because (r+s-1)! differs from r! s!.  The familiar textbook
presentations of the induced structures come out doubled: the commutator
[x y', x x'] at alpha = (1) induces 2 x^2 d/dy ^ d/dx, whose coordinate
bracket {y, x} = 2 x^2 carries the literal factor 2 of the induced-bracket
formula {a_ij, b_kl} = 2 c sum P(X)_{kj} R(X)_{il} with c = lam = 1.

Rotating the canonical word to end at its last dual never introduces a sign
(the moved suffix is dual-free), so the construction is well defined on
canonical forms; for non-uniform weights the value depends on the canonical
basepoint, which is fixed by the canonical rotation.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from .necklace import NecklaceElement, commutator_pairs, schouten
from .polyvector import (
    CoordSystem,
    Poly,
    PolyField,
    _perm_sign,
    _poly_mat_mul,
    comm_schouten,
)
from .quiver import (
    QuiverError,
    check_dimensions,
    is_trivial,
    word_endpoints,
    word_grade,
)


class BudgetExceeded(RuntimeError):
    """Symbolic expansion would exceed the configured term budget."""


def _weights(quiver, weights):
    if weights is None:
        return [Fraction(1)] * quiver.num_vertices
    ws = [Fraction(w) for w in weights]
    if len(ws) != quiver.num_vertices:
        raise QuiverError("one trace weight per vertex is required")
    return ws


def _segments(dq, word):
    """Split a dual-ending word into (pieces, duals): pieces[i] is the path
    before the i-th dual, as a letter tuple (possibly empty)."""
    pieces, duals = [], []
    current = []
    for letter in word:
        if dq.is_dual(letter):
            pieces.append(tuple(current))
            duals.append(dq.base_index(letter))
            current = []
        else:
            current.append(letter)
    assert not current
    return pieces, duals


def _rotate_to_last_dual(dq, word):
    """Rotate a closed grade>=1 word so it ends with its last dual; the moved
    suffix is dual-free so the rotation sign is +1."""
    last = max(i for i, x in enumerate(word) if dq.is_dual(x))
    shift = (last + 1) % len(word)
    return word[shift:] + word[:shift]


def _symbolic_path(coords, dq, piece, fallback_vertex):
    if not piece:
        return coords.identity_block(fallback_vertex), fallback_vertex
    mat = None
    for letter in piece:
        m = coords.symbolic_matrix(dq.base_index(letter))
        mat = m if mat is None else _poly_mat_mul(mat, m)
    return mat, dq.head(piece[0])


def _presented_path(coords, dq, word):
    """Symbolic matrix of a stored path word; trivial words give identities."""
    if is_trivial(word):
        return coords.identity_block(-word[0])
    return _symbolic_path(coords, dq, word, None)[0]


def induced_field(gamma: NecklaceElement, alpha, weights=None,
                  budget: int | None = None) -> PolyField:
    """The polyvector field induced by a necklace element on Rep(Q, alpha)."""
    dq = gamma.dq
    quiver = dq.base
    dv = check_dimensions(quiver, alpha)
    lam = _weights(quiver, weights)
    coords = CoordSystem(quiver, dv)
    field = PolyField.zero(coords)
    work = 0

    for word, coeff in gamma.terms.items():
        r = word_grade(dq, word)
        if r == 0:
            # a closed base path: the weighted trace of its evaluation
            head = word_endpoints(dq, word)[1]
            if is_trivial(word):
                v = -word[0]
                field.add_term((), Poly.const(coeff * lam[v - 1] * dv.of_vertex(v)))
                continue
            mat, _ = _symbolic_path(coords, dq, word, head)
            tr = Poly()
            for d in range(len(mat)):
                tr = tr + mat[d][d]
            field.add_term((), tr.scale(coeff * lam[head - 1]))
            continue

        rotated = _rotate_to_last_dual(dq, word)
        basepoint = word_endpoints(dq, rotated)[1]
        pieces, duals = _segments(dq, rotated)
        mats = []
        for piece, a in zip(pieces, duals):
            # an empty piece is the identity at the dual's tail vertex
            mat, _ = _symbolic_path(coords, dq, piece,
                                    quiver.arrows[a].tail)
            mats.append(mat)
        scale = coeff * lam[basepoint - 1]

        ranges = []
        for mat in mats:
            ranges.append((len(mat), len(mat[0]) if mat else 0))

        idx = [[0, 0] for _ in range(r)]

        def emit(slot):
            nonlocal work
            if slot == r:
                poly = Poly.const(1)
                for i in range(r):
                    poly = poly * mats[i][idx[i][0]][idx[i][1]]
                    if poly.is_zero():
                        return
                wedge = tuple(
                    coords.var(duals[i], idx[(i + 1) % r][0], idx[i][1])
                    for i in range(r))
                field.add_term(wedge, poly.scale(scale))
                work += 1
                if budget is not None and work > budget:
                    raise BudgetExceeded(
                        f"field expansion exceeded {budget} terms")
                return
            rows, cols = ranges[slot]
            for m in range(rows):
                for n in range(cols):
                    idx[slot][0], idx[slot][1] = m, n
                    emit(slot + 1)

        emit(0)
    return field


def induced_bracket(pi: NecklaceElement, alpha, f, g, weights=None) -> Poly:
    """Poisson bracket of two coordinate functions under a grade-2 element.

    f and g are coordinate triples (arrow index, row, col).  Computed from
    the commutator presentation, independently of induced_field: the entry
    C * P a' R b' contributes 2 C * lam * P(X)_{kj} R(X)_{il} to
    {a_{ij}, b_{kl}} (the literal factor 2 of the induced-bracket formula),
    which agrees with pairing the induced field against the coordinate
    differentials.
    """
    dq = pi.dq
    quiver = dq.base
    dv = check_dimensions(quiver, alpha)
    lam = _weights(quiver, weights)
    coords = CoordSystem(quiver, dv)
    fa, fi, fj = f
    gb, gk, gl = g
    total = Poly()
    for coeff, P, a, R, b in commutator_pairs(pi):
        if a != fa or b != gb:
            continue
        basepoint = word_endpoints(dq, P)[1]
        Pmat = _presented_path(coords, dq, P)
        Rmat = _presented_path(coords, dq, R)
        total = total + (Pmat[gk][fj] * Rmat[fi][gl]).scale(
            2 * coeff * lam[basepoint - 1])
    return total


def bracket_table(pi: NecklaceElement, alpha, weights=None):
    """All coordinate brackets { (a,i,j), (b,k,l) } as a dict of Polys."""
    quiver = pi.dq.base
    coords = CoordSystem(quiver, check_dimensions(quiver, alpha))
    table = {}
    for p in range(coords.n_vars):
        for q in range(coords.n_vars):
            poly = induced_bracket(pi, alpha, coords.info[p], coords.info[q],
                                   weights)
            if poly:
                table[(coords.info[p], coords.info[q])] = poly
    return table


def pairing_bracket(pi: NecklaceElement, alpha, f, g, weights=None) -> Poly:
    """{f, g} by pairing the induced field with the two coordinate
    differentials; the cross-check route for induced_bracket."""
    dq = pi.dq
    quiver = dq.base
    coords = CoordSystem(quiver, check_dimensions(quiver, alpha))
    field = induced_field(pi, alpha, weights)
    vf = coords.var(*f)
    vg = coords.var(*g)
    total = Poly()
    for wedge, poly in field.terms.items():
        if len(wedge) != 2:
            raise QuiverError("pairing_bracket needs a grade-2 field")
        a, b = wedge
        if (a, b) == (vf, vg):
            total = total + poly
        elif (a, b) == (vg, vf):
            total = total - poly
    return total


def bracket_homomorphism_check(gamma: NecklaceElement, delta: NecklaceElement,
                               alpha, weights=None, budget: int = 10 ** 6,
                               method: str = "auto", seed: int = 0,
                               samples: int = 20) -> bool:
    """Does the trace map send the necklace bracket to the field bracket?

    method 'symbolic' compares the fields exactly and raises BudgetExceeded
    when the expansion would exceed the budget; 'sampled' compares exact
    evaluations at random rational points instead; 'auto' falls back from
    symbolic to sampled on budget overflow.
    """
    bracket = schouten(gamma, delta)
    if method not in ("symbolic", "sampled", "auto"):
        raise ValueError(f"unknown method {method!r}")
    if method in ("symbolic", "auto"):
        try:
            lhs = induced_field(bracket, alpha, weights, budget=budget)
            F = induced_field(gamma, alpha, weights, budget=budget)
            G = induced_field(delta, alpha, weights, budget=budget)
            _budget_guard(F, G, budget)
            rhs = comm_schouten(F, G)
            return lhs == rhs
        except BudgetExceeded:
            if method == "symbolic":
                raise
    return _sampled_equal(gamma, delta, bracket, alpha, weights, seed, samples)


def _budget_guard(F, G, budget):
    cost = 0
    for fw, fp in F.terms.items():
        for gw, gp in G.terms.items():
            cost += 2 * len(fw) * len(gw) * max(
                len(fp.terms), 1) * max(len(gp.terms), 1)
            if cost > budget:
                raise BudgetExceeded(
                    f"bracket expansion exceeded {budget} operations")


def _sampled_equal(gamma, delta, bracket, alpha, weights, seed, samples):
    if len(gamma.grades()) > 1 or len(delta.grades()) > 1:
        raise QuiverError("sampled comparison needs homogeneous inputs")
    rng = random.Random(seed)
    quiver = gamma.dq.base
    coords = CoordSystem(quiver, check_dimensions(quiver, alpha))
    r_out = (max(gamma.grades(), default=1)
             + max(delta.grades(), default=1) - 1)
    F = induced_field(gamma, alpha, weights)
    G = induced_field(delta, alpha, weights)
    lhs_field = induced_field(bracket, alpha, weights)
    for _ in range(samples):
        point = [Fraction(rng.randint(-9, 9)) for _ in range(coords.n_vars)]
        covs = [[Fraction(rng.randint(-9, 9)) for _ in range(coords.n_vars)]
                for _ in range(r_out)]
        lhs_val = lhs_field.eval_apply(point, covs)
        rhs_val = _bracket_eval(F, G, point, covs)
        if lhs_val != rhs_val:
            return False
    return True


def _bracket_eval(F, G, point, covs):
    """Evaluate [F, G] paired with covectors without symbolic expansion.

    Because each stored term carries its whole polynomial on the first
    wedge factor, only the derivative hits on that factor survive: the
    i-th "S X(Y) T" term has wedge S_i + gw and scalar fp d_{c_i}(gp), the
    j-th counter-term has wedge T_j + fw and scalar gp d_{d_j}(fp).
    """
    total = Fraction(0)
    for fw, fp in F.terms.items():
        fval = None
        for gw, gp in G.terms.items():
            r, s = len(fw), len(gw)
            if r + s - 1 != len(covs):
                continue
            sign_rs = -1 if ((r - 1) % 2 and (s - 1) % 2) else 1
            for i in range(1, r + 1):
                dg = gp.diff(fw[i - 1])
                if not dg:
                    continue
                if fval is None:
                    fval = fp.eval(point)
                scalar = fval * dg.eval(point)
                if not scalar:
                    continue
                sign = (-1) ** (i * (r - i))
                wedge = fw[i:] + fw[:i - 1] + gw
                total += sign * scalar * _cov_det(covs, wedge)
            gval = None
            for j in range(1, s + 1):
                df = fp.diff(gw[j - 1])
                if not df:
                    continue
                if gval is None:
                    gval = gp.eval(point)
                scalar = gval * df.eval(point)
                if not scalar:
                    continue
                sign = -sign_rs * (-1) ** (j * (s - j))
                wedge = gw[j:] + gw[:j - 1] + fw
                total += sign * scalar * _cov_det(covs, wedge)
    return total


def _cov_det(covs, vars_in_order):
    n = len(vars_in_order)
    if len(set(vars_in_order)) != n:
        return Fraction(0)
    total = Fraction(0)
    for perm in itertools.permutations(range(n)):
        prod = Fraction(_perm_sign(perm))
        for i, pi in enumerate(perm):
            prod *= covs[i][vars_in_order[pi]]
        total += prod
    return total


# -- invariance under the base-change group ---------------------------------

def _mat_inv_frac(mat):
    n = len(mat)
    aug = [[Fraction(mat[i][j]) for j in range(n)]
           + [Fraction(1 if i == j else 0) for j in range(n)]
           for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col]), None)
        if pivot is None:
            return None
        aug[col], aug[pivot] = aug[pivot], aug[col]
        pv = aug[col][col]
        aug[col] = [x / pv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def _random_invertible(rng, n):
    while True:
        mat = [[Fraction(rng.randint(-3, 3)) for _ in range(n)]
               for _ in range(n)]
        inv = _mat_inv_frac(mat)
        if inv is not None:
            return mat, inv


def invariance_check(field: PolyField, samples: int = 10, seed: int = 0) -> bool:
    """Check base-change invariance of a polyvector field at random points.

    Transforms points by X_a -> g_{h(a)} X_a g_{t(a)}^{-1} and covectors by
    the adjoint pullback Y_a -> g_{t(a)}^{-1} Y_a g_{h(a)}; an induced field
    satisfies field(gX)(Y) = field(X)(pullback Y) exactly.
    """
    coords = field.coords
    quiver = coords.quiver
    alpha = coords.alpha
    rng = random.Random(seed)
    grades = sorted(field.grades())
    if not grades:
        return True
    for _ in range(samples):
        point = [Fraction(rng.randint(-4, 4)) for _ in range(coords.n_vars)]
        gs = {v: _random_invertible(rng, alpha.of_vertex(v))
              for v in quiver.vertices}
        covs = [[Fraction(rng.randint(-4, 4)) for _ in range(coords.n_vars)]
                for _ in range(max(grades))]

        moved_point = [Fraction(0)] * coords.n_vars
        for ai, arrow in enumerate(quiver.arrows):
            g_h, _ = gs[arrow.head]
            _, g_t_inv = gs[arrow.tail]
            rows = alpha.of_vertex(arrow.head)
            cols = alpha.of_vertex(arrow.tail)
            X = [[point[coords.var(ai, rr, cc)] for cc in range(cols)]
                 for rr in range(rows)]
            gX = _ff_mul(_ff_mul(g_h, X), g_t_inv)
            for rr in range(rows):
                for cc in range(cols):
                    moved_point[coords.var(ai, rr, cc)] = gX[rr][cc]

        pulled_covs = []
        for cov in covs:
            pulled = [Fraction(0)] * coords.n_vars
            for ai, arrow in enumerate(quiver.arrows):
                _, g_t_inv = gs[arrow.tail]
                g_h, _ = gs[arrow.head]
                rows = alpha.of_vertex(arrow.head)
                cols = alpha.of_vertex(arrow.tail)
                # (Y_a)_{cr} pairs with d/d(a)_{rc}
                Y = [[cov[coords.var(ai, rr, cc)] for rr in range(rows)]
                     for cc in range(cols)]
                pY = _ff_mul(_ff_mul(g_t_inv, Y), g_h)
                for cc in range(cols):
                    for rr in range(rows):
                        pulled[coords.var(ai, rr, cc)] = pY[cc][rr]
            pulled_covs.append(pulled)

        for r in grades:
            part = field.grade_part(r)
            lhs = part.eval_apply(moved_point, covs[:r])
            rhs = part.eval_apply(point, [pc[:] for pc in pulled_covs[:r]])
            if lhs != rhs:
                return False
    return True


def _ff_mul(a, b):
    n, k = len(a), len(b)
    m = len(b[0]) if b else 0
    out = [[Fraction(0)] * m for _ in range(n)]
    for i in range(n):
        for t in range(k):
            if a[i][t]:
                for j in range(m):
                    out[i][j] += a[i][t] * b[t][j]
    return out
