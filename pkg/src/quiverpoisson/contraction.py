"""Contraction of Poisson structures along invertible arrows.

Single-arrow contraction of a at j = h(a) fuses t(a) with j, removes a, and
pushes a grade-2 element through the substitution

    a  -> trivial path at the fused vertex,
    a' -> sum_{b: t(b)=j} b' b  -  sum_{b: h(b)=j, b != a} b b',

which expresses the covector slot of a on the locus where the a-matrix is
gauged to the identity and covectors annihilate the gauge orbit.  The tail
variant gauges at i = t(a) instead:

    a' -> sum_{b: h(b)=i} b b'  -  sum_{b: t(b)=i, b != a} b' b.

Multi-arrow contraction takes arrows a_1..a_s with common head j and
pairwise distinct tails v_m != j; the vertex j is removed, every other
arrow touching j is decomposed into pieces through the v_m, and

    a_m  -> (1/eps_m) e_{v_m},
    a_m' -> eps_m * e_{v_m} ( sum_{b: t(b)=j} b' b
                              - sum_{b: h(b)=j, b not contracted} b b' ),

where b and b' stand for the sums of their pieces and the idempotent
selects the pieces whose dual ends at v_m.  The optional scalars eps_m
gauge the stacked block matrix to have blocks eps_m^-1 instead of 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .freealg import FreeElement
from .necklace import NecklaceElement, normalize, require_grade
from .quiver import Arrow, Quiver, QuiverError


@dataclass(frozen=True)
class ContractionPlan:
    mode: str                      # "single" or "multi"
    arrows: tuple[str, ...]
    side: str = "head"             # single mode: vertex whose group gauges
    eps: tuple = ()                # multi mode: one scalar per arrow

    def __post_init__(self):
        if self.mode not in ("single", "multi"):
            raise QuiverError(f"unknown contraction mode {self.mode!r}")
        if self.mode == "single":
            if len(self.arrows) != 1:
                raise QuiverError("single contraction takes one arrow")
            if self.side not in ("head", "tail"):
                raise QuiverError("side must be 'head' or 'tail'")
        else:
            if not self.arrows:
                raise QuiverError("multi contraction needs arrows")
            if self.eps and len(self.eps) != len(self.arrows):
                raise QuiverError("one eps per contracted arrow")


def plan_single(arrow: str, side: str = "head") -> ContractionPlan:
    return ContractionPlan("single", (arrow,), side=side)


def plan_multi(arrows, eps=None) -> ContractionPlan:
    arrows = tuple(arrows)
    eps = tuple(Fraction(e) for e in eps) if eps else ()
    if any(e == 0 for e in eps):
        raise QuiverError("eps scalars must be nonzero")
    return ContractionPlan("multi", arrows, eps=eps)


@dataclass
class ContractionResult:
    quiver: Quiver
    vertex_map: dict[int, int]
    # old arrow name -> {piece key: new arrow name}; key () for unchanged
    # arrows, m for arrows split by tail vertex, (m, mp) for split loops
    arrow_pieces: dict[str, dict] = field(default_factory=dict)


def _renumber(num_vertices, removed, fused_into=None):
    """Map old vertex ids to consecutive new ids with `removed` deleted;
    if fused_into is given, `removed` maps to the image of that vertex."""
    new_ids = {}
    nxt = 1
    for v in range(1, num_vertices + 1):
        if v == removed:
            continue
        new_ids[v] = nxt
        nxt += 1
    if fused_into is not None:
        new_ids[removed] = new_ids[fused_into]
    return new_ids


def _validate_single(q: Quiver, plan: ContractionPlan):
    name = plan.arrows[0]
    idx = q.arrow_index(name)
    a = q.arrows[idx]
    if a.head == a.tail:
        raise QuiverError(f"cannot contract the loop {name!r}")
    return a


def _validate_multi(q: Quiver, plan: ContractionPlan):
    arrows = [q.arrows[q.arrow_index(n)] for n in plan.arrows]
    heads = {a.head for a in arrows}
    if len(heads) != 1:
        raise QuiverError("contracted arrows must share their head")
    j = heads.pop()
    tails = [a.tail for a in arrows]
    if len(set(tails)) != len(tails):
        raise QuiverError("contracted arrows must have distinct tails")
    if j in tails:
        raise QuiverError("contracted arrows may not be loops")
    return arrows, j, tails


def contract_quiver(q: Quiver, plan: ContractionPlan) -> ContractionResult:
    if plan.mode == "single":
        a = _validate_single(q, plan)
        keep, fuse = min(a.tail, a.head), max(a.tail, a.head)
        vmap = _renumber(q.num_vertices, fuse, fused_into=keep)
        arrows = []
        pieces = {}
        for b in q.arrows:
            if b.name == a.name:
                continue
            arrows.append(Arrow(b.name, vmap[b.tail], vmap[b.head]))
            pieces[b.name] = {(): b.name}
        return ContractionResult(Quiver(q.num_vertices - 1, tuple(arrows)),
                                 vmap, pieces)

    arrows_c, j, tails = _validate_multi(q, plan)
    contracted = set(plan.arrows)
    vmap = _renumber(q.num_vertices, j)
    s = len(arrows_c)
    new_arrows = []
    pieces = {}
    names_seen = set()

    def emit(name, tail, head):
        if name in names_seen:
            raise QuiverError(
                f"derived arrow name {name!r} collides; rename the source "
                "arrows before contracting")
        names_seen.add(name)
        new_arrows.append(Arrow(name, tail, head))

    for b in q.arrows:
        if b.name in contracted:
            continue
        touches_tail = b.tail == j
        touches_head = b.head == j
        if not touches_tail and not touches_head:
            emit(b.name, vmap[b.tail], vmap[b.head])
            pieces[b.name] = {(): b.name}
        elif touches_tail and not touches_head:
            pieces[b.name] = {}
            for m in range(1, s + 1):
                nm = f"{b.name}_{m}"
                emit(nm, vmap[tails[m - 1]], vmap[b.head])
                pieces[b.name][m] = nm
        elif touches_head and not touches_tail:
            pieces[b.name] = {}
            for m in range(1, s + 1):
                nm = f"{b.name}_{m}"
                emit(nm, vmap[b.tail], vmap[tails[m - 1]])
                pieces[b.name][m] = nm
        else:  # loop at j: a piece from v_mp to v_m for every ordered pair
            pieces[b.name] = {}
            for m in range(1, s + 1):
                for mp in range(1, s + 1):
                    nm = f"{b.name}_{m}_{mp}"
                    emit(nm, vmap[tails[mp - 1]], vmap[tails[m - 1]])
                    pieces[b.name][(m, mp)] = nm
    return ContractionResult(Quiver(q.num_vertices - 1, tuple(new_arrows)),
                             vmap, pieces)


def _letter_image_single(q, res, plan, a):
    """Substitution map letter -> FreeElement for a single contraction."""
    dq_old = q.double()
    dq_new = res.quiver.double()
    j = a.head if plan.side == "head" else a.tail
    fused = res.vertex_map[a.head]

    # the moment-condition expression for the contracted dual slot
    expr = FreeElement.zero(dq_new)
    for b in q.arrows:
        if b.name == a.name:
            continue
        lb = dq_new.letter(b.name)
        word_dual_first = (dq_new.dual(lb), lb)    # b' b
        word_dual_last = (lb, dq_new.dual(lb))     # b b'
        if plan.side == "head":
            if b.tail == j:
                expr = expr + FreeElement.word(dq_new, word_dual_first)
            if b.head == j:
                expr = expr - FreeElement.word(dq_new, word_dual_last)
        else:
            if b.head == j:
                expr = expr + FreeElement.word(dq_new, word_dual_last)
            if b.tail == j:
                expr = expr - FreeElement.word(dq_new, word_dual_first)

    images = {}
    for letter in range(dq_old.num_letters):
        base = q.arrows[dq_old.base_index(letter)]
        if base.name == a.name:
            if dq_old.is_dual(letter):
                images[letter] = expr
            else:
                images[letter] = FreeElement.idempotent(dq_new, fused)
        else:
            nl = dq_new.letter(base.name)
            nl = dq_new.dual(nl) if dq_old.is_dual(letter) else nl
            images[letter] = FreeElement.word(dq_new, (nl,))
            # relabeling sanity: endpoints must be the fused images
            assert dq_new.tail(nl) == res.vertex_map[dq_old.tail(letter)]
            assert dq_new.head(nl) == res.vertex_map[dq_old.head(letter)]
    return images


def _letter_image_multi(q, res, plan):
    dq_old = q.double()
    dq_new = res.quiver.double()
    arrows_c, j, tails = _validate_multi(q, plan)
    contracted = {a.name: m + 1 for m, a in enumerate(arrows_c)}
    eps = list(plan.eps) or [Fraction(1)] * len(arrows_c)

    def piece_sum(name, dual):
        total = FreeElement.zero(dq_new)
        for piece_name in res.arrow_pieces[name].values():
            lt = dq_new.letter(piece_name)
            if dual:
                lt = dq_new.dual(lt)
            total = total + FreeElement.word(dq_new, (lt,))
        return total

    # sum_{b in T_j} b' b - sum_{b in S_j, not contracted} b b', in pieces
    expr = FreeElement.zero(dq_new)
    for b in q.arrows:
        if b.name in contracted:
            continue
        if b.tail == j:
            expr = expr + piece_sum(b.name, True) * piece_sum(b.name, False)
        if b.head == j:
            expr = expr - piece_sum(b.name, False) * piece_sum(b.name, True)

    images = {}
    for letter in range(dq_old.num_letters):
        base = q.arrows[dq_old.base_index(letter)]
        if base.name in contracted:
            m = contracted[base.name]
            v_m = res.vertex_map[tails[m - 1]]
            e_vm = FreeElement.idempotent(dq_new, v_m)
            if dq_old.is_dual(letter):
                images[letter] = (e_vm * expr).scale(eps[m - 1])
            else:
                images[letter] = e_vm.scale(Fraction(1) / eps[m - 1])
        else:
            images[letter] = piece_sum(base.name, dq_old.is_dual(letter))
    return images


def contract_bivector(pi: NecklaceElement, plan: ContractionPlan):
    """Push a grade-2 element through a contraction; returns the contracted
    element together with the ContractionResult describing the new quiver."""
    require_grade(pi, 2, "contraction")
    q = pi.dq.base
    res = contract_quiver(q, plan)
    if plan.mode == "single":
        a = _validate_single(q, plan)
        images = _letter_image_single(q, res, plan, a)
    else:
        images = _letter_image_multi(q, res, plan)
    dq_new = res.quiver.double()
    acc = FreeElement.zero(dq_new)
    for word, coeff in pi.terms.items():
        if word[0] < 0:
            acc = acc + FreeElement.idempotent(
                dq_new, res.vertex_map[-word[0]], coeff)
            continue
        prod = None
        for letter in word:
            img = images[letter]
            prod = img if prod is None else prod * img
            if prod.is_zero():
                break
        if prod is not None and not prod.is_zero():
            acc = acc + prod.scale(coeff)
    return normalize(acc), res
