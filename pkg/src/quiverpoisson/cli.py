"""Command-line front end.

Exit codes: 0 when the command succeeds (and, for check verbs, the checked
property holds), 1 when a checked property fails, 2 on usage errors, 3 when
a symbolic budget is exceeded.  All randomized checks take --seed.  Inputs
naming an existing file are read from it; otherwise they are parsed inline.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

import numpy as np

from . import leaves, report
from .contraction import contract_bivector, plan_multi, plan_single
from .necklace import (
    compatible_pair_check,
    double_bracket,
    h0_bracket,
    homogeneous_parts,
    is_poisson,
    normalize,
    schouten,
    CyclicElement,
)
from .parsing import ParseError, parse_element, parse_rmatrix
from .polyvector import comm_schouten
from .quiver import Quiver, QuiverError, build_quiver, loop_quiver, quiver_to_text
from .representation import (
    BudgetExceeded,
    bracket_homomorphism_check,
    bracket_table,
    induced_field,
    invariance_check,
)
from .yangbaxter import (
    aguiar_rmatrix,
    associativity_check,
    ayb_check,
    linear_to_algebra,
    rmatrix_to_bivector,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


class CliError(Exception):
    def __init__(self, message, code=EXIT_USAGE):
        super().__init__(message)
        self.code = code


def _read_maybe_file(value: str) -> str:
    if os.path.exists(value):
        with open(value) as fh:
            return fh.read()
    return value


def _load_quiver(value: str) -> Quiver:
    if value is None:
        raise CliError("a quiver (-q/--quiver) is required")
    return build_quiver(_read_maybe_file(value))


def _load_element(value: str, quiver: Quiver):
    return parse_element(_read_maybe_file(value), quiver)


def _ints(csvish: str):
    return tuple(int(tok) for tok in csvish.split(","))


def _fractions(csvish: str):
    return tuple(Fraction(tok) for tok in csvish.split(","))


def _emit(args, payload: dict, text_lines):
    if args.format == "json":
        print(json.dumps({"schema": 1, **payload}, indent=2, default=str))
    else:
        for line in text_lines:
            print(line)


# -- symbolic verbs ----------------------------------------------------------

def cmd_normalize(args):
    q = _load_quiver(args.quiver)
    el = normalize(_load_element(args.element, q))
    _emit(args, {"element": el.to_json()}, [str(el)])
    return EXIT_OK


def cmd_bracket(args):
    q = _load_quiver(args.quiver)
    a = normalize(_load_element(args.e1, q))
    b = normalize(_load_element(args.e2, q))
    br = schouten(a, b)
    _emit(args, {"bracket": br.to_json()}, [str(br)])
    return EXIT_OK


def cmd_is_poisson(args):
    q = _load_quiver(args.quiver)
    pi = normalize(_load_element(args.element, q))
    ok, residual = is_poisson(pi)
    _emit(args, {"poisson": ok, "residual": residual.to_json()},
          [f"poisson: {ok}", f"residual: {residual}"])
    return EXIT_OK if ok else EXIT_FAIL


def cmd_parts(args):
    q = _load_quiver(args.quiver)
    pi = normalize(_load_element(args.element, q))
    parts = homogeneous_parts(pi)
    payload = {"parts": [{"degree": d, "element": el.to_json()}
                         for d, el in parts]}
    lines = [f"degree {d}: {el}" for d, el in parts]
    if len(parts) == 2:
        ok, _ = compatible_pair_check(parts[0][1], parts[1][1])
        payload["compatible"] = ok
        lines.append(f"compatible pair: {ok}")
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_h0_bracket(args):
    q = _load_quiver(args.quiver)
    pi = normalize(_load_element(args.pi, q))
    f = CyclicElement.project(_load_element(args.f, q))
    g = CyclicElement.project(_load_element(args.g, q))
    out = h0_bracket(f, g, pi)
    _emit(args, {"h0_bracket": str(out)}, [str(out)])
    return EXIT_OK


def cmd_double_bracket(args):
    q = _load_quiver(args.quiver)
    pi = normalize(_load_element(args.pi, q))
    tb = double_bracket(pi, q.arrow_index(args.a), q.arrow_index(args.b))
    _emit(args, {"double_bracket": str(tb)}, [str(tb)])
    return EXIT_OK


# -- Yang-Baxter verbs -------------------------------------------------------

def cmd_ayb_aguiar(args):
    if args.quiver:
        q = _load_quiver(args.quiver)
    else:
        q = loop_quiver([f"a{i}" for i in range(1, args.m + 1)])
    r = aguiar_rmatrix(args.m, q)
    pi = rmatrix_to_bivector(r)
    ok, _ = ayb_check(r)
    _emit(args, {"rmatrix": str(r), "element": pi.to_json(), "ayb": ok},
          [f"r = {r}", f"element = {pi}", f"ayb: {ok}"])
    return EXIT_OK if ok else EXIT_FAIL


def cmd_ayb_check(args):
    q = _load_quiver(args.quiver)
    r = parse_rmatrix(_read_maybe_file(args.rfile), q)
    ok, residual = ayb_check(r)
    named = {
        " ".join(q.arrows[i].name for i in key): str(val)
        for key, val in residual.items()
    }
    _emit(args, {"ayb": ok, "residual": named},
          [f"ayb: {ok}"] + [f"  {k}: {v}" for k, v in named.items()])
    return EXIT_OK if ok else EXIT_FAIL


def cmd_linear_to_algebra(args):
    q = _load_quiver(args.quiver)
    pi = normalize(_load_element(args.element, q))
    sc = linear_to_algebra(pi)
    rows = [
        {"x": q.arrows[x].name, "a": q.arrows[a].name,
         "b": q.arrows[b].name, "coeff": str(c)}
        for (x, a, b), c in sorted(sc.table.items())
    ]
    _emit(args, {"structure_constants": rows},
          [f"J^{r['x']}_{{{r['a']},{r['b']}}} = {r['coeff']}" for r in rows])
    return EXIT_OK


def cmd_linear_check(args):
    q = _load_quiver(args.quiver)
    pi = normalize(_load_element(args.element, q))
    sc = linear_to_algebra(pi)
    assoc, violations = associativity_check(sc)
    poisson, residual = is_poisson(pi) if pi else (True, None)
    agree = assoc == poisson
    _emit(args, {"associative": assoc, "poisson": poisson, "agree": agree},
          [f"associative: {assoc}", f"poisson: {poisson}",
           f"criteria agree: {agree}"])
    return EXIT_OK if (assoc and poisson) else EXIT_FAIL


# -- representation verbs ----------------------------------------------------

def cmd_induce(args):
    q = _load_quiver(args.quiver)
    pi = normalize(_load_element(args.element, q))
    alpha = _ints(args.dim)
    weights = _fractions(args.weights) if args.weights else None
    table = bracket_table(pi, alpha, weights)
    from .polyvector import CoordSystem
    coords = CoordSystem(q, alpha)
    lines = []
    rows = []
    for (f, g), poly in table.items():
        fname = coords.var_name(coords.var(*f))
        gname = coords.var_name(coords.var(*g))
        lines.append(f"{{{fname}, {gname}}} = {poly.format(coords.var_name)}")
        rows.append({"f": list(f), "g": list(g),
                     "poly": poly.format(coords.var_name)})
    field = induced_field(pi, alpha, weights)
    _emit(args, {"brackets": rows, "field": field.to_json()},
          lines + [f"field: {field}"])
    return EXIT_OK


def cmd_jacobi(args):
    q = _load_quiver(args.quiver)
    pi = normalize(_load_element(args.element, q))
    alpha = _ints(args.dim)
    field = induced_field(pi, alpha)
    residual = comm_schouten(field, field)
    ok = residual.is_zero()
    _emit(args, {"jacobi": ok, "residual_terms": len(residual.terms)},
          [f"jacobi: {ok}"])
    return EXIT_OK if ok else EXIT_FAIL


def cmd_hom_check(args):
    q = _load_quiver(args.quiver)
    g1 = normalize(_load_element(args.e1, q))
    g2 = normalize(_load_element(args.e2, q))
    alpha = _ints(args.dim)
    weights = _fractions(args.weights) if args.weights else None
    ok = bracket_homomorphism_check(
        g1, g2, alpha, weights, budget=args.budget, method=args.method,
        seed=args.seed)
    _emit(args, {"homomorphism": ok}, [f"homomorphism: {ok}"])
    return EXIT_OK if ok else EXIT_FAIL


def cmd_invariance(args):
    q = _load_quiver(args.quiver)
    gamma = normalize(_load_element(args.element, q))
    alpha = _ints(args.dim)
    field = induced_field(gamma, alpha)
    ok = invariance_check(field, samples=args.samples, seed=args.seed)
    _emit(args, {"invariant": ok}, [f"invariant: {ok}"])
    return EXIT_OK if ok else EXIT_FAIL


# -- contraction verbs -------------------------------------------------------

def _emit_contraction(args, out, res):
    qtext = quiver_to_text(res.quiver)
    payload = {"quiver": qtext, "element": out.to_json(),
               "expression": str(out)}
    lines = [qtext.rstrip(), f"element: {out}"]
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        qpath = os.path.join(args.out, "contracted.quiver")
        epath = os.path.join(args.out, "contracted.elem")
        with open(qpath, "w") as fh:
            fh.write(qtext)
        with open(epath, "w") as fh:
            fh.write(str(out) + "\n")
        lines.append(f"wrote {qpath} and {epath}")
        payload["files"] = [qpath, epath]
    _emit(args, payload, lines)


def cmd_contract(args):
    q = _load_quiver(args.quiver)
    pi = normalize(_load_element(args.element, q))
    out, res = contract_bivector(pi, plan_single(args.arrow, side=args.side))
    _emit_contraction(args, out, res)
    return EXIT_OK


def cmd_contract_multi(args):
    q = _load_quiver(args.quiver)
    pi = normalize(_load_element(args.element, q))
    eps = _fractions(args.eps) if args.eps else None
    plan = plan_multi(args.arrows.split(","), eps=eps)
    out, res = contract_bivector(pi, plan)
    _emit_contraction(args, out, res)
    return EXIT_OK


# -- numeric (leaf) verbs ----------------------------------------------------

def _leaf_rows_emit(args, name, rows, payload_extra, tolerance=None,
                    figure="residual", value_key="residual"):
    payload = {"point_seed": args.seed, "samples": rows, **payload_extra}
    lines = [f"{name}: " + json.dumps(payload_extra, default=str)]
    for row in rows:
        lines.append("  " + json.dumps(row, default=str))
    if args.report:
        fields = list(rows[0].keys()) if rows else ["sample"]
        csv_path = report.write_csv(args.report, name, fields, rows)
        if figure == "rank":
            fig_path = report.rank_figure(args.report, name, rows, title=name)
        else:
            fig_path = report.residual_figure(
                args.report, name, rows, value_key, tolerance, title=name)
        payload["report_files"] = [csv_path, fig_path]
        lines.append(f"wrote {csv_path} and {fig_path}")
    _emit(args, payload, lines)


def cmd_leaf_rank(args):
    rng = np.random.default_rng(args.seed)
    pi = leaves.family_structure(Fraction(args.eps).limit_denominator(10 ** 6))
    rows = []
    for i in range(args.samples):
        p = leaves.random_point(args.k, rng, invertible=("y",))
        B = leaves.bivector_at(pi, args.k, p)
        rows.append({"sample": i, "rank": leaves.leaf_rank(B),
                     "dimension": 2 * args.k * args.k,
                     "antisymmetry_defect": leaves.antisymmetry_defect(B)})
    full = all(r["rank"] == 2 * args.k * args.k for r in rows)
    _leaf_rows_emit(args, "leaf-rank", rows,
                    {"k": args.k, "eps": args.eps, "generically_full": full},
                    figure="rank")
    return EXIT_OK if full else EXIT_FAIL


def cmd_leaf_symplectic(args):
    rng = np.random.default_rng(args.seed)
    rows = []
    worst = 0.0
    need = {"i": ("y",), "ii": ("x", "y"), "inverse-x": ("x",),
            "bb": ("x", "y")}[args.form]
    for i in range(args.samples):
        while True:
            p = leaves.random_point(args.k, rng, invertible=need)
            if args.form != "bb":
                break
            W = np.linalg.inv(p.Y) - args.eps * p.X
            sv = np.linalg.svd(W, compute_uv=False)
            if sv[-1] > 1e-3 * sv[0]:
                break
        residual, sign = leaves.symplectic_check(args.form, args.k, p,
                                                 eps=args.eps)
        worst = max(worst, residual)
        rows.append({"sample": i, "residual": residual, "sign": sign})
    ok = worst < args.tolerance
    _leaf_rows_emit(args, f"leaf-symplectic-{args.form}", rows,
                    {"k": args.k, "form": args.form, "eps": args.eps,
                     "max_residual": worst, "tolerance": args.tolerance,
                     "pass": ok},
                    tolerance=args.tolerance)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_leaf_flow_check(args):
    rng = np.random.default_rng(args.seed)
    rows = []
    ok = True
    for i in range(args.samples):
        while True:
            p = leaves.random_point(args.k, rng, invertible=("x", "y"))
            W = np.linalg.inv(p.Y) - args.eps * p.X
            sv = np.linalg.svd(W, compute_uv=False)
            if sv[-1] > 1e-3 * sv[0]:
                break
        group = leaves.flow_group_law_residual(args.eps / 3, args.eps / 7, p)
        push, direction = leaves.pushforward_residual(args.eps, args.k, p)
        r4 = leaves.lie_derivative_residual(1e-4, args.k, p)
        r5 = leaves.lie_derivative_residual(1e-5, args.k, p)
        ratio = r4 / r5 if r5 else float("inf")
        row_ok = (group < 1e-10 and push < 1e-7 and 50 <= ratio <= 200)
        ok = ok and row_ok
        rows.append({"sample": i, "group_law_residual": group,
                     "pushforward_residual": push,
                     "transport_direction": direction,
                     "lie_residual_h4": r4, "lie_residual_h5": r5,
                     "convergence_ratio": ratio, "pass": row_ok})
    _leaf_rows_emit(args, "leaf-flow", rows,
                    {"k": args.k, "eps": args.eps, "pass": ok},
                    tolerance=1e-7, value_key="pushforward_residual")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_leaf_commute(args):
    rng = np.random.default_rng(args.seed)
    rows = []
    worst = 0.0
    controls = 0
    for i in range(args.samples):
        p = leaves.random_point(args.k, rng)
        w, control = leaves.hamiltonian_commutation(args.k, p)
        worst = max(worst, w)
        controls += control > 1e-3
        rows.append({"sample": i, "max_bracket": w,
                     "control_bracket": control})
    ok = worst < 1e-10 and controls >= int(0.8 * args.samples)
    _leaf_rows_emit(args, "leaf-commute", rows,
                    {"k": args.k, "max_bracket": worst,
                     "controls_nonzero": controls, "pass": ok},
                    tolerance=1e-10, value_key="max_bracket")
    return EXIT_OK if ok else EXIT_FAIL


# -- parser ------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="quiverpoisson",
        description="Exact necklace-algebra calculus for quivers, with "
                    "numeric verification of the two-matrix geometry.")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for all randomized checks")
    parser.add_argument("--format", choices=("text", "json"), default="text")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **kwargs):
        sp = sub.add_parser(name, **kwargs)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("normalize", cmd_normalize, help="canonical necklace form")
    sp.add_argument("-q", "--quiver", required=True)
    sp.add_argument("-e", "--element", required=True)

    sp = add("bracket", cmd_bracket, help="Schouten bracket of two elements")
    sp.add_argument("-q", "--quiver", required=True)
    sp.add_argument("-e1", required=True)
    sp.add_argument("-e2", required=True)

    sp = add("is-poisson", cmd_is_poisson,
             help="does the grade-2 element bracket to zero with itself")
    sp.add_argument("-q", "--quiver", required=True)
    sp.add_argument("-e", "--element", required=True)

    sp = add("parts", cmd_parts, help="split into homogeneous parts")
    sp.add_argument("-q", "--quiver", required=True)
    sp.add_argument("-e", "--element", required=True)

    sp = add("h0-bracket", cmd_h0_bracket,
             help="induced bracket on cyclic functions")
    sp.add_argument("-q", "--quiver", required=True)
    sp.add_argument("--pi", required=True)
    sp.add_argument("-f", required=True)
    sp.add_argument("-g", required=True)

    sp = add("double-bracket", cmd_double_bracket,
             help="generator-pair tensor of a grade-2 element")
    sp.add_argument("-q", "--quiver", required=True)
    sp.add_argument("--pi", required=True)
    sp.add_argument("-a", required=True)
    sp.add_argument("-b", required=True)

    ayb = sub.add_parser("ayb", help="associative Yang-Baxter machinery")
    ayb_sub = ayb.add_subparsers(dest="ayb_command", required=True)
    sp = ayb_sub.add_parser("aguiar", help="the matrix-algebra solution")
    sp.set_defaults(fn=cmd_ayb_aguiar)
    sp.add_argument("m", type=int)
    sp.add_argument("-q", "--quiver")
    sp = ayb_sub.add_parser("check", help="check an r-matrix file")
    sp.set_defaults(fn=cmd_ayb_check)
    sp.add_argument("rfile")
    sp.add_argument("-q", "--quiver", required=True)

    lin = sub.add_parser("linear", help="linear structures and algebras")
    lin_sub = lin.add_subparsers(dest="linear_command", required=True)
    sp = lin_sub.add_parser("to-algebra")
    sp.set_defaults(fn=cmd_linear_to_algebra)
    sp.add_argument("-q", "--quiver", required=True)
    sp.add_argument("-e", "--element", required=True)
    sp = lin_sub.add_parser("check")
    sp.set_defaults(fn=cmd_linear_check)
    sp.add_argument("-q", "--quiver", required=True)
    sp.add_argument("-e", "--element", required=True)

    sp = add("induce", cmd_induce,
             help="coordinate brackets and the induced field")
    sp.add_argument("-q", "--quiver", required=True)
    sp.add_argument("-e", "--element", required=True)
    sp.add_argument("--dim", required=True)
    sp.add_argument("--lambda", dest="weights", default=None,
                    help="trace weights, one per vertex")

    sp = add("jacobi", cmd_jacobi,
             help="check the induced field brackets to zero with itself")
    sp.add_argument("-q", "--quiver", required=True)
    sp.add_argument("-e", "--element", required=True)
    sp.add_argument("--dim", required=True)

    sp = add("hom-check", cmd_hom_check,
             help="trace map intertwines the two Schouten brackets")
    sp.add_argument("-q", "--quiver", required=True)
    sp.add_argument("-e1", required=True)
    sp.add_argument("-e2", required=True)
    sp.add_argument("--dim", required=True)
    sp.add_argument("--lambda", dest="weights", default=None)
    sp.add_argument("--budget", type=int, default=10 ** 6)
    sp.add_argument("--method", choices=("auto", "symbolic", "sampled"),
                    default="auto")

    sp = add("invariance", cmd_invariance,
             help="base-change invariance of an induced field")
    sp.add_argument("-q", "--quiver", required=True)
    sp.add_argument("-e", "--element", required=True)
    sp.add_argument("--dim", required=True)
    sp.add_argument("--samples", type=int, default=10)

    sp = add("contract", cmd_contract, help="single-arrow contraction")
    sp.add_argument("-q", "--quiver", required=True)
    sp.add_argument("-e", "--element", required=True)
    sp.add_argument("--arrow", required=True)
    sp.add_argument("--side", choices=("head", "tail"), default="head",
                    help="vertex whose group is gauged away")
    sp.add_argument("--out", help="directory for the emitted files")

    sp = add("contract-multi", cmd_contract_multi,
             help="contract several arrows sharing their head")
    sp.add_argument("-q", "--quiver", required=True)
    sp.add_argument("-e", "--element", required=True)
    sp.add_argument("--arrows", required=True, help="comma-separated names")
    sp.add_argument("--eps", default=None, help="comma-separated scalars")
    sp.add_argument("--out", help="directory for the emitted files")

    leaf = sub.add_parser("leaf", help="numeric two-matrix verification")
    leaf_sub = leaf.add_subparsers(dest="leaf_command", required=True)

    def add_leaf(name, fn, **kwargs):
        sp = leaf_sub.add_parser(name, **kwargs)
        sp.set_defaults(fn=fn)
        sp.add_argument("--k", type=int, default=2)
        sp.add_argument("--samples", type=int, default=10)
        sp.add_argument("--report", help="directory for CSV + figure output")
        return sp

    sp = add_leaf("rank", cmd_leaf_rank, help="bracket-matrix ranks")
    sp.add_argument("--eps", type=float, default=0.0)

    sp = add_leaf("symplectic", cmd_leaf_symplectic,
                  help="invert the displayed symplectic forms")
    sp.add_argument("--form", choices=("i", "ii", "inverse-x", "bb"),
                    required=True)
    sp.add_argument("--eps", type=float, default=1.0)
    sp.add_argument("--tolerance", type=float, default=1e-8)

    sp = add_leaf("flow-check", cmd_leaf_flow_check,
                  help="flow group law, pushforward, Lie-derivative order")
    sp.add_argument("--eps", type=float, default=1.0)

    add_leaf("commute", cmd_leaf_commute,
             help="trace powers Poisson-commute; negative control")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (QuiverError, ParseError, CliError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return getattr(exc, "code", EXIT_USAGE)


if __name__ == "__main__":
    sys.exit(main())
