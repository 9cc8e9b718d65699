"""Command-line entry point.

Every subcommand is deterministic for fixed inputs and seed: identical
invocations produce byte-identical output.  ``--json`` switches any
subcommand to a machine-readable document carrying ``"schema":
"msort-kit/1"``.  Exit codes: 0 success/SAT, 1 UNSAT/refuted, 2
unknown-at-bound, 64 usage or input errors, 65 cap exceeded, 66 other
toolkit errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .arrangements import (
    arrangement_formula,
    count_arrangements,
    enumerate_arrangements,
)
from .combination import (
    GammaFragments,
    GammaSetup,
    TheorySolver,
    classify_fixture_solver,
    construct_gamma_fragment_model,
    gamma_fragments,
    minmods,
    polite_combine,
    shiny_combine,
    union_oracle,
)
from .errors import CapExceededError, MsortError, ParseError
from .ramsey import (
    Coloring,
    directed_ramsey_search,
    multi_ramsey_search,
    ramsey_number_bruteforce,
    ramsey_search,
    rstar_bound,
    rstarstar_bound,
)
from .semantics import (
    FiniteStructure,
    TheoryDef,
    check_sat,
    enumerate_models,
    enumerate_models_range,
    equivalent_up_to_size,
    satisfies,
)
from .syntax import (
    Signature,
    VariableSet,
    free_vars,
    parse_file,
    parse_formula,
    print_formula,
)
from .transforms import (
    SplitContext,
    is_gcnf,
    is_gdnf,
    skolemize,
    to_gcnf,
    to_gdnf,
    to_pnf,
)

SCHEMA = "msort-kit/1"

EXIT_OK = 0
EXIT_UNSAT = 1
EXIT_UNKNOWN = 2
EXIT_USAGE = 64
EXIT_CAP = 65
EXIT_ERROR = 66


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _global_cap(default: int = 100_000) -> int:
    raw = os.environ.get("MSORT_CAP")
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ParseError(f"MSORT_CAP must be an integer, got {raw!r}")


def _load_theory(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_file(fh.read())


def _structure_sexpr(A: FiniteStructure) -> str:
    parts = ["(structure"]
    for s in A.signature.sorts:
        elems = " ".join(str(e) for e in A.domains[s])
        parts.append(f"  (domain {s} ({elems}))")
    for fname in A.signature.functions:
        entries = []
        for args in sorted(A.functions[fname]):
            argstr = " ".join(str(a) for a in args)
            entries.append(f"(({argstr}) {A.functions[fname][args]})")
        parts.append(f"  (fun {fname} {' '.join(entries)})")
    for pname in A.signature.predicates:
        entries = " ".join(
            "(" + " ".join(str(a) for a in t) + ")" for t in sorted(A.predicates[pname])
        )
        parts.append(f"  (pred {pname} {entries})")
    parts.append(")")
    return "\n".join(parts)


def _structure_json(A: FiniteStructure) -> dict:
    return {
        "domains": {s: list(A.domains[s]) for s in A.signature.sorts},
        "functions": {
            f: [[list(args), val] for args, val in sorted(A.functions[f].items())]
            for f in A.signature.functions
        },
        "predicates": {
            p: [list(t) for t in sorted(A.predicates[p])] for p in A.signature.predicates
        },
    }


def _emit(args, payload: dict, text_lines):
    if args.json:
        print(json.dumps({"schema": SCHEMA, **payload}, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_parse(args) -> int:
    with open(args.file, "r", encoding="utf-8") as fh:
        parsed = parse_file(fh.read())
    sig = parsed.signature
    payload = {
        "sorts": list(sig.sorts),
        "functions": {f: [list(a), r] for f, (a, r) in sig.functions.items()},
        "predicates": {p: list(a) for p, a in sig.predicates.items()},
        "split": [list(b) for b in sig.split] if sig.split else None,
        "variables": dict(parsed.var_sorts),
        "axioms": [print_formula(ax) for ax in parsed.axioms],
    }
    lines = [
        f"sorts: {' '.join(sig.sorts) or '(none)'}",
        f"functions: {len(sig.functions)}",
        f"predicates: {len(sig.predicates)}",
        f"variables: {len(parsed.var_sorts)}",
        f"axioms: {len(parsed.axioms)}",
    ]
    if sig.split:
        lines.insert(1, "split: " + " ".join("(" + " ".join(b) + ")" for b in sig.split))
    _emit(args, payload, lines)
    return EXIT_OK


def _parse_sizes(spec: str) -> dict:
    out = {}
    for item in spec.split(","):
        item = item.strip()
        if not item:
            continue
        name, _, num = item.partition("=")
        if not num:
            raise ParseError(f"bad size entry {item!r}; expected SORT=N")
        out[name.strip()] = int(num)
    return out


def _cmd_models(args) -> int:
    parsed = _load_theory(args.theory)
    theory = TheoryDef(parsed.signature, parsed.axioms)
    if args.sizes:
        stream = enumerate_models(theory, _parse_sizes(args.sizes), up_to_iso=args.up_to_iso)
    elif args.bound:
        stream = enumerate_models_range(theory, args.bound, up_to_iso=args.up_to_iso)
    else:
        raise ParseError("models needs --sizes or --bound")
    found = []
    for A in stream:
        found.append(A)
        if args.limit and len(found) >= args.limit:
            break
    if args.json:
        print(json.dumps(
            {"schema": SCHEMA, "count": len(found), "models": [_structure_json(A) for A in found]},
            sort_keys=True,
        ))
    else:
        print(f"models: {len(found)}")
        for A in found:
            print(_structure_sexpr(A))
    return EXIT_OK


def _cmd_solve(args) -> int:
    parsed = _load_theory(args.theory)
    theory = TheoryDef(parsed.signature, parsed.axioms)
    phi = parse_formula(args.phi, parsed.signature, parsed.var_sorts)
    hit = check_sat(theory, phi, args.bound)
    if hit is None:
        _emit(args, {"status": "unsat-at-bound", "bound": args.bound}, ["unsat-at-bound"])
        return EXIT_UNSAT
    A, nu = hit
    payload = {"status": "sat", "assignment": {k: nu[k] for k in sorted(nu)},
               "model": _structure_json(A)}
    lines = ["sat"]
    if nu:
        lines.append("assignment: " + " ".join(f"{k}={nu[k]}" for k in sorted(nu)))
    lines.append(_structure_sexpr(A))
    _emit(args, payload, lines)
    return EXIT_OK


def _parse_vars(spec: str) -> VariableSet:
    by_sort = {}
    for group in spec.split():
        sort, _, names = group.partition(":")
        if not names:
            raise ParseError(f"bad variable group {group!r}; expected SORT:x,y")
        by_sort[sort] = [n.strip() for n in names.split(",") if n.strip()]
    return VariableSet(by_sort)


def _cmd_arrange(args) -> int:
    variables = _parse_vars(args.vars)
    if args.count:
        total = count_arrangements(variables)
        _emit(args, {"count": total}, [str(total)])
        return EXIT_OK
    rows = []
    for delta in enumerate_arrangements(variables):
        blocks = {
            sort: [list(b) for b in blocks] for sort, blocks in delta.blocks_by_sort
        }
        rows.append({"blocks": blocks, "formula": print_formula(arrangement_formula(delta))})
    lines = []
    for i, row in enumerate(rows):
        desc = "; ".join(
            f"{sort}:" + "|".join(",".join(b) for b in bl)
            for sort, bl in sorted(row["blocks"].items())
        )
        lines.append(f"[{i}] {desc}  {row['formula']}")
    _emit(args, {"count": len(rows), "arrangements": rows}, lines)
    return EXIT_OK


def _load_colorings(args, arities) -> list:
    src = args.coloring or "random:0"
    if src.startswith("random:"):
        seed = int(src.split(":", 1)[1])
        mode = "subsets" if args.mode == "classic" else "tuples"
        return [
            Coloring.random(n, args.k, seed + i, mode=mode)
            for i, n in enumerate(arities)
        ]
    with open(src, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    defs = doc["colorings"] if "colorings" in doc else [doc]
    if len(defs) != len(arities):
        raise ParseError(f"coloring file defines {len(defs)} colorings, need {len(arities)}")
    out = []
    for spec, n in zip(defs, arities):
        mapping = {}
        for key, color in spec["map"].items():
            tup = tuple(int(x) for x in key.split(",")) if key else ()
            mapping[tup] = color
        mode = "subsets" if args.mode == "classic" else "tuples"
        out.append(Coloring.from_map(mapping, n, mode, spec.get("colors", args.k)))
    return out


def _cmd_ramsey(args) -> int:
    arities = [int(x) for x in str(args.n).split(",") if x]
    if args.mode != "multi" and len(arities) != 1:
        raise ParseError("--n takes a single arity except in multi mode")
    if args.exact:
        if args.mode != "classic":
            raise ParseError("--exact applies to classic mode only")
        value = ramsey_number_bruteforce(args.k, arities[0], args.m)
        _emit(args, {"exact": value}, [str(value)])
        return EXIT_OK
    if args.ground is None:
        if args.mode == "classic":
            raise ParseError("classic search needs --ground")
        if args.mode == "directed":
            args.ground = rstar_bound(args.k, arities[0], args.m)
        else:
            args.ground = rstarstar_bound(args.k, tuple(arities), args.m)
    ground = range(args.ground)
    colorings = _load_colorings(args, arities)
    if args.mode == "classic":
        witness = ramsey_search(ground, colorings[0], args.m)
    elif args.mode == "directed":
        witness = directed_ramsey_search(ground, colorings[0], args.m)
    else:
        witness = multi_ramsey_search(ground, colorings, args.m)
    if witness is None:
        _emit(args, {"result": "refuted", "ground": args.ground}, ["refuted"])
        return EXIT_UNSAT
    _emit(
        args,
        {"result": "found", "ground": args.ground, "witness": list(witness)},
        ["found: " + " ".join(map(str, witness))],
    )
    return EXIT_OK


def _cmd_transform(args) -> int:
    parsed = _load_theory(args.theory)
    sig = parsed.signature
    phi = parse_formula(args.phi, sig, parsed.var_sorts)
    cap = _global_cap()
    if args.command == "pnf":
        out_sig, result = sig, to_pnf(phi)
    elif args.command == "skolemize":
        out_sig, result = skolemize(phi, sig)
    else:
        ctx = SplitContext(sig)
        if args.command == "gdnf":
            result = to_gdnf(phi, ctx, node_cap=cap)
            assert is_gdnf(result, ctx)
        else:
            result = to_gcnf(phi, ctx, node_cap=cap)
            assert is_gcnf(result, ctx)
        out_sig = sig
    payload = {"formula": print_formula(result)}
    lines = [print_formula(result)]
    new_functions = {f: v for f, v in out_sig.functions.items() if f not in sig.functions}
    if new_functions:
        decls = [
            f"(declare-fun {f} ({' '.join(a)}) {r})" for f, (a, r) in new_functions.items()
        ]
        payload["new_functions"] = decls
        lines.extend(decls)
    if args.verify:
        if args.command == "skolemize":
            from .semantics import satisfiable_profiles

            base = TheoryDef(sig, parsed.axioms)
            extended = TheoryDef(out_sig, parsed.axioms)
            same = satisfiable_profiles(base, phi, args.verify) == satisfiable_profiles(
                extended, result, args.verify
            )
            payload["verified"] = same
            lines.append(f"equisatisfiable up to size {args.verify}: {'yes' if same else 'NO'}")
        else:
            counter = equivalent_up_to_size(phi, result, sig, args.verify)
            payload["verified"] = counter is None
            lines.append(
                f"equivalent up to size {args.verify}: {'yes' if counter is None else 'NO'}"
            )
        if not payload["verified"]:
            _emit(args, payload, lines)
            return EXIT_ERROR
    _emit(args, payload, lines)
    return EXIT_OK


def _cmd_combine(args) -> int:
    p1 = _load_theory(args.t1)
    p2 = _load_theory(args.t2)
    t1 = classify_fixture_solver(TheoryDef(p1.signature, p1.axioms, tuple(p1.signature.sorts)), name="t1")
    t2 = classify_fixture_solver(TheoryDef(p2.signature, p2.axioms, tuple(p2.signature.sorts)), name="t2")
    phi1 = parse_formula(args.phi1, p1.signature, p1.var_sorts)
    phi2 = parse_formula(args.phi2, p2.signature, p2.var_sorts)
    if args.mode == "polite":
        result = polite_combine(t1, t2, phi1, phi2, args.bound)
    elif args.mode == "shiny":
        result = shiny_combine(t1, t2, phi1, phi2, args.bound)
    else:
        result = union_oracle(t1, t2, phi1, phi2, args.bound)
    payload = {"status": result.status, "mode": args.mode, "bound": args.bound}
    lines = [result.status]
    cert = result.certificate
    if cert is not None:
        payload["arrangement"] = print_formula(arrangement_formula(cert.arrangement))
        lines.append("arrangement: " + payload["arrangement"])
        if cert.min_sizes is not None:
            payload["min_sizes"] = list(cert.min_sizes)
            lines.append("min-sizes: " + " ".join(map(str, cert.min_sizes)))
    _emit(args, payload, lines)
    return result.exit_code


def _cmd_minmods(args) -> int:
    parsed = _load_theory(args.theory)
    theory = TheoryDef(parsed.signature, parsed.axioms)
    phi = parse_formula(args.phi, parsed.signature, parsed.var_sorts)
    sorts = [s.strip() for s in args.sorts.split(",") if s.strip()]
    tuples = minmods(theory, sorts, phi, args.bound)
    payload = {"sorts": sorts, "minimal": [list(t) for t in tuples]}
    lines = [" ".join(map(str, t)) for t in tuples] or ["(none)"]
    _emit(args, payload, lines)
    return EXIT_OK


def _cmd_gamma_demo(args) -> int:
    with open(args.setup, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    sig = parse_file(doc["signature"]).signature
    setup = GammaSetup(
        signature=sig,
        sorts=tuple(doc["sorts"]),
        ell=int(doc.get("ell", 0)),
        constants={k: tuple(v) for k, v in doc.get("constants", {}).items()},
        term_depth=int(doc.get("term_depth", 2)),
    )
    var_sorts = doc.get("vars", {})
    phi = parse_formula(doc.get("phi", "true"), sig, var_sorts)
    fragments = gamma_fragments(setup, phi, formula_cap=_global_cap(5000))
    payload = {
        "distinctness": len(fragments.distinctness),
        "pattern_equations": len(fragments.pattern_equations),
        "covering": len(fragments.covering),
    }
    lines = [
        f"fragments: {payload['distinctness']} distinctness, "
        f"{payload['pattern_equations']} pattern equations, "
        f"{payload['covering']} covering",
    ]
    if args.verify:
        base = classify_fixture_solver(TheoryDef(sig, ()))
        result = construct_gamma_fragment_model(setup, phi, fragments, base)
        payload["sizes"] = {s: result.sizes[s] for s in setup.sorts}
        payload["constants"] = {c: result.constant_interpretation[c]
                                for c in sorted(result.constant_interpretation)}
        payload["verified_formulas"] = result.formulas_verified
        lines.append("sizes: " + " ".join(f"{s}={result.sizes[s]}" for s in setup.sorts))
        lines.append(
            "constants: "
            + " ".join(
                f"{c}->{result.constant_interpretation[c]}"
                for c in sorted(result.constant_interpretation)
            )
        )
        lines.append(f"verified: {result.formulas_verified} formulas")
    _emit(args, payload, lines)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument wiring
# ---------------------------------------------------------------------------

def _build_parser() -> _Parser:
    parser = _Parser(prog="msort-kit", description=__doc__)
    parser.add_argument("--jobs", type=int, default=1, metavar="N",
                        help="parallelism hint for search subcommands (currently sequential)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a theory file and summarize it")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("models", help="enumerate bounded models of a theory")
    p.add_argument("--theory", required=True)
    p.add_argument("--sizes", help="exact sizes, e.g. S=2,T=3")
    p.add_argument("--bound", type=int, help="sweep all profiles up to this size")
    p.add_argument("--limit", type=int, default=0)
    p.add_argument("--up-to-iso", action="store_true")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("solve", help="bounded satisfiability with a witness")
    p.add_argument("--theory", required=True)
    p.add_argument("--phi", required=True)
    p.add_argument("--bound", type=int, required=True)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("arrange", help="enumerate arrangements of sorted variables")
    p.add_argument("--vars", required=True, help='e.g. "S1:x,y S2:u,v,w"')
    p.add_argument("--count", action="store_true")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("ramsey", help="witness searches and exact tiny Ramsey numbers")
    p.add_argument("--mode", choices=("classic", "directed", "multi"), required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", required=True, help="arity, or comma list in multi mode")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--ground", type=int)
    p.add_argument("--coloring", help="JSON file or random:SEED (default random:0)")
    p.add_argument("--exact", action="store_true",
                   help="compute the least ground size by brute force (classic)")
    p.add_argument("--json", action="store_true")

    for name in ("pnf", "skolemize", "gdnf", "gcnf"):
        p = sub.add_parser(name, help=f"apply the {name} transformation")
        p.add_argument("--theory", required=True)
        p.add_argument("--phi", required=True)
        p.add_argument("--verify", type=int, metavar="N",
                       help="check the result against the input on all structures up to size N")
        p.add_argument("--json", action="store_true")

    p = sub.add_parser("combine", help="bounded theory combination")
    p.add_argument("--mode", choices=("polite", "shiny", "oracle"), required=True)
    p.add_argument("--t1", required=True)
    p.add_argument("--t2", required=True)
    p.add_argument("--phi1", required=True)
    p.add_argument("--phi2", required=True)
    p.add_argument("--bound", type=int, required=True)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("minmods", help="minimal designated-sort sizes of bounded models")
    p.add_argument("--theory", required=True)
    p.add_argument("--phi", required=True)
    p.add_argument("--sorts", required=True, help="comma-separated sort list")
    p.add_argument("--bound", type=int, required=True)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("gamma-demo", help="constant-fragment construction demo")
    p.add_argument("--setup", required=True, help="JSON setup file")
    p.add_argument("--verify", action="store_true")
    p.add_argument("--json", action="store_true")

    return parser


_DISPATCH = {
    "parse": _cmd_parse,
    "models": _cmd_models,
    "solve": _cmd_solve,
    "arrange": _cmd_arrange,
    "ramsey": _cmd_ramsey,
    "pnf": _cmd_transform,
    "skolemize": _cmd_transform,
    "gdnf": _cmd_transform,
    "gcnf": _cmd_transform,
    "combine": _cmd_combine,
    "minmods": _cmd_minmods,
    "gamma-demo": _cmd_gamma_demo,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    try:
        return _DISPATCH[args.command](args)
    except ParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except CapExceededError as e:
        print(f"cap exceeded: {e}", file=sys.stderr)
        return EXIT_CAP
    except MsortError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
