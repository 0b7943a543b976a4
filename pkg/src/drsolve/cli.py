"""Command line entry point: ``drsolve <verb> ...``.

Results go to stdout as JSON, certificates optionally to files, diagnostics to
stderr.  Exit status 0 means a verdict was produced, 1 a usage or input error,
2 a certificate that failed its own re-check.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import decision, forms, models, oracle
from .terms import Meet, ParseError, formula_to_term, parse_formula, parse_term, render

log = logging.getLogger("drsolve")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _dump(doc, path=None):
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def _emit(doc):
    sys.stdout.write(_dump(doc))


def _write_model(model, args):
    if getattr(args, "out", None) and model is not None:
        _dump(models.witness_to_json(model), args.out)
    if getattr(args, "dot", None) and model is not None:
        with open(args.dot, "w") as fh:
            fh.write(models.witness_to_dot(model))


def _term(text):
    return parse_term(text)


# ---------------------------------------------------------------- verbs

def cmd_decide(args):
    if args.sat is not None:
        v = decision.decide_sat(_term(args.sat), args.dim, trace=args.trace)
    elif args.valid is not None:
        v = decision.decide_valid(_term(args.valid), args.dim, trace=args.trace)
    else:
        s, t = args.eq
        v = decision.decide_eq(_term(s), _term(t), args.dim, trace=args.trace)
    doc = v.to_json(timing=args.timing)
    if not args.trace and "certificate" in doc and "trace" in doc["certificate"]:
        del doc["certificate"]
    _write_model(v.model, args)
    _emit(doc)
    return 0


def _load_form(path):
    with open(path) as fh:
        doc = json.load(fh)
    table = forms.forms_from_json(doc)
    if not table:
        raise ValueError("form file contains no forms")
    root = doc.get("root")
    if root is None:
        root = list(doc["forms"])[-1]
    if root not in table:
        raise ValueError(f"unknown root form {root!r}")
    return table[root]


def cmd_witness(args):
    if args.form:
        form = _load_form(args.form)
        model = models.build_witness(form)
    else:
        t = _term(args.term)
        v = decision.decide_sat(t, args.dim)
        if v.kind != "SAT":
            raise decision.DecisionError(f"term is unsatisfiable: {args.term}")
        model = v.model
    _write_model(model, args)
    if not args.out:
        _emit(models.witness_to_json(model))
    else:
        _emit({"points": len(model.points), "baseSize": len(model.base), "out": args.out})
    return 0


def cmd_split(args):
    t = _term(args.term)
    fa, fb = decision.split_forms(t, args.dim)
    a, b = forms.form_to_term(fa), forms.form_to_term(fb)
    table, ids = forms.forms_to_json([fa, fb])
    doc = {"input": render(t), "degree": fa.degree,
           "a": {"form": ids[0]}, "b": {"form": ids[1]}, "forms": table}
    if a.size < args.max_text and b.size < args.max_text:
        doc["a"]["term"] = render(a)
        doc["b"]["term"] = render(b)
    checks = {
        "aSat": decision.decide_sat(a, args.dim).kind,
        "bSat": decision.decide_sat(b, args.dim).kind,
        "disjoint": decision.decide_sat(Meet(a, b), args.dim).kind == "UNSAT",
    }
    doc["checks"] = checks
    if args.out:
        _dump(doc, args.out)
    _emit(doc)
    return 0


def cmd_zerodim(args):
    t = _term(args.term)
    z = decision.zero_dim_witness(t, args.dim)
    if z.trivial:
        doc = {"zeroDimensional": True, "indices": []}
    else:
        ids = z.model.point_ids()
        doc = {"zeroDimensional": False, "indices": z.indices, "point": ids[z.point],
               "witness": models.witness_to_json(z.model)}
    _write_model(z.model, args)
    _emit(doc)
    return 0


def _variables(text):
    names = [v for v in text.split(",") if v] if text not in ("", "-") else []
    for v in names:
        parse_term(v)
    return names


def cmd_forms(args):
    if args.count:
        size, n, k = args.count
        _emit({"count": forms.count_forms(size, n, k)})
        return 0
    xs, n, k = args.enumerate
    found = forms.enumerate_forms(_variables(xs), int(n), int(k))
    table, ids = forms.forms_to_json(found)
    doc = {"roots": ids, "consistent": [i for i, f in zip(ids, found) if forms.is_consistent(f)],
           "variables": table["variables"], "forms": table["forms"]}
    _emit(doc)
    return 0


def cmd_oracle(args):
    seed = oracle.default_seed() if args.seed is None else args.seed
    if args.check_axioms:
        units = list(oracle.enumerate_units(args.max_base, args.dim or 2))
        failures = 0
        for u in units:
            failures += len(oracle.check_axioms(u, seed=seed))
        _emit({"units": len(units), "failures": failures})
        return 0
    t = _term(args.sat)
    found = oracle.oracle_sat(t, args.max_base, args.max_v, args.dim, seed=seed)
    doc = {"found": found is not None, "maxBase": args.max_base, "maxV": args.max_v}
    if found is not None:
        doc["points"] = [list(p) for p in found.unit.points]
        doc["ev"] = {x: sorted(list(p) for p in ps) for x, ps in sorted(found.ev.items())}
        doc["point"] = list(found.point)
    _emit(doc)
    return 0


def cmd_gam(args):
    if args.valid is not None:
        f = parse_formula(args.valid)
        v = decision.decide_valid(formula_to_term(f), args.dim)
        doc = v.to_json()
        doc["term"] = render(formula_to_term(f))
        _write_model(v.model, args)
        _emit(doc)
        return 0
    path, text = args.eval
    with open(path) as fh:
        model = oracle.GamModel.from_json(json.load(fh))
    f = parse_formula(text)
    rows = [{"assignment": list(s), "value": oracle.gam_eval(model, f, s)}
            for s in model.assignments]
    _emit({"formula": render(f), "values": rows, "coherent": oracle.gam_coherent(model, f)})
    return 0


# ---------------------------------------------------------------- parser

def build_parser():
    p = _Parser(prog="drsolve", description="Relativized diagonal-free set algebra toolkit.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    d = sub.add_parser("decide", help="satisfiability, validity or equality")
    g = d.add_mutually_exclusive_group(required=True)
    g.add_argument("--sat", metavar="TERM")
    g.add_argument("--valid", metavar="TERM")
    g.add_argument("--eq", nargs=2, metavar=("S", "T"))
    d.add_argument("--dim", type=int)
    d.add_argument("--trace", action="store_true", help="include the closed labels of an UNSAT run")
    d.add_argument("--timing", action="store_true", help="report wall-clock milliseconds")
    d.add_argument("--out", help="write the witness JSON here")
    d.add_argument("--dot", help="write the witness as Graphviz DOT here")
    d.set_defaults(func=cmd_decide)

    w = sub.add_parser("witness", help="build a witness unit for a term or a form")
    w.add_argument("term", nargs="?")
    w.add_argument("--form", metavar="FILE", help="form table JSON; the root is 'root' or the last id")
    w.add_argument("--dim", type=int)
    w.add_argument("--out")
    w.add_argument("--dot")
    w.set_defaults(func=cmd_witness)

    s = sub.add_parser("split", help="two disjoint satisfiable terms below a term")
    s.add_argument("term")
    s.add_argument("--dim", type=int)
    s.add_argument("--out")
    s.add_argument("--max-text", type=int, default=5000,
                   help="omit term text for results larger than this")
    s.set_defaults(func=cmd_split)

    z = sub.add_parser("zerodim", help="index word showing a term is not zero-dimensional")
    z.add_argument("term")
    z.add_argument("--dim", type=int)
    z.add_argument("--out")
    z.add_argument("--dot")
    z.set_defaults(func=cmd_zerodim)

    f = sub.add_parser("forms", help="count or enumerate normal forms")
    g = f.add_mutually_exclusive_group(required=True)
    g.add_argument("--count", nargs=3, type=int, metavar=("SIZEX", "N", "K"))
    g.add_argument("--enumerate", nargs=3, metavar=("X", "N", "K"),
                   help="X is a comma separated variable list")
    f.set_defaults(func=cmd_forms)

    o = sub.add_parser("oracle", help="brute-force checks on small units")
    g = o.add_mutually_exclusive_group(required=True)
    g.add_argument("--check-axioms", action="store_true")
    g.add_argument("--sat", metavar="TERM")
    o.add_argument("--max-base", type=int, default=3)
    o.add_argument("--max-v", type=int, default=5)
    o.add_argument("--dim", type=int)
    o.add_argument("--seed", type=int)
    o.set_defaults(func=cmd_oracle)

    m = sub.add_parser("gam", help="first-order formulas over assignment sets")
    g = m.add_mutually_exclusive_group(required=True)
    g.add_argument("--valid", metavar="FORMULA")
    g.add_argument("--eval", nargs=2, metavar=("MODEL", "FORMULA"))
    m.add_argument("--dim", type=int)
    m.add_argument("--out")
    m.add_argument("--dot")
    m.set_defaults(func=cmd_gam)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(message)s", stream=sys.stderr)
        if args.verb == "witness" and not (args.term or args.form):
            raise UsageError("witness needs a term or --form")
        if getattr(args, "dim", None) is not None and args.dim < 2:
            raise UsageError("--dim must be at least 2")
        log.info("running %s", args.verb)
        return args.func(args)
    except UsageError as exc:
        print(f"drsolve: {exc}", file=sys.stderr)
        return 1
    except decision.CertificateError as exc:
        print(f"drsolve: certificate check failed: {exc}", file=sys.stderr)
        return 2
    except ParseError as exc:
        print(f"drsolve: parse error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, OSError) as exc:
        print(f"drsolve: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
