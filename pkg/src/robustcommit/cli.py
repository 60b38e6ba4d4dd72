"""Command-line interface.

Every command prints one JSON document on stdout (or writes it to
``--out``).  Exit codes: 0 success, 2 invalid input, 3 instance too large
for an exhaustive routine, 1 anything else.  Errors are reported as a
single JSON line on stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import bipartite, core, interval, matroid
from .core import BudgetExceeded, ValidationError, members, to_fraction
from .io import (
    GENERATOR_KINDS,
    dumps,
    fmt,
    generate_instance,
    load_cnf,
    load_instance,
    solution_dict,
)

WARN_JOBS = 25


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(f"usage: {message}")


def _elements(text):
    if text is None:
        raise ValidationError("--first-stage is required")
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise ValidationError(f"--first-stage must be comma-separated integers, got {text!r}") from None


def _need(inst, *types):
    if inst.type not in types:
        raise ValidationError(f"this command needs a {' or '.join(types)} instance, got {inst.type}")


def _params(args, *names):
    out = {}
    for name in names:
        v = getattr(args, name)
        if isinstance(v, Fraction):
            v = fmt(v)
        out[name] = v
    return out


def cmd_solve(args):
    inst = load_instance(args.instance)
    if args.problem == "rp":
        cert = core.brute_force_rp(inst.system, inst.weights, args.k, args.l)
        return solution_dict(inst, cert, "brute_force_rp", _params(args, "k", "l"))
    if args.problem == "rmb":
        _need(inst, "matroid", "explicit")
        if args.l != args.k:
            raise ValidationError("robust matroid basis uses the same k for interdiction and recourse")
        if inst.matroid is None and not matroid.is_matroid(inst.system):
            raise ValidationError("explicit system is not a matroid")
        cert = matroid.solve_kk_rmb(inst.system, inst.weights, args.k)
        return solution_dict(inst, cert, "greedy_basis", _params(args, "k"))
    if args.problem == "rbss":
        _need(inst, "graph")
        if inst.data.get("family", "stable_sets") != "stable_sets":
            raise ValidationError("rbss needs a stable_sets graph instance")
        if any(w != 1 for w in inst.weights):
            raise ValidationError("rbss solves the unit-weight problem; use 'solve rp' for weighted graphs")
        cert = bipartite.solve_unweighted_rbss(inst.graph)
        out = solution_dict(inst, cert, "pendant_matching", {})
        out["repairable"] = cert.extra["repairable"]
        return out
    _need(inst, "intervals")
    if len(inst.jobs) > WARN_JOBS:
        print(json.dumps({"warning": f"{len(inst.jobs)} jobs; the full sweep is slow, consider --prune"}),
              file=sys.stderr)
    if args.lam is not None:
        res = interval.solve_lambda_ris(inst.jobs, args.lam, literal_lookup=args.paper_literal_dp)
        out = {"lambda": fmt(args.lam), "feasible": res is not None}
        if res is not None:
            out.update({
                "w_opt": fmt(res.value),
                "first_stage": list(res.first_stage),
                "first_stage_intervals": [[inst.jobs[i].a, inst.jobs[i].b] for i in res.first_stage],
                "universal_backup": res.universal,
                "extra_backup": res.extra,
                "backups": [[j, res.backups[j]] for j in sorted(res.backups)],
            })
        return out
    cert = interval.solve_ris(inst.jobs, literal_lookup=args.paper_literal_dp, prune=args.prune)
    return solution_dict(inst, cert, "lambda_sweep", _params(args, "paper_literal_dp", "prune"))


def cmd_eval(args):
    inst = load_instance(args.instance)
    cert = core.robust_value(inst.system, inst.weights, _elements(args.first_stage), args.k, args.l)
    return solution_dict(inst, cert, "eval", _params(args, "k", "l"))


def _witness_json(w):
    return {"X": list(w.X), "Y": list(w.Y), "a": w.a, "b": w.b, "c": w.c}


def cmd_check(args):
    inst = load_instance(args.instance)
    if args.property == "matroid":
        _need(inst, "explicit", "matroid")
        wit = matroid.find_non_matroid_witness(inst.system)
        return {"is_matroid": wit is None, "witness": None if wit is None else _witness_json(wit)}
    _need(inst, "graph")
    g = inst.graph
    if args.property == "koenig-egervary":
        return {"koenig_egervary": bipartite.is_koenig_egervary(g), "bipartite": bipartite.is_bipartite(g)}
    s = bipartite.repairable_stable_set(g)
    return {"repairable": s is not None, "stable_set": None if s is None else list(s)}


def cmd_witness(args):
    inst = load_instance(args.instance)
    _need(inst, "explicit", "matroid")
    wit = matroid.find_non_matroid_witness(inst.system)
    if wit is None:
        return {"is_matroid": True, "witness": None}
    w = matroid.adversarial_weights(wit, inst.system.n)
    nominal = [list(members(m)) for m in matroid.nominal_optima(inst.system, w)]
    best = core.brute_force_rp(inst.system, w)
    return {
        "is_matroid": False,
        "witness": _witness_json(wit),
        "adversarial_weights": [fmt(x) for x in w],
        "nominal_optima": nominal,
        "nominal_robust_values": [fmt(core.robust_value(inst.system, w, s).worst_case_value) for s in nominal],
        "robust_optimum": fmt(best.worst_case_value),
        "robust_first_stage": list(best.first_stage),
    }


def cmd_reduce(args):
    phi = load_cnf(args.cnf)
    if args.reduction == "sat2rbm":
        red = bipartite.reduce_3sat_to_rbm(phi)
        g = red.graph
        inst = {"format_version": 1, "type": "graph", "n_vertices": g.n_vertices,
                "edges": [list(e) for e in g.edges], "bipartition": list(g.sides), "family": "matchings"}
        return {"instance": inst, "target_matching_size": phi.n_vars + phi.m,
                "vertex_labels": [red.labels[v] for v in range(g.n_vertices)],
                "edge_labels": [red.edge_labels[i] for i in range(len(g.edges))]}
    red = bipartite.reduce_3sat_to_rwss(phi, r=args.r)
    g = red.graph
    r, s, k = bipartite.rwss_constants(phi.n_vars, phi.m, args.r)
    inst = {"format_version": 1, "type": "graph", "n_vertices": g.n_vertices,
            "edges": [list(e) for e in g.edges], "vertex_weights": [fmt(x) for x in g.weights],
            "bipartition": list(g.sides)}
    return {"instance": inst, "threshold": fmt(red.threshold), "r": r, "s": s,
            "vertex_labels": [red.labels[v] for v in range(g.n_vertices)]}


def cmd_gen(args):
    params = {k: v for k, v in (("n", args.n), ("horizon", args.horizon), ("wmax", args.wmax),
                                ("p", args.p), ("rank", args.rank), ("blocks", args.blocks))
              if v is not None}
    if args.weighted:
        params["weighted"] = True
    return generate_instance(args.kind, params, args.seed)


def cmd_selftest(args):
    from .acceptance import run_all

    results = run_all(quick=args.quick, stream=sys.stderr)
    return {"passed": all(r.passed for r in results),
            "criteria": [{"number": r.number, "passed": r.passed, "detail": r.detail,
                          "seconds": round(r.seconds, 1)} for r in results]}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="robustcommit", description="Recoverable robust optimization with commitment.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, k=True):
        sp.add_argument("--out", help="write the JSON result to this file instead of stdout")
        if k:
            sp.add_argument("--k", type=int, default=1, help="number of interdicted elements")
            sp.add_argument("--l", type=int, default=None, help="number of recourse additions (default 1, or --k for rmb)")

    s = sub.add_parser("solve", help="solve a robust counterpart")
    s.add_argument("problem", choices=["rp", "rmb", "rbss", "ris"])
    s.add_argument("--instance", required=True)
    s.add_argument("--lambda", dest="lam", type=to_fraction, help="solve the bounded-regret problem for this value (ris)")
    s.add_argument("--paper-literal-dp", action="store_true", help="use the uncorrected ISC lookup (ris)")
    s.add_argument("--prune", action="store_true", help="skip regret values that cannot improve (ris)")
    common(s)
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("eval", help="robust value of a given first stage")
    e.add_argument("--instance", required=True)
    e.add_argument("--first-stage", required=True, help="comma-separated element ids")
    common(e)
    e.set_defaults(func=cmd_eval)

    c = sub.add_parser("check", help="structural checks")
    c.add_argument("property", choices=["matroid", "repairable-stable-set", "koenig-egervary"])
    c.add_argument("--instance", required=True)
    common(c, k=False)
    c.set_defaults(func=cmd_check)

    w = sub.add_parser("witness", help="non-matroid witness with adversarial weights")
    w.add_argument("what", choices=["non-matroid"])
    w.add_argument("--instance", required=True)
    common(w, k=False)
    w.set_defaults(func=cmd_witness)

    r = sub.add_parser("reduce", help="3-SAT reductions")
    r.add_argument("reduction", choices=["sat2rbm", "sat2rwss"])
    r.add_argument("--cnf", required=True, help="DIMACS file with 3-literal clauses")
    r.add_argument("--r", type=int, default=None, help="backup weight for sat2rwss (default n + 1)")
    common(r, k=False)
    r.set_defaults(func=cmd_reduce)

    g = sub.add_parser("gen", help="random instance")
    g.add_argument("kind", choices=GENERATOR_KINDS)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--n", type=int)
    g.add_argument("--horizon", type=int)
    g.add_argument("--wmax", type=int)
    g.add_argument("--p", type=str)
    g.add_argument("--rank", type=int)
    g.add_argument("--blocks", type=int)
    g.add_argument("--weighted", action="store_true")
    common(g, k=False)
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("selftest", help="run the acceptance battery")
    t.add_argument("--quick", action="store_true", help="smaller samples")
    common(t, k=False)
    t.set_defaults(func=cmd_selftest)
    return p


def _fail(kind, exc, code):
    print(json.dumps({"error": kind, "message": str(exc)}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if hasattr(args, "l") and args.l is None:
            args.l = args.k if getattr(args, "problem", None) == "rmb" else 1
        if getattr(args, "k", 1) < 0 or getattr(args, "l", 1) < 0:
            raise ValidationError("k and l must be nonnegative")
        result = args.func(args)
        text = dumps(result)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        if args.command == "selftest" and not result["passed"]:
            return 1
        return 0
    except ValidationError as exc:
        return _fail("validation", exc, 2)
    except (OSError, UnicodeDecodeError) as exc:
        return _fail("input", exc, 2)
    except BudgetExceeded as exc:
        return _fail("budget", exc, 3)
    except Exception as exc:  # noqa: BLE001 - last-resort report
        return _fail("internal", f"{type(exc).__name__}: {exc}", 1)


if __name__ == "__main__":
    sys.exit(main())
