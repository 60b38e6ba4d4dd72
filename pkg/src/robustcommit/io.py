"""JSON instance and solution files, DIMACS input and seeded generators."""
from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional

from .bipartite import CnfFormula, Graph, matching_system, stable_set_system
from .core import (
    ExplicitSystem,
    FeasibilitySystem,
    RobustCertificate,
    ValidationError,
    as_weights,
    members,
    to_fraction,
    to_mask,
)
from .interval import interval_system, make_jobs
from .matroid import ExplicitMatroid, Graphic, Partition, Uniform

FORMAT_VERSION = 1

_KEYS = {
    "explicit": {"n", "maximal_sets", "feasible_sets", "weights"},
    "matroid": {"matroid", "weights"},
    "graph": {"n_vertices", "edges", "vertex_weights", "edge_weights", "bipartition", "family"},
    "intervals": {"jobs"},
}
_MATROID_KEYS = {
    "uniform": {"kind", "n", "rank"},
    "partition": {"kind", "blocks", "caps"},
    "graphic": {"kind", "n_vertices", "edges"},
    "explicit": {"kind", "n", "independent_sets"},
}


def fmt(q) -> Any:
    """Integral rationals as ints, others as ``"p/q"``."""
    q = Fraction(q)
    return q.numerator if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass
class Instance:
    type: str
    system: FeasibilitySystem
    weights: tuple
    data: dict = field(repr=False)
    jobs: Optional[tuple] = None
    graph: Optional[Graph] = None
    matroid: Any = None

    def to_dict(self) -> dict:
        return canonical(self.data)

    def __eq__(self, other):
        return isinstance(other, Instance) and self.to_dict() == other.to_dict()


def _require(cond, msg):
    if not cond:
        raise ValidationError(msg)


def _int(x, what):
    _require(isinstance(x, int) and not isinstance(x, bool), f"{what} must be an integer")
    return x


def _int_list(x, what):
    _require(isinstance(x, list), f"{what} must be a list")
    return [_int(v, what) for v in x]


def _check_keys(obj, allowed, where):
    _require(isinstance(obj, dict), f"{where} must be a JSON object")
    extra = sorted(set(obj) - allowed)
    _require(not extra, f"unknown field(s) in {where}: {', '.join(extra)}")


def _parse_matroid(spec):
    _require(isinstance(spec, dict) and "kind" in spec, "matroid needs a 'kind'")
    kind = spec["kind"]
    _require(kind in _MATROID_KEYS, f"unknown matroid kind {kind!r}")
    _check_keys(spec, _MATROID_KEYS[kind], f"{kind} matroid")
    try:
        if kind == "uniform":
            return Uniform(_int(spec["n"], "n"), _int(spec["rank"], "rank"))
        if kind == "partition":
            return Partition([_int_list(b, "block") for b in spec["blocks"]], _int_list(spec["caps"], "caps"))
        if kind == "graphic":
            edges = [_int_list(e, "edge") for e in spec["edges"]]
            _require(all(len(e) == 2 for e in edges), "edges must be vertex pairs")
            return Graphic(_int(spec["n_vertices"], "n_vertices"), edges)
        n = _int(spec["n"], "n")
        return ExplicitMatroid(n, [_int_list(s, "set") for s in spec["independent_sets"]])
    except KeyError as exc:
        raise ValidationError(f"{kind} matroid is missing field {exc.args[0]!r}") from None


def build_instance(data: dict) -> Instance:
    """Validate a decoded instance object."""
    _require(isinstance(data, dict), "instance must be a JSON object")
    _require(data.get("format_version") == FORMAT_VERSION, f"format_version must be {FORMAT_VERSION}")
    kind = data.get("type")
    _require(kind in _KEYS, f"type must be one of {sorted(_KEYS)}")
    body = {k: v for k, v in data.items() if k not in ("format_version", "type")}
    _check_keys(body, _KEYS[kind], f"{kind} instance")
    try:
        if kind == "explicit":
            n = _int(body["n"], "n")
            _require(("maximal_sets" in body) != ("feasible_sets" in body),
                     "give exactly one of maximal_sets and feasible_sets")
            if "maximal_sets" in body:
                system = ExplicitSystem(n, [_int_list(s, "set") for s in body["maximal_sets"]])
            else:
                sets = {to_mask(_int_list(s, "set"), n) for s in body["feasible_sets"]}
                system = ExplicitSystem(n, [members(m) for m in sets])
                _require(sets == set(system.feasible_sets()), "feasible_sets is not downward closed")
            weights = as_weights(body.get("weights", [1] * n), n)
            return Instance(kind, system, weights, data)
        if kind == "matroid":
            m = _parse_matroid(body["matroid"])
            weights = as_weights(body.get("weights", [1] * m.n), m.n)
            return Instance(kind, m, weights, data, matroid=m)
        if kind == "graph":
            n = _int(body["n_vertices"], "n_vertices")
            edges = [_int_list(e, "edge") for e in body["edges"]]
            _require(all(len(e) == 2 for e in edges), "edges must be vertex pairs")
            sides = body.get("bipartition")
            if sides is not None:
                sides = _int_list(sides, "bipartition")
            g = Graph(n, tuple(tuple(e) for e in edges), body.get("vertex_weights"), sides)
            family = body.get("family", "stable_sets")
            _require(family in ("stable_sets", "matchings"), "family must be stable_sets or matchings")
            if family == "stable_sets":
                _require("edge_weights" not in body, "edge_weights only apply to matchings")
                return Instance(kind, stable_set_system(g), g.vertex_weights(), data, graph=g)
            _require("vertex_weights" not in body, "vertex_weights only apply to stable_sets")
            weights = as_weights(body.get("edge_weights", [1] * len(g.edges)), len(g.edges))
            return Instance(kind, matching_system(g), weights, data, graph=g)
        jobs_raw = body["jobs"]
        _require(isinstance(jobs_raw, list), "jobs must be a list")
        jobs = make_jobs(jobs_raw)
        return Instance(kind, interval_system(jobs), tuple(j.weight for j in jobs), data, jobs=jobs)
    except KeyError as exc:
        raise ValidationError(f"{kind} instance is missing field {exc.args[0]!r}") from None
    except TypeError as exc:
        raise ValidationError(f"malformed {kind} instance: {exc}") from None


def parse_instance(text) -> Instance:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return build_instance(data)


def canonical(obj):
    """Normalize rationals so equal instances serialize identically."""
    if isinstance(obj, dict):
        return {k: canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    if isinstance(obj, Fraction):
        return fmt(obj)
    if isinstance(obj, str) and "/" in obj:
        try:
            return fmt(Fraction(obj))
        except (ValueError, ZeroDivisionError):
            return obj
    return obj


def dumps(obj) -> str:
    return json.dumps(canonical(obj), indent=2) + "\n"


def serialize_instance(inst: Instance) -> str:
    return dumps(inst.to_dict())


def instance_digest(inst: Instance) -> str:
    blob = json.dumps(inst.to_dict(), sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(blob.encode()).hexdigest()


# -- solutions ------------------------------------------------------------------

def solution_dict(inst: Instance, cert: RobustCertificate, solver: str, params: dict) -> dict:
    out = {"first_stage": list(cert.first_stage)}
    if inst.jobs is not None:
        out["first_stage_intervals"] = [[inst.jobs[i].a, inst.jobs[i].b] for i in cert.first_stage]
    out["robust_value"] = fmt(cert.worst_case_value)
    if cert.lambda_star is not None:
        out["lambda_star"] = fmt(cert.lambda_star)
    out["certificate"] = [
        {"interdicted": list(o.interdicted), "recourse": list(o.recourse), "value": fmt(o.value)}
        for o in cert.outcomes
    ]
    out["solver"] = {"name": solver, "params": params}
    out["instance_digest"] = instance_digest(inst)
    return out


def parse_solution(text) -> dict:
    """Decode a solution file, turning rational fields back into Fractions."""
    data = json.loads(text)
    data["robust_value"] = to_fraction(data["robust_value"])
    if "lambda_star" in data:
        data["lambda_star"] = to_fraction(data["lambda_star"])
    for row in data["certificate"]:
        row["value"] = to_fraction(row["value"])
    return data


# -- DIMACS -------------------------------------------------------------------------

def parse_dimacs_cnf(text) -> CnfFormula:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    header = None
    literals = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if header is not None or len(parts) != 4 or parts[1] != "cnf":
                raise ValidationError(f"line {lineno}: malformed header {line!r}")
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise ValidationError(f"line {lineno}: malformed header {line!r}") from None
            continue
        if header is None:
            raise ValidationError(f"line {lineno}: clause before the 'p cnf' header")
        try:
            literals += [int(t) for t in line.split()]
        except ValueError:
            raise ValidationError(f"line {lineno}: non-integer literal") from None
    if header is None:
        raise ValidationError("missing 'p cnf' header")
    clauses, cur = [], []
    for x in literals:
        if x == 0:
            clauses.append(tuple(cur))
            cur = []
        else:
            cur.append(x)
    if cur:
        raise ValidationError("last clause is not terminated by 0")
    n, m = header
    if len(clauses) != m:
        raise ValidationError(f"header announces {m} clauses, found {len(clauses)}")
    for c in clauses:
        if len(c) != 3:
            raise ValidationError(f"clause {list(c)} has arity {len(c)}, expected 3")
        if any(abs(x) > n for x in c):
            raise ValidationError(f"clause {list(c)} uses a variable above {n}")
    return CnfFormula(n, tuple(clauses))


def format_dimacs(phi: CnfFormula) -> str:
    lines = [f"p cnf {phi.n_vars} {phi.m}"] + [" ".join(map(str, c)) + " 0" for c in phi.clauses]
    return "\n".join(lines) + "\n"


# -- generators -------------------------------------------------------------------

GENERATOR_KINDS = ("intervals", "bipartite-graph", "uniform", "partition", "graphic", "explicit")


def generate_instance(kind: str, params: Optional[dict] = None, seed: int = 0) -> dict:
    """Random instance object, deterministic in (kind, params, seed)."""
    p = dict(params or {})
    rng = random.Random(seed)
    wmax = p.get("wmax", 20)
    n = p.get("n", 6)
    if n < 0 or wmax < 0:
        raise ValidationError("n and wmax must be nonnegative")

    def weights(k):
        return [rng.randint(0, wmax) for _ in range(k)]

    if kind == "intervals":
        horizon = p.get("horizon", 20)
        _require(horizon >= 1, "horizon must be at least 1")
        jobs = []
        for _ in range(n):
            a = rng.randint(0, horizon - 1)
            b = rng.randint(a + 1, horizon)
            jobs.append([a, b, rng.randint(0, wmax)])
        return {"format_version": 1, "type": "intervals", "jobs": jobs}
    if kind == "bipartite-graph":
        prob = Fraction(str(p.get("p", "0.5")))
        _require(0 <= prob <= 1, "p must lie in [0, 1]")
        sides = [rng.randint(0, 1) for _ in range(n)]
        edges = [[u, v] for u in range(n) for v in range(u + 1, n)
                 if sides[u] != sides[v] and rng.random() < prob]
        out = {"format_version": 1, "type": "graph", "n_vertices": n, "edges": edges, "bipartition": sides}
        if p.get("weighted"):
            out["vertex_weights"] = weights(n)
        return out
    if kind == "uniform":
        rank = p.get("rank", rng.randint(0, n))
        _require(0 <= rank <= n, "rank must lie in [0, n]")
        return {"format_version": 1, "type": "matroid",
                "matroid": {"kind": "uniform", "n": n, "rank": rank}, "weights": weights(n)}
    if kind == "partition":
        n_blocks = p.get("blocks", max(1, n // 2))
        _require(n == 0 or 1 <= n_blocks <= n, "blocks must lie in [1, n]")
        label = [i % n_blocks for i in range(n)]
        rng.shuffle(label)
        blocks = [[e for e in range(n) if label[e] == b] for b in range(n_blocks)]
        blocks = [b for b in blocks if b]
        caps = [rng.randint(0, len(b)) for b in blocks]
        return {"format_version": 1, "type": "matroid",
                "matroid": {"kind": "partition", "blocks": blocks, "caps": caps}, "weights": weights(n)}
    if kind == "graphic":
        prob = Fraction(str(p.get("p", "0.5")))
        edges = [[u, v] for u in range(n) for v in range(u + 1, n) if rng.random() < prob]
        return {"format_version": 1, "type": "matroid",
                "matroid": {"kind": "graphic", "n_vertices": n, "edges": edges}, "weights": weights(len(edges))}
    if kind == "explicit":
        _require(n <= 16, "explicit systems are limited to 16 elements")
        # random maximal antichain: add random sets that are incomparable with those chosen
        chosen = []
        for mask in rng.sample(range(1, 1 << n), (1 << n) - 1):
            if all(mask & c != mask and mask & c != c for c in chosen):
                chosen.append(mask)
        maxima = sorted(members(m) for m in chosen) or [()]
        return {"format_version": 1, "type": "explicit", "n": n,
                "maximal_sets": [list(s) for s in maxima], "weights": weights(n)}
    raise ValidationError(f"unknown generator kind {kind!r}; choose from {', '.join(GENERATOR_KINDS)}")


def load_cnf(path) -> CnfFormula:
    with open(path, "rb") as fh:
        return parse_dimacs_cnf(fh.read())


def load_instance(path) -> Instance:
    with open(path, "rb") as fh:
        return parse_instance(fh.read())

