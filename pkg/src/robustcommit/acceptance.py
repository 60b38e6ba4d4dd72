"""Acceptance battery shared by ``robustcommit selftest`` and the test suite.

Each ``criterion_N`` function returns a :class:`CriterionResult`; the
fast exact solvers are compared against exhaustive references on
enumerated or seeded random instances.
"""
from __future__ import annotations

import io as _stdio
import json
import os
import random
import subprocess
import sys
import tempfile
import time
from contextlib import redirect_stdout
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations

import networkx as nx

from . import bipartite as bp
from . import core, interval, matroid
from .core import members

PAPER_JOBS = [[1, 3, 10], [2, 5, 8], [4, 7, 2], [6, 9, 8], [8, 10, 10]]


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0
    failures: list = field(default_factory=list)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"criterion {self.number:>2} [{status}] {self.title}: {self.detail} ({self.seconds:.1f}s)"


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _run_cli(argv):
    from .cli import main

    buf = _stdio.StringIO()
    with redirect_stdout(buf):
        code = main(argv)
    return code, buf.getvalue()


# -- 1: worked example -------------------------------------------------------------

@_timed
def criterion_1() -> CriterionResult:
    jobs = interval.make_jobs(PAPER_JOBS)
    nominal = interval.solve_is_dp(jobs)
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "example.json")
        with open(path, "w") as fh:
            json.dump({"format_version": 1, "type": "intervals", "jobs": PAPER_JOBS}, fh)
        code_s, out_s = _run_cli(["solve", "ris", "--instance", path])
        code_e, out_e = _run_cli(["eval", "--instance", path, "--first-stage", "0,2,4"])
    sol, ev = json.loads(out_s), json.loads(out_e)
    checks = {
        "nominal 22": nominal == (Fraction(22), (0, 2, 4)),
        "solve ris 18": code_s == 0 and sol["robust_value"] == 18,
        "first stage {(1,3),(8,10)}": sol.get("first_stage_intervals") == [[1, 3], [8, 10]],
        "eval 12": code_e == 0 and ev["robust_value"] == 12,
    }
    bad = [k for k, ok in checks.items() if not ok]
    detail = "nominal 22, robust 18 via [1,3)+[8,10), eval 12" if not bad else "failed: " + ", ".join(bad)
    return CriterionResult(1, "worked interval example", not bad, detail, failures=bad)


# -- 2, 3: matroid battery ------------------------------------------------------------

def matroid_battery(seed: int = 2024, n_partition: int = 20):
    """(name, matroid) pairs: uniform n <= 7, graphic on connected graphs <= 5 vertices, random partitions."""
    out = []
    for n in range(1, 8):
        for r in range(n + 1):
            out.append((f"U({r},{n})", matroid.Uniform(n, r)))
    for idx, G in enumerate(nx.graph_atlas_g()):
        if G.number_of_nodes() > 5:
            break
        if G.number_of_nodes() >= 2 and nx.is_connected(G):
            out.append((f"graphic atlas#{idx}", matroid.Graphic(G.number_of_nodes(), sorted(G.edges()))))
    rng = random.Random(seed)
    for i in range(n_partition):
        n = rng.randint(2, 7)
        nb = rng.randint(1, n)
        label = [j % nb for j in range(n)]
        rng.shuffle(label)
        blocks = [[e for e in range(n) if label[e] == b] for b in range(nb)]
        caps = [rng.randint(0, len(b)) for b in blocks]
        out.append((f"partition#{i} {blocks} caps {caps}", matroid.Partition(blocks, caps)))
    return out


def battery_weights(m, rng, count=5, wmax=9):
    return [tuple(rng.randint(0, wmax) for _ in range(m.n)) for _ in range(count)]


@_timed
def criterion_2(seed: int = 7) -> CriterionResult:
    battery = matroid_battery()
    rng = random.Random(seed)
    cases, failures = 0, []
    for name, m in battery:
        for w in battery_weights(m, rng):
            for k in (1, 2):
                got = matroid.solve_kk_rmb(m, w, k)
                ref = core.brute_force_rp(m, w, k, k)
                cases += 1
                if got.worst_case_value != ref.worst_case_value:
                    failures.append((name, w, k, got.worst_case_value, ref.worst_case_value))
                policy = got.extra.get("policy", ())
                if policy and min(o.value for o in policy) != got.worst_case_value:
                    failures.append((name, w, k, "exchange policy", min(o.value for o in policy)))
    ok = not failures and len(battery) >= 60
    detail = f"{len(battery)} matroids, {cases} (weights, k) cases, {len(failures)} mismatches"
    return CriterionResult(2, "greedy basis is robust-optimal", ok, detail, failures=failures[:10])


def _deletion_optimum(m, w, f):
    fam = [s for s in m.feasible_sets() if not s >> f & 1]
    look = set(fam)
    best = None
    for s in fam:
        if any(e != f and not s >> e & 1 and (s | 1 << e) in look for e in range(m.n)):
            continue
        v = core.weight_of(w, s)
        if best is None or v > best:
            best = v
    return best


@_timed
def criterion_3(seed: int = 7) -> CriterionResult:
    battery = matroid_battery()
    rng = random.Random(seed)
    triples, failures = 0, []
    for name, m in battery:
        for w in battery_weights(m, rng):
            w = core.as_weights(w)
            basis = matroid.greedy_max_basis(m, w)
            bmask = core.to_mask(basis, m.n)
            for f in basis:
                g = matroid.best_exchange(m, w, bmask, f)
                value = core.weight_of(w, bmask) - w[f] + (w[g] if g is not None else 0)
                ref = _deletion_optimum(m, w, f)
                triples += 1
                if value != ref:
                    failures.append((name, tuple(w), f, value, ref))
    detail = f"{triples} (matroid, basis, f) triples, {len(failures)} mismatches"
    return CriterionResult(3, "best exchange gives the optimal basis of the deletion", not failures, detail,
                           failures=failures[:10])


# -- 4: non-matroids ---------------------------------------------------------------------

def hereditary_systems(max_n: int = 4):
    """One ExplicitSystem per hereditary family on exactly n elements, up to relabeling."""
    for n in range(1, max_n + 1):
        perms = list(permutations(range(n)))
        seen = set()
        subsets = list(range(1 << n))
        for fam in range(1, 1 << len(subsets)):
            anti = [s for s in subsets if fam >> s & 1]
            if any(a != b and a & b == a for a in anti for b in anti):
                continue
            key = min(tuple(sorted(sum(1 << p[e] for e in members(s)) for s in anti)) for p in perms)
            if key in seen:
                continue
            seen.add(key)
            yield core.ExplicitSystem(n, [members(s) for s in key])


def non_matroid_check(system, interdict_outside=True):
    """None when the adversarial weights separate, else a description of the counterexample."""
    wit = matroid.find_non_matroid_witness(system)
    w = matroid.adversarial_weights(wit, system.n)
    best = core.brute_force_rp(system, w, interdict_outside=interdict_outside)
    nominal = matroid.nominal_optima(system, w)
    values = [core.robust_value(system, w, s, interdict_outside=interdict_outside).worst_case_value
              for s in nominal]
    if all(v < best.worst_case_value for v in values):
        return None
    return {
        "maximal_sets": [list(members(s)) for s in system.maximal_sets()],
        "witness": (wit.X, wit.Y, wit.a, wit.b, wit.c),
        "weights": [int(x) for x in w],
        "robust_optimum": str(best.worst_case_value),
        "robust_first_stage": list(best.first_stage),
        "nominal_optima": [list(members(s)) for s in nominal],
        "nominal_robust_values": [str(v) for v in values],
    }


@_timed
def criterion_4() -> CriterionResult:
    systems = [s for s in hereditary_systems(4) if not matroid.is_matroid(s)]
    failures = [c for c in (non_matroid_check(s) for s in systems) if c is not None]
    restricted = sum(non_matroid_check(s, interdict_outside=False) is not None for s in systems)
    detail = (f"{len(systems)} non-matroids, {len(failures)} counterexamples with the adversary on E; "
              f"{restricted} if the adversary is restricted to the first stage")
    if failures:
        detail += "; first counterexample: " + json.dumps(failures[0])
    return CriterionResult(4, "adversarial weights separate robust and nominal optima", not failures, detail,
                           failures=failures)


# -- 5: bipartite stable sets ---------------------------------------------------------------

def connected_bipartite_graphs(seed: int = 5, samples_8: int = 600):
    """All connected bipartite graphs on 2..7 vertices up to isomorphism, plus random 8-vertex ones."""
    for G in nx.graph_atlas_g():
        if G.number_of_nodes() > 7:
            break
        if G.number_of_nodes() >= 1 and nx.is_connected(G) and nx.is_bipartite(G):
            yield bp.Graph(G.number_of_nodes(), tuple(sorted(G.edges())))
    rng = random.Random(seed)
    produced = 0
    while produced < samples_8:
        sides = [rng.randint(0, 1) for _ in range(8)]
        if len(set(sides)) < 2:
            continue
        p = rng.uniform(0.15, 0.8)
        edges = [(u, v) for u in range(8) for v in range(u + 1, 8) if sides[u] != sides[v] and rng.random() < p]
        G = nx.Graph(edges)
        G.add_nodes_from(range(8))
        if not nx.is_connected(G):
            continue
        produced += 1
        yield bp.Graph(8, tuple(edges))


@_timed
def criterion_5(samples_8: int = 600) -> CriterionResult:
    graphs, failures = 0, []
    non_max_repairable = 0
    for g in connected_bipartite_graphs(samples_8=samples_8):
        graphs += 1
        fast = bp.repairable_stable_set(g)
        slow = bp.brute_force_repairable_stable_set(g)
        system = bp.stable_set_system(g)
        if (fast is None) != (slow is None):
            failures.append(("pendant test", g.n_vertices, g.edges, fast, slow))
        if fast is not None:
            alpha = len(slow)
            if len(fast) != alpha or not bp.is_repairable(system, fast) or not system.is_feasible(core.to_mask(fast, g.n_vertices)):
                failures.append(("returned set", g.n_vertices, g.edges, fast))
        unit = (1,) * g.n_vertices
        got = bp.solve_unweighted_rbss(g).worst_case_value
        ref = core.brute_force_rp(system, unit).worst_case_value
        if got != ref:
            failures.append(("value", g.n_vertices, g.edges, got, ref))
        if slow is None:
            alpha = max(bin(s).count("1") for s in system.feasible_sets())
            if any(0 < bin(s).count("1") < alpha and bp.is_repairable(system, members(s))
                   for s in system.feasible_sets()):
                non_max_repairable += 1
    detail = (f"{graphs} connected bipartite graphs, {len(failures)} mismatches; "
              f"{non_max_repairable} graphs without a repairable maximum stable set have a smaller repairable one")
    return CriterionResult(5, "pendant test and unit-weight robust stable set", not failures, detail,
                           failures=failures[:10])


# -- 6, 7: reductions ------------------------------------------------------------------------

def unsat_formula() -> bp.CnfFormula:
    """All eight sign patterns over three variables."""
    return bp.CnfFormula(3, tuple((a, 2 * b, 3 * c) for a in (1, -1) for b in (1, -1) for c in (1, -1)))


def random_formulas(rng, count, n_range, m_range):
    return [bp.random_3cnf(rng, rng.randint(*n_range), rng.randint(*m_range)) for _ in range(count)]


@_timed
def criterion_6(count: int = 120, seed: int = 6) -> CriterionResult:
    rng = random.Random(seed)
    formulas = random_formulas(rng, count, (3, 6), (1, 8)) + [unsat_formula()]
    failures, sat = [], 0
    for phi in formulas:
        is_sat = bp.brute_force_sat(phi) is not None
        sat += is_sat
        g = bp.reduce_3sat_to_rbm(phi).graph
        match = bp.brute_force_repairable_matching(g, cap=None)
        found = match is not None and len(match) == phi.n_vars + phi.m
        if is_sat != found:
            failures.append((phi.n_vars, phi.clauses, is_sat, match))
    detail = f"{len(formulas)} formulas ({sat} satisfiable), {len(failures)} mismatches"
    return CriterionResult(6, "SAT iff repairable matching of size m+n", not failures, detail, failures=failures)


def rwss_decision(phi, r):
    red = bp.reduce_3sat_to_rwss(phi, r=r)
    system = bp.stable_set_system(red.graph)
    return core.search_robust_at_least(system, red.graph.weights, red.threshold) is not None


@_timed
def criterion_7(count: int = 60, seed: int = 8) -> CriterionResult:
    rng = random.Random(seed)
    formulas = random_formulas(rng, count, (3, 4), (1, 5))
    failures, sat = [], 0
    for phi in formulas:
        is_sat = bp.brute_force_sat(phi) is not None
        sat += is_sat
        if rwss_decision(phi, r=2) != is_sat:
            failures.append((phi.n_vars, phi.clauses, is_sat))
    detail = f"{len(formulas)} formulas ({sat} satisfiable) with r=2, {len(failures)} mismatches"
    if sat == len(formulas):
        phi = unsat_formula()
        detail += (f"; note: every sampled formula is satisfiable, and on the 8-clause unsatisfiable formula"
                   f" r=2 answers {rwss_decision(phi, 2)} while r=n+1 answers {rwss_decision(phi, None)}")
    return CriterionResult(7, "SAT iff weighted robust stable set reaches k", not failures, detail,
                           failures=failures)


# -- 8, 9: interval pipeline --------------------------------------------------------------------

def random_interval_instance(rng, max_n=9, horizon=20, wmax=20):
    n = rng.randint(1, max_n)
    out = []
    for _ in range(n):
        a = rng.randint(0, horizon - 1)
        b = rng.randint(a + 1, horizon)
        out.append([a, b, rng.randint(0, wmax)])
    return out


@dataclass
class PipelineStats:
    instances: int = 0
    lambdas: int = 0
    isc_instances: int = 0
    isc_max_jobs: int = 0
    literal_disagreements: int = 0
    failures: list = field(default_factory=list)
    monotone_failures: list = field(default_factory=list)


def run_pipeline_battery(count: int = 300, seed: int = 11) -> PipelineStats:
    rng = random.Random(seed)
    stats = PipelineStats()
    isc_cache: dict = {}
    for _ in range(count):
        raw = random_interval_instance(rng)
        jobs = interval.make_jobs(raw)
        system = interval.interval_system(jobs)
        w = interval.job_weights(jobs)
        profile = core.regret_profile(system, w)
        sweep = []

        def on_isc(isc, result):
            key = tuple(isc)
            ref = isc_cache.get(key)
            if ref is None:
                ref = interval.brute_force_isc(isc, cap=None)[0]
                isc_cache[key] = ref
                stats.isc_instances += 1
                stats.isc_max_jobs = max(stats.isc_max_jobs, len(isc))
                if interval.solve_isc_dp(isc, literal_lookup=True)[0] != result[0]:
                    stats.literal_disagreements += 1
            if ref != result[0]:
                stats.failures.append(("isc", raw, [c.origin for c in isc], result[0], ref))

        def on_lambda(lam, res):
            ref = core.brute_force_lambda_rp(system, w, lam, profile=profile)
            sweep.append((lam, None if res is None else res.value))
            stats.lambdas += 1
            if (res is None) != (ref is None) or (res is not None and res.value != ref.value):
                stats.failures.append(("lambda", raw, str(lam), res and str(res.value), ref and str(ref.value)))

        cert = interval.solve_ris(jobs, on_lambda=on_lambda, isc_hook=on_isc)
        ref = core.brute_force_rp(system, w)
        stats.instances += 1
        if cert.worst_case_value != ref.worst_case_value:
            stats.failures.append(("ris", raw, str(cert.worst_case_value), str(ref.worst_case_value)))
        values = [v for _, v in sweep]
        for (l1, a), (l2, b) in zip(sweep, sweep[1:]):
            if a is not None and (b is None or b < a):
                stats.monotone_failures.append((raw, str(l1), str(l2), a and str(a), b and str(b)))
                break
    return stats


_PIPELINE_CACHE: dict = {}


def pipeline_stats(count: int = 300, seed: int = 11) -> PipelineStats:
    key = (count, seed)
    if key not in _PIPELINE_CACHE:
        _PIPELINE_CACHE[key] = run_pipeline_battery(count, seed)
    return _PIPELINE_CACHE[key]


@_timed
def criterion_8(count: int = 300) -> CriterionResult:
    t0 = time.perf_counter()
    s = pipeline_stats(count)
    elapsed = time.perf_counter() - t0
    ok = not s.failures and s.instances >= count and elapsed < 15 * 60
    detail = (f"{s.instances} instances, {s.lambdas} regret values, {s.isc_instances} distinct ISC instances "
              f"(up to {s.isc_max_jobs} jobs), {len(s.failures)} mismatches; uncorrected lookup differs on "
              f"{s.literal_disagreements}")
    return CriterionResult(8, "interval pipeline equals brute force", ok, detail, failures=s.failures[:10])


@_timed
def criterion_9(count: int = 300) -> CriterionResult:
    s = pipeline_stats(count)
    ok = not s.monotone_failures
    detail = f"{s.instances} sweeps, {len(s.monotone_failures)} decreases"
    return CriterionResult(9, "w_opt is nondecreasing in lambda", ok, detail, failures=s.monotone_failures)


# -- 10: determinism ---------------------------------------------------------------------------

def _write(path, text):
    with open(path, "w") as fh:
        fh.write(text)


@_timed
def criterion_10() -> CriterionResult:
    with tempfile.TemporaryDirectory() as tmp:
        fig = os.path.join(tmp, "fig.json")
        abc = os.path.join(tmp, "abc.json")
        gr = os.path.join(tmp, "graph.json")
        mat = os.path.join(tmp, "mat.json")
        cnf = os.path.join(tmp, "f.cnf")
        _write(fig, json.dumps({"format_version": 1, "type": "intervals", "jobs": PAPER_JOBS}))
        _write(abc, json.dumps({"format_version": 1, "type": "explicit", "n": 3,
                                "maximal_sets": [[0], [1, 2]], "weights": [3, 2, 2]}))
        _write(gr, json.dumps({"format_version": 1, "type": "graph", "n_vertices": 4,
                               "edges": [[0, 1], [1, 2], [2, 3]]}))
        _write(mat, json.dumps({"format_version": 1, "type": "matroid",
                                "matroid": {"kind": "graphic", "n_vertices": 3, "edges": [[0, 1], [1, 2], [0, 2]]},
                                "weights": [4, 4, 1]}))
        _write(cnf, "p cnf 3 2\n1 -2 3 0\n-1 2 -3 0\n")
        commands = [
            ["solve", "ris", "--instance", fig],
            ["solve", "ris", "--instance", fig, "--lambda", "2"],
            ["solve", "rp", "--instance", abc],
            ["eval", "--instance", fig, "--first-stage", "0,2,4"],
            ["solve", "rmb", "--instance", mat],
            ["solve", "rbss", "--instance", gr],
            ["check", "matroid", "--instance", abc],
            ["check", "repairable-stable-set", "--instance", gr],
            ["check", "koenig-egervary", "--instance", gr],
            ["witness", "non-matroid", "--instance", abc],
            ["reduce", "sat2rbm", "--cnf", cnf],
            ["reduce", "sat2rwss", "--cnf", cnf],
            ["gen", "intervals", "--n", "9", "--seed", "1"],
            ["gen", "explicit", "--n", "4", "--seed", "3"],
        ]
        failures = []
        for argv in commands:
            runs = []
            for _ in range(2):
                proc = subprocess.run([sys.executable, "-m", "robustcommit", *argv], capture_output=True)
                runs.append((proc.returncode, proc.stdout))
            if runs[0] != runs[1] or runs[0][0] != 0:
                failures.append((argv[:2], runs[0][0], runs[1][0]))
    detail = f"{len(commands)} commands run twice in fresh processes, {len(failures)} differ or fail"
    return CriterionResult(10, "CLI output is byte-identical across runs", not failures, detail, failures=failures)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def run_all(quick: bool = False, stream=None):
    results = []
    for fn in CRITERIA:
        if quick and fn is criterion_5:
            res = fn(samples_8=50)
        elif quick and fn in (criterion_8, criterion_9):
            res = fn(count=30)
        elif quick and fn is criterion_6:
            res = fn(count=20)
        elif quick and fn is criterion_7:
            res = fn(count=10)
        else:
            res = fn()
        results.append(res)
        if stream is not None:
            print(res.line(), file=stream, flush=True)
    return results
