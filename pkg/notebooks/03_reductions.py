"""
From 3-SAT to robust matchings and stable sets
==============================================

Build the gadget graphs for a small formula and check them against
exhaustive search.
"""
import random

from robustcommit.bipartite import (
    CnfFormula,
    brute_force_repairable_matching,
    brute_force_sat,
    random_3cnf,
    reduce_3sat_to_rbm,
    reduce_3sat_to_rwss,
    rwss_constants,
    stable_set_system,
)
from robustcommit.core import search_robust_at_least

rng = random.Random(3)
phi = random_3cnf(rng, 3, 4)
print("formula:", phi.clauses, "satisfiable:", brute_force_sat(phi) is not None)

red = reduce_3sat_to_rbm(phi)
g = red.graph
print("matching gadget:", g.n_vertices, "vertices,", len(g.edges), "edges")
m = brute_force_repairable_matching(g, cap=None)
print("repairable matching of size n+m:", m is not None and len(m) >= phi.n_vars + phi.m)

# every assignment of two variables, all 8 sign patterns on 3 literals
unsat = CnfFormula(3, [(s1 * 1, s2 * 2, s3 * 3) for s1 in (1, -1) for s2 in (1, -1) for s3 in (1, -1)])
for r in (2, None):
    red = reduce_3sat_to_rwss(unsat, r=r)
    system = stable_set_system(red.graph)
    found = search_robust_at_least(system, red.graph.weights, red.threshold)
    print(f"r={rwss_constants(3, 8, r)[0]}: threshold {red.threshold} reached: {found is not None}")
