"""
Matroids and what breaks without them
=====================================

On a matroid, the heaviest basis is also robust-optimal and every repair
is a single exchange. On a non-matroid, some weights make every nominal
optimum strictly worse than the robust optimum.
"""
from robustcommit.core import ExplicitSystem, brute_force_rp, members, robust_value
from robustcommit.matroid import (
    Graphic,
    adversarial_weights,
    best_exchange,
    find_non_matroid_witness,
    greedy_max_basis,
    is_matroid,
    nominal_optima,
    solve_kk_rmb,
)

# a 4-cycle with a chord, as a graphic matroid
g = Graphic(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)])
w = [5, 4, 3, 2, 6]
basis = greedy_max_basis(g, w)
print("heaviest spanning tree:", basis)
for f in basis:
    print("  delete", f, "-> repair with", best_exchange(g, w, basis, f))
cert = solve_kk_rmb(g, w, 1)
print("robust value:", cert.worst_case_value, "brute force:", brute_force_rp(g, w).worst_case_value)

# the smallest non-matroid: {a} or {b, c}
abc = ExplicitSystem(3, [[0], [1, 2]])
print("is matroid:", is_matroid(abc))
wit = find_non_matroid_witness(abc)
print("witness:", wit)
wa = adversarial_weights(wit, abc.n)
for s in nominal_optima(abc, wa):
    print("nominal optimum", members(s), "robust value", robust_value(abc, wa, s).worst_case_value)
best = brute_force_rp(abc, wa)
print("robust optimum", best.first_stage, best.worst_case_value)

# with the adversary limited to first-stage elements the picture changes
limited = brute_force_rp(abc, wa, interdict_outside=False)
print("adversary on first stage only:", limited.first_stage, limited.worst_case_value)
