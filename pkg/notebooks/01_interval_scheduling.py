"""
Robust interval scheduling, step by step
========================================

Five jobs on a line. We commit to a set of pairwise disjoint jobs, an
adversary deletes one job, and we may add one job back afterwards.
"""
from robustcommit.core import brute_force_rp, robust_value
from robustcommit.interval import interval_system, make_jobs, solve_is_dp, solve_lambda_ris, solve_ris

jobs = make_jobs([[1, 3, 10], [2, 5, 8], [4, 7, 2], [6, 9, 8], [8, 10, 10]])
system = interval_system(jobs)
w = [j.weight for j in jobs]

# the nominal optimum ignores the adversary
print("nominal:", solve_is_dp(jobs))

# it is fragile: deleting [1,3) leaves no way to repair
cert = robust_value(system, w, [0, 2, 4])
print("robust value of the nominal optimum:", cert.worst_case_value)
for o in cert.outcomes:
    print("  interdict", o.interdicted, "->", o.value, "recourse", o.recourse)

# dropping [4,7) frees room for private backups
print("robust value of [1,3)+[8,10):", robust_value(system, w, [0, 4]).worst_case_value)

# the regret sweep: for each bound lam on the regret, the best first stage
for lam in (-1, 2, 10):
    res = solve_lambda_ris(jobs, lam)
    print(f"lambda={lam}: w_opt={res.value}, first stage={res.first_stage}, backups={res.backups}")

best = solve_ris(jobs)
print("sweep optimum:", best.worst_case_value, best.first_stage, "at lambda", best.lambda_star)
print("brute force:  ", brute_force_rp(system, w).worst_case_value)
