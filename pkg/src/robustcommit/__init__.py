"""Recoverable robust combinatorial optimization with commitment.

A first-stage solution is chosen, an adversary removes an element, and the
solution may then be repaired by adding one element while keeping every
surviving first-stage element.  Solvers are provided for matroids,
stable sets and matchings in bipartite graphs, and interval scheduling,
each with an exhaustive reference implementation.
"""
from .core import (
    BudgetExceeded,
    ConflictSystem,
    ExplicitSystem,
    FeasibilitySystem,
    RobustCertificate,
    ValidationError,
    brute_force_lambda_rp,
    brute_force_rp,
    candidate_lambdas,
    regret,
    robust_value,
    solve_rp_via_lambda,
)

__version__ = "0.1.0"
