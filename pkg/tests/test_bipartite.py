from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robustcommit.bipartite import (
    CnfFormula,
    Graph,
    brute_force_repairable_matching,
    brute_force_repairable_stable_set,
    brute_force_sat,
    is_bipartite,
    is_koenig_egervary,
    is_repairable,
    matching_system,
    max_matching,
    max_stable_set_bipartite,
    min_vertex_cover_bipartite,
    reduce_3sat_to_rbm,
    reduce_3sat_to_rwss,
    repairable_stable_set,
    rwss_constants,
    solve_unweighted_rbss,
    stable_set_system,
)
from robustcommit.core import BudgetExceeded, ValidationError, brute_force_rp, search_robust_at_least

P4 = Graph(4, ((0, 1), (1, 2), (2, 3)))
C4 = Graph(4, ((0, 1), (1, 2), (2, 3), (0, 3)))
TRIANGLE = Graph(3, ((0, 1), (1, 2), (0, 2)))
ONE_CLAUSE = CnfFormula(3, ((1, 2, 3),))
UNSAT = CnfFormula(3, tuple((a, 2 * b, 3 * c) for a in (1, -1) for b in (1, -1) for c in (1, -1)))


def test_graph_validation():
    with pytest.raises(ValidationError):
        Graph(2, ((0, 0),))
    with pytest.raises(ValidationError):
        Graph(2, ((0, 1), (1, 0)))
    with pytest.raises(ValidationError):
        Graph(2, ((0, 1),), sides=(0, 0))


def test_matching_examples():
    assert max_matching(Graph(2, ((0, 1),))) == ((0, 1),)
    assert len(max_matching(P4)) == 2
    assert len(max_matching(reduce_3sat_to_rbm(ONE_CLAUSE).graph)) == 4
    with pytest.raises(ValidationError):
        max_matching(TRIANGLE)


def test_stable_set_examples():
    assert sorted(max_stable_set_bipartite(C4)) in ([0, 2], [1, 3])
    assert max_stable_set_bipartite(Graph(4, ((0, 1), (0, 2), (0, 3)))) == (1, 2, 3)
    assert max_stable_set_bipartite(Graph(5, ((0, 1), (1, 2), (2, 3), (3, 4)))) == (0, 2, 4)


def test_pendant_examples():
    assert repairable_stable_set(Graph(2, ((0, 1),))) == (0,)
    assert repairable_stable_set(C4) is None
    assert repairable_stable_set(P4) == (0, 3)
    assert brute_force_repairable_stable_set(C4) is None


def test_rbss_examples():
    cert = solve_unweighted_rbss(P4)
    assert cert.worst_case_value == 2 and cert.first_stage == (0, 3)
    assert solve_unweighted_rbss(C4).worst_case_value == 1
    assert solve_unweighted_rbss(Graph(3, ())).worst_case_value == 2


def test_koenig_egervary():
    assert is_koenig_egervary(C4)
    assert not is_koenig_egervary(TRIANGLE)
    # a pendant edge on a triangle raises the matching number to 2 = cover number
    assert is_koenig_egervary(Graph(4, ((0, 1), (1, 2), (0, 2), (2, 3))))
    with pytest.raises(BudgetExceeded):
        is_koenig_egervary(Graph(25, tuple((i, i + 1) for i in range(24)) + ((0, 2),)))


def test_cnf_validation():
    with pytest.raises(ValidationError):
        CnfFormula(3, ((1, 2),))
    with pytest.raises(ValidationError):
        CnfFormula(3, ((1, 1, 2),))
    with pytest.raises(ValidationError):
        CnfFormula(2, ((1, 2, 3),))


def test_sat_brute_force():
    assert brute_force_sat(ONE_CLAUSE) is not None
    assert brute_force_sat(UNSAT) is None


def test_rbm_reduction_shape():
    red = reduce_3sat_to_rbm(ONE_CLAUSE)
    g = red.graph
    assert g.n_vertices == 11 and len(g.edges) == 10
    assert is_bipartite(g)
    side = {red.labels[v]: g.sides[v] for v in range(g.n_vertices)}
    assert {side["a_1"], side["abar_2"], side["z_1"]} == {0}
    assert {side["b_1"], side["c_1"]} == {1}


def test_rbm_reduction_decisions():
    g = reduce_3sat_to_rbm(ONE_CLAUSE).graph
    m = brute_force_repairable_matching(g)
    assert m is not None and len(m) == 4
    assert is_repairable(matching_system(g), [g.edges.index(e) for e in m])
    assert brute_force_repairable_matching(reduce_3sat_to_rbm(UNSAT).graph, cap=None) is None
    assert brute_force_repairable_matching(Graph(2, ((0, 1),))) is None
    with pytest.raises(BudgetExceeded):
        brute_force_repairable_matching(reduce_3sat_to_rbm(UNSAT).graph)


def test_repairable_matching_on_short_path():
    # 3-edge path: the only maximum matching is perfect
    path = Graph(4, ((0, 1), (1, 2), (2, 3)))
    assert brute_force_repairable_matching(path) is None
    # a perfect matching leaves nothing exposed to repair with
    g = Graph(8, ((0, 1), (1, 2), (2, 3), (0, 3), (0, 4), (1, 5), (2, 6), (3, 7)))
    assert brute_force_repairable_matching(g) is None
    # on a 4-edge path the two end edges both reach the exposed middle vertex
    assert brute_force_repairable_matching(Graph(5, ((0, 1), (1, 2), (2, 3), (3, 4)))) == ((0, 1), (3, 4))


def test_rwss_constants():
    assert rwss_constants(3, 1, r=2) == (2, 25, 80)
    red = reduce_3sat_to_rwss(ONE_CLAUSE, r=2)
    assert red.threshold == 80 and red.graph.n_vertices == 5 * 3 + 4 * 1
    assert is_bipartite(red.graph)


def _rwss_yes(phi, r):
    red = reduce_3sat_to_rwss(phi, r=r)
    return search_robust_at_least(stable_set_system(red.graph), red.graph.weights, red.threshold) is not None


def test_rwss_backup_weight_two_is_unsound():
    # with r = 2 every literal vertex can join the first stage, so k is reached without a satisfying assignment
    assert _rwss_yes(UNSAT, 2)
    assert not _rwss_yes(UNSAT, None)
    assert _rwss_yes(ONE_CLAUSE, None)


# -- properties ---------------------------------------------------------------

@st.composite
def bipartite_graphs(draw, max_n=8):
    n = draw(st.integers(1, max_n))
    sides = draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    cand = [(u, v) for u, v in combinations(range(n), 2) if sides[u] != sides[v]]
    edges = draw(st.lists(st.sampled_from(cand), unique=True)) if cand else []
    return Graph(n, tuple(edges))


@settings(max_examples=80, deadline=None)
@given(bipartite_graphs())
def test_koenig_consistency(g):
    cover = min_vertex_cover_bipartite(g)
    stable = max_stable_set_bipartite(g)
    assert len(cover) + len(stable) == g.n_vertices
    assert len(cover) == len(max_matching(g))
    assert all(u in cover or v in cover for u, v in g.edges)
    assert stable_set_system(g).is_feasible(sum(1 << v for v in stable))


@settings(max_examples=80, deadline=None)
@given(bipartite_graphs())
def test_pendant_test_matches_brute_force(g):
    fast = repairable_stable_set(g)
    slow = brute_force_repairable_stable_set(g)
    assert (fast is None) == (slow is None)
    if fast is not None:
        assert len(fast) == len(slow) and is_repairable(stable_set_system(g), fast)
    unit = (1,) * g.n_vertices
    assert solve_unweighted_rbss(g).worst_case_value == brute_force_rp(stable_set_system(g), unit).worst_case_value


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 5), st.integers(1, 6), st.randoms(use_true_random=False))
def test_rbm_reduction_property(n, m, rnd):
    from robustcommit.bipartite import random_3cnf

    phi = random_3cnf(rnd, n, m)
    found = brute_force_repairable_matching(reduce_3sat_to_rbm(phi).graph, cap=None)
    assert (brute_force_sat(phi) is not None) == (found is not None and len(found) == n + m)


@settings(max_examples=80, deadline=None)
@given(bipartite_graphs(max_n=7))
def test_pruned_matching_search_matches_enumeration(g):
    system = matching_system(g)
    fam = system.feasible_sets()
    nu = max(bin(s).count("1") for s in fam)
    exists = any(bin(s).count("1") == nu and is_repairable(system, [i for i in range(system.n) if s >> i & 1])
                 for s in fam)
    found = brute_force_repairable_matching(g)
    assert (found is not None) == exists
    if found is not None:
        assert len(found) == nu
        assert is_repairable(system, [g.edges.index(e) for e in found])
