from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robustcommit.core import ExplicitSystem, ValidationError, brute_force_rp, members, to_mask, weight_of
from robustcommit.matroid import (
    ExplicitMatroid,
    Graphic,
    NonMatroidWitness,
    Partition,
    Uniform,
    adversarial_weights,
    best_exchange,
    exchange_policy,
    find_non_matroid_witness,
    greedy_max_basis,
    is_matroid,
    solve_kk_rmb,
    verify_witness,
)

TRIANGLE = Graphic(3, [(0, 1), (1, 2), (0, 2)])


def test_greedy_examples():
    assert greedy_max_basis(Uniform(3, 2), (5, 3, 1)) == (0, 1)
    assert greedy_max_basis(TRIANGLE, (4, 4, 1)) == (0, 1)
    assert greedy_max_basis(Partition([[0, 1], [2]], [1, 1]), (2, 9, 1)) == (1, 2)


def test_greedy_takes_negative_elements():
    assert greedy_max_basis(Uniform(3, 2), (5, -3, -1)) == (0, 2)


def test_best_exchange_examples():
    assert best_exchange(Uniform(3, 2), (5, 3, 1), (0, 1), 0) == 2
    path = Graphic(3, [(0, 1), (1, 2)])
    assert best_exchange(path, (1, 1), (0, 1), 0) is None
    assert best_exchange(path, (1, 1), (0, 1), 1) is None
    assert best_exchange(TRIANGLE, (4, 4, 1), (0, 1), 0) == 2


def test_best_exchange_rejects_bad_input():
    with pytest.raises(ValidationError):
        best_exchange(Uniform(3, 2), (5, 3, 1), (0,), 0)
    with pytest.raises(ValidationError):
        best_exchange(Uniform(3, 2), (5, 3, 1), (0, 1), 2)


def test_robust_basis_examples():
    cert = solve_kk_rmb(Uniform(3, 2), (5, 3, 1), 1)
    assert cert.first_stage == (0, 1) and cert.worst_case_value == 4
    assert solve_kk_rmb(Uniform(2, 1), (7, 7), 1).worst_case_value == 7
    assert solve_kk_rmb(TRIANGLE, (4, 4, 1), 1).worst_case_value == 5


def test_policy_repairs_one_by_one():
    added, final = exchange_policy(Uniform(4, 2), (5, 4, 3, 2), (0, 1), [0, 1])
    assert added == (2, 3) and final == (2, 3)


def test_rank_and_independence():
    assert TRIANGLE.rank() == 2
    assert Partition([[0, 1], [2]], [1, 0]).rank() == 1
    assert not TRIANGLE.is_independent([0, 1, 2])


def test_is_matroid_examples():
    assert not is_matroid(ExplicitSystem(3, [[0], [1, 2]]))
    assert is_matroid(ExplicitSystem(3, [[0, 1], [0, 2], [1, 2]]))
    indep = [members(s) for s in TRIANGLE.feasible_sets()]
    assert is_matroid(ExplicitSystem(3, indep))
    with pytest.raises(ValidationError):
        ExplicitMatroid(3, [[0], [1, 2]])


def test_witness_examples():
    wit = find_non_matroid_witness(ExplicitSystem(3, [[0], [1, 2]]))
    assert wit == NonMatroidWitness((0,), (1, 2), 0, 1, 2)
    assert find_non_matroid_witness(ExplicitSystem(3, [[0, 1], [0, 2], [1, 2]])) is None
    # edge pairs of a 4-cycle form a partition matroid ({0,2} and {1,3}, one each)
    assert find_non_matroid_witness(ExplicitSystem(4, [[0, 1], [1, 2], [2, 3], [0, 3]])) is None


def test_adversarial_weights():
    assert adversarial_weights(NonMatroidWitness((0,), (1, 2), 0, 1, 2), 3) == (3, 2, 2)
    w = adversarial_weights(NonMatroidWitness((4,), (0, 2), 4, 0, 2), 5)
    assert w == (2, 0, 2, 0, 3) and sum(w) == 7


# -- properties ---------------------------------------------------------------

@st.composite
def matroids(draw):
    kind = draw(st.sampled_from(["uniform", "partition", "graphic"]))
    if kind == "uniform":
        n = draw(st.integers(1, 6))
        return Uniform(n, draw(st.integers(0, n)))
    if kind == "partition":
        n = draw(st.integers(1, 6))
        labels = draw(st.lists(st.integers(0, 2), min_size=n, max_size=n))
        blocks = [[e for e in range(n) if labels[e] == b] for b in range(3)]
        blocks = [b for b in blocks if b]
        caps = [draw(st.integers(0, len(b))) for b in blocks]
        return Partition(blocks, caps)
    nv = draw(st.integers(2, 4))
    edges = draw(st.lists(st.sampled_from(list(combinations(range(nv), 2))), min_size=1, unique=True))
    return Graphic(nv, edges)


@settings(max_examples=60, deadline=None)
@given(matroids(), st.randoms(use_true_random=False))
def test_greedy_is_max_weight_basis(m, rnd):
    w = tuple(rnd.randint(-5, 9) for _ in range(m.n))
    b = greedy_max_basis(m, w)
    bases = m.maximal_sets()
    assert to_mask(b, m.n) in bases
    assert weight_of(w, to_mask(b, m.n)) == max(weight_of(w, s) for s in bases)


@settings(max_examples=40, deadline=None)
@given(matroids(), st.randoms(use_true_random=False))
def test_every_matroid_passes_exchange_check(m, rnd):
    assert is_matroid(m)
    assert find_non_matroid_witness(m) is None


@settings(max_examples=40, deadline=None)
@given(matroids(), st.randoms(use_true_random=False))
def test_greedy_robust_optimal(m, rnd):
    w = tuple(rnd.randint(0, 9) for _ in range(m.n))
    assert solve_kk_rmb(m, w, 1).worst_case_value == brute_force_rp(m, w).worst_case_value


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 5), st.randoms(use_true_random=False))
def test_witness_agrees_with_matroid_test(n, rnd):
    sets = [[e for e in range(n) if rnd.random() < 0.5] for _ in range(rnd.randint(1, 4))]
    system = ExplicitSystem(n, sets)
    wit = find_non_matroid_witness(system)
    assert (wit is None) == is_matroid(system)
    if wit is not None:
        assert verify_witness(system, wit)
