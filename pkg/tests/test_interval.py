from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robustcommit.core import (
    BudgetExceeded,
    ValidationError,
    brute_force_lambda_rp,
    brute_force_rp,
    candidate_lambdas,
    max_regret,
    regret_profile,
    solve_rp_via_lambda,
)
from robustcommit.interval import (
    brute_force_isc,
    build_isc_instance,
    colored,
    interval_system,
    isc_feasible,
    job_weights,
    lambda_solver,
    make_jobs,
    solve_is_dp,
    solve_isc_dp,
    solve_lambda_ris,
    solve_ris,
)

JOBS = make_jobs([[1, 3, 10], [2, 5, 8], [4, 7, 2], [6, 9, 8], [8, 10, 10]])


def test_nominal_dp():
    assert solve_is_dp(JOBS) == (22, (0, 2, 4))
    assert solve_is_dp([]) == (0, ())
    assert solve_is_dp(make_jobs([[0, 2, 1], [1, 3, 5]])) == (5, (1,))
    # half-open intervals that touch are disjoint
    assert solve_is_dp(make_jobs([[1, 3, 1], [3, 5, 1]]))[0] == 2


def test_job_validation():
    with pytest.raises(ValidationError):
        make_jobs([[3, 3, 1]])
    with pytest.raises(ValidationError):
        make_jobs([[0, 1, -1]])
    with pytest.raises(ValidationError):
        colored((0, 3), (1, 4))


def test_isc_feasibility():
    blue_overlap = [colored((0, 2), (0, 4)), colored((5, 7), (3, 7))]
    assert isc_feasible(blue_overlap)
    assert not isc_feasible([colored((0, 3)), colored((2, 5))])
    assert not isc_feasible([colored((0, 2)), colored(None, (1, 4))])


def test_isc_dp_examples():
    two = [colored((0, 2), (0, 4), 1), colored((5, 7), (3, 7), 1)]
    assert solve_isc_dp(two)[0] == 2
    assert brute_force_isc(two)[0] == 2
    assert solve_isc_dp([colored((1, 4), (0, 6), 7)]) == (7, (0,))
    red_meets_blue = [colored((0, 2), (0, 4), 3), colored((3, 5), None, 3)]
    assert solve_isc_dp(red_meets_blue)[0] == 3
    assert brute_force_isc([]) == (0, ())


def test_uncorrected_lookup_misses_blue_overlap():
    # blues of the two jobs overlap on [3, 4); the uncorrected lookup forbids it
    jobs = [colored((1, 3), (1, 4), 1), colored((5, 7), (3, 7), 1)]
    assert solve_isc_dp(jobs)[0] == 2
    assert solve_isc_dp(jobs, literal_lookup=True)[0] == 1


def test_isc_brute_force_cap():
    with pytest.raises(BudgetExceeded):
        brute_force_isc([colored((i, i + 1)) for i in range(21)])


def test_build_isc_instance():
    isc = build_isc_instance(JOBS, None, None, 10)
    universal = [c for c in isc if c.origin[0] == "universal"]
    assert len(universal) == 5
    pairs = [c for c in isc if c.origin[0] == "private"]
    assert len(pairs) == 20  # no weight difference exceeds 10
    two = make_jobs([[1, 3, 10], [2, 5, 8]])
    isc = build_isc_instance(two, None, None, 2)
    # both universal copies exceed 2 (weights 10 and 8); both pair jobs stay
    assert [c.origin for c in isc] == [("private", 0, 1), ("private", 1, 0)]
    pair = isc[0]
    assert pair.red == (1, 3) and pair.outer == (1, 5) and pair.lambda_value == 2
    with pytest.raises(ValidationError):
        build_isc_instance(two, 1, 0, 0)


def test_backup_only_jobs_are_kept():
    isc = build_isc_instance(JOBS, 0, 1, -8)
    backups = [c for c in isc if c.origin[0] == "backup"]
    assert [c.origin for c in backups] == [("backup", 0), ("backup", 1)]
    assert all(c.red is None and c.weight == 0 for c in backups)


def test_lambda_ris_examples():
    res = solve_lambda_ris(JOBS, 2)
    assert res.value == 20 and res.first_stage == (0, 4)
    assert res.backups == {0: 1, 4: 3}
    assert solve_lambda_ris(JOBS, 10).value == 22
    assert solve_lambda_ris(JOBS, -1).value == 8
    assert solve_lambda_ris(JOBS, -11) is None


def test_ris_examples():
    cert = solve_ris(JOBS)
    assert cert.worst_case_value == 18 and cert.first_stage == (0, 4)
    assert cert.lambda_star == 2
    assert solve_ris(make_jobs([[0, 1, 5]])).worst_case_value == 0
    twins = make_jobs([[0, 2, 5], [0, 2, 5]])
    assert solve_ris(twins).worst_case_value == 5
    # committing to one twin ties with committing to nothing
    assert brute_force_rp(interval_system(twins), job_weights(twins)).first_stage == (0,)
    assert solve_ris([]).worst_case_value == 0


def test_pruned_sweep_agrees():
    assert solve_ris(JOBS, prune=True).worst_case_value == 18


def test_plugs_into_generic_sweep():
    cert = solve_rp_via_lambda(interval_system(JOBS), job_weights(JOBS), lambda_solver(JOBS))
    assert cert.worst_case_value == 18


# -- properties ---------------------------------------------------------------

jobs_strategy = st.lists(
    st.tuples(st.integers(0, 19), st.integers(1, 8), st.integers(0, 20)).map(lambda t: [t[0], t[0] + t[1], t[2]]),
    min_size=0, max_size=7,
).map(make_jobs)


@settings(max_examples=40, deadline=None)
@given(jobs_strategy)
def test_ris_equals_brute_force(jobs):
    system, w = interval_system(jobs), job_weights(jobs)
    cert = solve_ris(jobs)
    assert cert.worst_case_value == brute_force_rp(system, w).worst_case_value
    assert system.is_feasible(sum(1 << i for i in cert.first_stage))
    assert max_regret(system, w, cert.first_stage) <= cert.lambda_star


@settings(max_examples=30, deadline=None)
@given(jobs_strategy)
def test_lambda_ris_equals_brute_force(jobs):
    system, w = interval_system(jobs), job_weights(jobs)
    profile = regret_profile(system, w)
    prev = None
    for lam in candidate_lambdas(w):
        res = solve_lambda_ris(jobs, lam)
        ref = brute_force_lambda_rp(system, w, lam, profile=profile)
        assert (res is None) == (ref is None)
        if res is not None:
            assert res.value == ref.value
            if prev is not None:
                assert res.value >= prev
            prev = res.value


@settings(max_examples=60, deadline=None)
@given(jobs_strategy)
def test_nominal_dp_equals_brute_force(jobs):
    system, w = interval_system(jobs), job_weights(jobs)
    value, chosen = solve_is_dp(jobs)
    assert system.is_feasible(sum(1 << i for i in chosen))
    assert value == max(sum((w[i] for i in range(len(jobs)) if s >> i & 1), Fraction(0))
                        for s in system.feasible_sets())


colored_strategy = st.lists(
    st.tuples(st.integers(0, 12), st.integers(1, 4), st.integers(0, 3), st.integers(0, 3), st.integers(0, 9))
    .map(lambda t: colored((t[0], t[0] + t[1]), (t[0] - t[2], t[0] + t[1] + t[3]), t[4])),
    max_size=8,
)


@settings(max_examples=100, deadline=None)
@given(colored_strategy)
def test_isc_dp_on_synthetic_instances(jobs):
    value, sel = solve_isc_dp(jobs)
    assert isc_feasible(jobs[i] for i in sel)
    assert value == sum((jobs[i].weight for i in sel), Fraction(0))
    assert value == brute_force_isc(jobs)[0]
    literal, lsel = solve_isc_dp(jobs, literal_lookup=True)
    assert literal <= value and isc_feasible(jobs[i] for i in lsel)
