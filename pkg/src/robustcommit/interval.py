"""Robust interval scheduling.

Pipeline: classical weighted interval scheduling, interval scheduling with
colors (ISC), the per-lambda backup construction that reduces bounded-regret
interval scheduling to ISC, and the lambda sweep that solves the robust
problem.  Intervals are half-open ``[a, b)`` with integer endpoints.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Optional, Sequence

from .core import (
    BudgetExceeded,
    ConflictSystem,
    LambdaSolution,
    RobustCertificate,
    ValidationError,
    candidate_lambdas,
    regret,
    robust_value,
    to_fraction,
)

ISC_BRUTE_CAP = 20


@dataclass(frozen=True)
class Job:
    a: int
    b: int
    weight: Fraction
    id: int


def make_jobs(triples: Iterable[Sequence]) -> tuple[Job, ...]:
    """Build jobs from ``(a, b, weight)`` triples; ids follow input order."""
    jobs = []
    for i, t in enumerate(triples):
        if len(t) != 3:
            raise ValidationError(f"job {i}: expected [a, b, weight]")
        a, b, w = t
        if isinstance(a, bool) or isinstance(b, bool) or not isinstance(a, int) or not isinstance(b, int):
            raise ValidationError(f"job {i}: endpoints must be integers")
        if a >= b:
            raise ValidationError(f"job {i}: empty interval [{a}, {b})")
        w = to_fraction(w)
        if w < 0:
            raise ValidationError(f"job {i}: negative weight {w}")
        jobs.append(Job(a, b, w, i))
    return tuple(jobs)


def overlaps(x: tuple[int, int], y: tuple[int, int]) -> bool:
    return x[0] < y[1] and y[0] < x[1]


def interval_system(jobs: Sequence[Job]) -> ConflictSystem:
    n = len(jobs)
    conflicts = []
    for i, p in enumerate(jobs):
        c = 0
        for j, q in enumerate(jobs):
            if i != j and p.a < q.b and q.a < p.b:
                c |= 1 << j
        conflicts.append(c)
    return ConflictSystem(n, conflicts, kind="intervals")


def job_weights(jobs: Sequence[Job]) -> tuple[Fraction, ...]:
    return tuple(j.weight for j in jobs)


def solve_is_dp(jobs: Sequence[Job]) -> tuple[Fraction, tuple[int, ...]]:
    """Maximum-weight set of pairwise disjoint jobs.

    Sweeps job end times in increasing order; the best value up to time t
    either ignores the jobs ending at t or takes one of them on top of the
    best value up to its start.
    """
    if not jobs:
        return Fraction(0), ()
    ends = sorted({j.b for j in jobs})
    by_end: dict[int, list[Job]] = {}
    for j in sorted(jobs, key=lambda j: j.id):
        by_end.setdefault(j.b, []).append(j)
    values = [Fraction(0)]
    chosen: list[tuple[int, ...]] = [()]
    for t in ends:
        best_v, best_s = values[-1], chosen[-1]
        for j in by_end[t]:
            k = bisect_right(ends, j.a, 0, len(values) - 1)
            v = values[k] + j.weight
            if v > best_v:
                best_v, best_s = v, chosen[k] + (j.id,)
        values.append(best_v)
        chosen.append(best_s)
    return values[-1], tuple(sorted(chosen[-1]))


# -- interval scheduling with colors -------------------------------------------

@dataclass(frozen=True)
class ColoredJob:
    """Red core ``red`` inside ``outer``; the rest of ``outer`` is blue.

    ``red`` is None for backup-only jobs, which consist of blue only.
    ``origin`` records where a job came from in the backup construction:
    ``("universal", j)``, ``("private", j, k)`` or ``("backup", j)``.
    """

    red: Optional[tuple[int, int]]
    outer: tuple[int, int]
    weight: Fraction
    lambda_value: Fraction = Fraction(0)
    origin: Optional[tuple] = field(default=None)

    def __post_init__(self):
        l, r = self.outer
        if not l < r:
            raise ValidationError(f"empty outer interval {self.outer}")
        if self.red is not None:
            a, b = self.red
            if not (l <= a < b <= r):
                raise ValidationError(f"red {self.red} must lie inside outer {self.outer}")
        if self.weight < 0:
            raise ValidationError("ISC weights must be nonnegative")


def colored(red, outer=None, weight=1, lambda_value=0, origin=None) -> ColoredJob:
    red = None if red is None else tuple(red)
    outer = tuple(red if outer is None else outer)
    return ColoredJob(red, outer, to_fraction(weight), to_fraction(lambda_value), origin)


def _isc_conflict(p: ColoredJob, q: ColoredJob) -> bool:
    return ((p.red is not None and overlaps(p.red, q.outer))
            or (q.red is not None and overlaps(q.red, p.outer)))


def isc_feasible(selection: Iterable[ColoredJob]) -> bool:
    """No red interval meets another selected job's red or blue part."""
    sel = list(selection)
    for i in range(len(sel)):
        for j in range(i + 1, len(sel)):
            if _isc_conflict(sel[i], sel[j]):
                return False
    return True


def _predecessor(grid: list, x) -> int:
    # grid[0] is a sentinel below every coordinate
    return bisect_right(grid, x, 1) - 1


def solve_isc_dp(jobs: Sequence[ColoredJob], literal_lookup: bool = False) -> tuple[Fraction, tuple[int, ...]]:
    """Maximum-weight ISC-feasible selection; returns (value, job indices).

    State (t_b, t_r) holds the best selection among jobs whose red part ends
    by t_b and whose outer interval ends by t_r.  Taking job j on top of a
    state requires every earlier job to end its red part by the start of
    j's outer interval and its outer interval by the start of j's red part,
    so the lookup is at (outer start, red start).  With ``literal_lookup``
    the lookup is at (red start, outer start) instead, which forbids some
    blue-blue overlaps and can only lose value.
    """
    for j in jobs:
        if j.red is None:
            raise ValidationError("backup-only jobs must be removed before running the ISC program")
    if not jobs:
        return Fraction(0), ()
    lo = min(j.outer[0] for j in jobs) - 1
    if literal_lookup:
        look_b = [j.red[0] for j in jobs]
        look_r = [j.outer[0] for j in jobs]
    else:
        look_b = [j.outer[0] for j in jobs]
        look_r = [j.red[0] for j in jobs]
    grid_b = [lo] + sorted({j.red[1] for j in jobs} | set(look_b))
    grid_r = [lo] + sorted({j.outer[1] for j in jobs} | set(look_r))
    pos_b = {t: i for i, t in enumerate(grid_b)}
    pos_r = {t: i for i, t in enumerate(grid_r)}
    by_b: dict[int, list[int]] = {}
    by_r: dict[int, list[int]] = {}
    for idx, j in enumerate(jobs):
        by_b.setdefault(pos_b[j.red[1]], []).append(idx)
        by_r.setdefault(pos_r[j.outer[1]], []).append(idx)
    lookup = [(_predecessor(grid_b, look_b[i]), _predecessor(grid_r, look_r[i])) for i in range(len(jobs))]

    nb, nr = len(grid_b), len(grid_r)
    zero = (Fraction(0), ())
    table = [[zero] * nr for _ in range(nb)]
    for ib in range(1, nb):
        row, prev = table[ib], table[ib - 1]
        row_jobs = by_b.get(ib, ())
        for ir in range(1, nr):
            best = prev[ir]
            if row[ir - 1][0] > best[0]:
                best = row[ir - 1]
            cands = [i for i in row_jobs if pos_r[jobs[i].outer[1]] <= ir]
            if not literal_lookup:
                cands += [i for i in by_r.get(ir, ()) if pos_b[jobs[i].red[1]] < ib]
            for i in cands:
                lb, lr = lookup[i]
                base = table[lb][lr]
                v = base[0] + jobs[i].weight
                if v > best[0]:
                    best = (v, base[1] + (i,))
            row[ir] = best
    value, sel = table[-1][-1]
    sel = tuple(sorted(sel))
    if not literal_lookup and not isc_feasible(jobs[i] for i in sel):
        raise AssertionError(f"ISC program produced an infeasible selection {sel}")
    return value, sel


def brute_force_isc(jobs: Sequence[ColoredJob], cap: Optional[int] = ISC_BRUTE_CAP) -> tuple[Fraction, tuple[int, ...]]:
    """Exhaustive ISC optimum: include/exclude every job, memoized on the candidate set."""
    n = len(jobs)
    if cap is not None and n > cap:
        raise BudgetExceeded(f"{n} ISC jobs exceed the brute-force cap of {cap}")
    conf = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if _isc_conflict(jobs[i], jobs[j]):
                conf[i] |= 1 << j
                conf[j] |= 1 << i

    @lru_cache(maxsize=None)
    def best(mask: int) -> tuple[Fraction, int]:
        if not mask:
            return Fraction(0), 0
        v = (mask & -mask).bit_length() - 1
        skip = best(mask & ~(1 << v))
        take_v, take_set = best(mask & ~(1 << v) & ~conf[v])
        take = (take_v + jobs[v].weight, take_set | 1 << v)
        return take if take[0] > skip[0] else skip

    value, chosen = best((1 << n) - 1)
    best.cache_clear()
    return value, tuple(i for i in range(n) if chosen >> i & 1)


# -- bounded regret via backups --------------------------------------------------

def build_isc_instance(jobs: Sequence[Job], u: Optional[int], bk: Optional[int], lam) -> list[ColoredJob]:
    """ISC jobs encoding first stages that use ``u`` as universal and ``bk`` as extra backup.

    ``u`` and ``bk`` are job ids or None.  Every other job appears once per
    possible backup: red-only with the universal backup, or with the blue
    span of a private backup.  Jobs whose regret value exceeds ``lam`` are
    dropped; the blue-only copies of ``u`` and ``bk`` are always kept.
    """
    lam = to_fraction(lam)
    w = {j.id: j.weight for j in jobs}
    by_id = {j.id: j for j in jobs}
    for x in (u, bk):
        if x is not None and x not in by_id:
            raise ValidationError(f"unknown job id {x}")
    if u is not None and u == bk:
        raise ValidationError("universal and extra backup must differ")
    w_u = w[u] if u is not None else Fraction(0)
    if u is not None and bk is not None and not (w_u >= w[bk] >= -lam):
        raise ValidationError("backups must satisfy w(u) >= w(bk) >= -lambda")
    reserved = {u, bk}
    rest = [j for j in jobs if j.id not in reserved]
    out = []
    for j in rest:
        lv = j.weight - w_u
        if lv <= lam:
            out.append(ColoredJob((j.a, j.b), (j.a, j.b), j.weight, lv, ("universal", j.id)))
    for j in rest:
        for k in rest:
            if j.id == k.id:
                continue
            lv = j.weight - k.weight
            if lv <= lam:
                outer = (min(j.a, k.a), max(j.b, k.b))
                out.append(ColoredJob((j.a, j.b), outer, j.weight, lv, ("private", j.id, k.id)))
    for x in (u, bk):
        if x is not None:
            job = by_id[x]
            out.append(ColoredJob(None, (job.a, job.b), Fraction(0), -w[x], ("backup", x)))
    return out


@dataclass(frozen=True)
class LambdaRisResult:
    value: Fraction
    first_stage: tuple[int, ...]
    universal: Optional[int]
    extra: Optional[int]
    backups: dict = field(compare=False)


def backup_pairs(jobs: Sequence[Job], lam) -> list[tuple[Optional[int], Optional[int]]]:
    """Universal/extra backup guesses worth trying for ``lam``.

    For lam >= 0 no extra backup is needed (a pair with one is dominated by
    the same universal backup alone).  For lam < 0 both must weigh at least
    -lam and the universal backup is the heavier one.
    """
    lam = to_fraction(lam)
    if lam >= 0:
        return [(None, None)] + [(j.id, None) for j in jobs]
    return [(p.id, q.id) for p in jobs for q in jobs
            if p.id != q.id and p.weight >= q.weight >= -lam]


def solve_lambda_ris(jobs: Sequence[Job], lam, *, literal_lookup: bool = False, verify: bool = True,
                     isc_hook: Optional[Callable] = None) -> Optional[LambdaRisResult]:
    """Maximum-weight first stage whose regret never exceeds ``lam``; None if none exists.

    ``isc_hook(isc_jobs, dp_result)`` is called for every ISC instance solved.
    """
    lam = to_fraction(lam)
    by_id = {j.id: j for j in jobs}
    best = None
    for u, bk in backup_pairs(jobs, lam):
        blocked = [(by_id[x].a, by_id[x].b) for x in (u, bk) if x is not None]
        isc = [c for c in build_isc_instance(jobs, u, bk, lam)
               if c.red is not None and not any(overlaps(c.red, z) for z in blocked)]
        value, sel = solve_isc_dp(isc, literal_lookup=literal_lookup)
        if isc_hook is not None:
            isc_hook(isc, (value, sel))
        if best is None or value > best[0]:
            best = (value, u, bk, [isc[i] for i in sel])
    if best is None:
        return None
    value, u, bk, picked = best
    backups = {}
    for c in picked:
        if c.origin[0] == "universal":
            backups[c.origin[1]] = u
        else:
            backups[c.origin[1]] = c.origin[2]
    first = tuple(sorted(backups))
    result = LambdaRisResult(value, first, u, bk, backups)
    if verify:
        _verify_regret(jobs, first, lam)
    return result


def _verify_regret(jobs, first, lam):
    system = interval_system(jobs)
    w = job_weights(jobs)
    for f in [None] + list(range(len(jobs))):
        d = regret(system, w, first, f).delta
        if d > lam:
            raise AssertionError(f"first stage {first} has regret {d} > {lam} when {f} is interdicted")


def solve_ris(jobs: Sequence[Job], *, literal_lookup: bool = False, prune: bool = False,
              on_lambda: Optional[Callable] = None, isc_hook: Optional[Callable] = None) -> RobustCertificate:
    """Optimal (1,1) robust first stage for interval scheduling.

    Solves the bounded-regret problem for every candidate regret value and
    keeps the one maximizing w_opt(lam) - lam (smallest lam on ties).
    ``prune`` skips values whose nominal optimum minus lam cannot beat the
    incumbent.  ``on_lambda(lam, result)`` observes every solved value.
    """
    jobs = tuple(jobs)
    for idx, j in enumerate(jobs):
        if j.id != idx:
            raise ValidationError("job ids must equal their positions")
    w = job_weights(jobs)
    nominal = solve_is_dp(jobs)[0] if prune else None
    best = None
    for lam in candidate_lambdas(w):
        if prune and best is not None and nominal - lam <= best[0]:
            continue
        res = solve_lambda_ris(jobs, lam, literal_lookup=literal_lookup, isc_hook=isc_hook)
        if on_lambda is not None:
            on_lambda(lam, res)
        if res is None:
            continue
        obj = res.value - lam
        if best is None or obj > best[0]:
            best = (obj, lam, res)
    obj, lam, res = best
    cert = robust_value(interval_system(jobs), w, res.first_stage)
    if not literal_lookup and cert.worst_case_value != obj:
        raise AssertionError(f"robust value {cert.worst_case_value} differs from sweep optimum {obj}")
    return RobustCertificate(cert.first_stage, cert.outcomes, cert.worst_case_value, 1, 1, lam,
                             {"backups": res.backups, "universal": res.universal, "extra": res.extra})


def lambda_solver(jobs: Sequence[Job], **kwargs) -> Callable[[Fraction], Optional[LambdaSolution]]:
    """Adapter so the interval solver plugs into :func:`core.solve_rp_via_lambda`."""
    def solve(lam):
        res = solve_lambda_ris(jobs, lam, **kwargs)
        return None if res is None else LambdaSolution(res.value, res.first_stage)
    return solve
