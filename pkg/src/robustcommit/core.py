"""Downward-closed set systems and exact evaluation of the commitment game.

Sets of ground-set elements are handled internally as integer bit-masks;
public functions accept any iterable of element indices and return sorted
tuples.  All arithmetic uses :class:`fractions.Fraction`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Callable, Iterable, Optional, Sequence

DEFAULT_BUDGET = 2_000_000
EXPLICIT_CAP = 16
STRUCTURED_CAP = 12


class ValidationError(ValueError):
    """Input violates a structural invariant."""


class BudgetExceeded(RuntimeError):
    """Instance is too large for an exhaustive routine."""


# -- masks and weights -------------------------------------------------------

def to_mask(elements: Iterable[int], n: int) -> int:
    mask = 0
    for e in elements:
        e = int(e)
        if not 0 <= e < n:
            raise ValidationError(f"element {e} out of range for ground set of size {n}")
        mask |= 1 << e
    return mask


def members(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def to_fraction(value) -> Fraction:
    """Exact conversion; floats are rejected, strings may be ``"p/q"``."""
    if isinstance(value, bool):
        raise ValidationError("booleans are not weights")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"not a rational: {value!r}") from exc
    raise ValidationError(f"weights must be integers or rational strings, got {type(value).__name__}")


def as_weights(values: Iterable, n: Optional[int] = None) -> tuple[Fraction, ...]:
    w = tuple(to_fraction(v) for v in values)
    if n is not None and len(w) != n:
        raise ValidationError(f"expected {n} weights, got {len(w)}")
    return w


def weight_of(weights: Sequence[Fraction], mask: int) -> Fraction:
    total = Fraction(0)
    for e in members(mask):
        total += weights[e]
    return total


# -- feasibility systems -----------------------------------------------------

class FeasibilitySystem:
    """A downward-closed family of subsets of ``range(n)``.

    Subclasses implement :meth:`is_feasible` on bit-masks.  Enumeration of
    the whole family relies on downward closure: every feasible set is
    reached by adding its elements in increasing order.
    """

    kind = "abstract"
    n: int

    def is_feasible(self, mask: int) -> bool:
        raise NotImplementedError

    def check_mask(self, mask: int) -> None:
        if mask < 0 or mask >> self.n:
            raise ValidationError(f"set {members(mask)} has elements outside 0..{self.n - 1}")

    def feasible_sets(self) -> tuple[int, ...]:
        cached = self.__dict__.get("_feasible_cache")
        if cached is None:
            found = []
            stack = [(0, 0)]
            while stack:
                mask, start = stack.pop()
                found.append(mask)
                for e in range(self.n - 1, start - 1, -1):
                    bigger = mask | (1 << e)
                    if self.is_feasible(bigger):
                        stack.append((bigger, e + 1))
            cached = tuple(sorted(found))
            self.__dict__["_feasible_cache"] = cached
        return cached

    def feasible_lookup(self) -> frozenset:
        cached = self.__dict__.get("_lookup_cache")
        if cached is None:
            cached = frozenset(self.feasible_sets())
            self.__dict__["_lookup_cache"] = cached
        return cached

    def maximal_sets(self) -> tuple[int, ...]:
        fam = self.feasible_lookup()
        return tuple(
            m for m in self.feasible_sets()
            if not any(not m >> e & 1 and (m | 1 << e) in fam for e in range(self.n))
        )


class ExplicitSystem(FeasibilitySystem):
    """Family given by its maximal sets; membership by subset test."""

    kind = "explicit"

    def __init__(self, n: int, maximal_sets: Iterable[Iterable[int]]):
        if n < 0:
            raise ValidationError("ground set size must be nonnegative")
        self.n = n
        masks = {to_mask(s, n) for s in maximal_sets} or {0}
        self.maxima = tuple(sorted(
            m for m in masks if not any(m != o and m & o == m for o in masks)
        ))

    def is_feasible(self, mask: int) -> bool:
        self.check_mask(mask)
        return any(mask & ~m == 0 for m in self.maxima)

    def maximal_sets(self) -> tuple[int, ...]:
        return self.maxima

    def __repr__(self) -> str:
        return f"ExplicitSystem(n={self.n}, maximal_sets={[list(members(m)) for m in self.maxima]})"


class ConflictSystem(FeasibilitySystem):
    """Sets containing no conflicting pair (stable sets of a conflict graph).

    Stable sets, matchings (edges conflict when they share an endpoint) and
    disjoint intervals are all of this form.
    """

    def __init__(self, n: int, conflicts: Sequence[int], kind: str = "conflict"):
        if len(conflicts) != n:
            raise ValidationError("one conflict mask per element is required")
        for e, c in enumerate(conflicts):
            if c >> e & 1:
                raise ValidationError(f"element {e} conflicts with itself")
            for o in members(c):
                if o >= n or not conflicts[o] >> e & 1:
                    raise ValidationError("conflict relation must be symmetric")
        self.n = n
        self.conflicts = tuple(conflicts)
        self.kind = kind

    def is_feasible(self, mask: int) -> bool:
        self.check_mask(mask)
        m = mask
        e = 0
        while m:
            if m & 1 and self.conflicts[e] & mask:
                return False
            m >>= 1
            e += 1
        return True


def is_feasible(system: FeasibilitySystem, elements: Iterable[int]) -> bool:
    return system.is_feasible(to_mask(elements, system.n))


def check_downward_closed(system: FeasibilitySystem, samples: Optional[Iterable[int]] = None) -> bool:
    """Every one-element deletion of a feasible set is feasible."""
    pool = system.feasible_sets() if samples is None else samples
    for m in pool:
        for e in members(m):
            if not system.is_feasible(m & ~(1 << e)):
                return False
    return True


# -- results ------------------------------------------------------------------

@dataclass(frozen=True)
class RegretReport:
    interdicted: Optional[int]
    delta: Fraction
    best_recourse: Optional[int]


@dataclass(frozen=True)
class Outcome:
    interdicted: tuple[int, ...]
    recourse: tuple[int, ...]
    second_stage: tuple[int, ...]
    value: Fraction


@dataclass(frozen=True)
class RobustCertificate:
    first_stage: tuple[int, ...]
    outcomes: tuple[Outcome, ...]
    worst_case_value: Fraction
    k: int = 1
    l: int = 1
    lambda_star: Optional[Fraction] = None
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def per_interdiction(self) -> dict[tuple[int, ...], Outcome]:
        return {o.interdicted: o for o in self.outcomes}

    @property
    def worst_case(self) -> Outcome:
        return min(self.outcomes, key=lambda o: o.value)


@dataclass(frozen=True)
class LambdaSolution:
    value: Fraction
    first_stage: tuple[int, ...]


# -- single-interdiction machinery -------------------------------------------

def _best_single(system, weights, s_mask, f):
    """Best recourse e for interdiction f (None = no interdiction).

    Returns ``(e, value)`` where ``e`` is None when adding nothing is at
    least as good as every addable element.
    """
    base = s_mask if f is None else s_mask & ~(1 << f)
    banned = s_mask if f is None else s_mask | (1 << f)
    best_e, best_gain = None, Fraction(0)
    for e in range(system.n):
        if banned >> e & 1:
            continue
        if weights[e] > best_gain and system.is_feasible(base | 1 << e):
            best_e, best_gain = e, weights[e]
    return best_e, weight_of(weights, base) + best_gain


def _conflict_table(system: ConflictSystem, weights, s_mask):
    """Addable elements of S grouped by the single element of S they conflict with."""
    free = []          # addable to S itself
    private = {}       # f in S -> best element addable only once f leaves
    for e in range(system.n):
        if s_mask >> e & 1:
            continue
        c = system.conflicts[e] & s_mask
        if c == 0:
            free.append(e)
        elif c & (c - 1) == 0:
            f = c.bit_length() - 1
            cur = private.get(f)
            if cur is None or weights[e] > weights[cur]:
                private[f] = e
    free.sort(key=lambda e: (-weights[e], e))
    return free, private


def _single_outcomes_conflict(system, weights, s_mask, interdictions):
    free, private = _conflict_table(system, weights, s_mask)
    w_s = weight_of(weights, s_mask)
    zero = Fraction(0)
    for f in interdictions:
        if f is None or not s_mask >> f & 1:
            cand = None
            for e in free:
                if e != f:
                    cand = e
                    break
            base = w_s
        else:
            cand = free[0] if free else None
            p = private.get(f)
            if p is not None and (cand is None or weights[p] > weights[cand]
                                  or (weights[p] == weights[cand] and p < cand)):
                cand = p
            base = w_s - weights[f]
        if cand is not None and weights[cand] <= zero:
            cand = None
        yield f, cand, base + (weights[cand] if cand is not None else zero)


def _single_outcomes(system, weights, s_mask, interdictions):
    if isinstance(system, ConflictSystem):
        yield from _single_outcomes_conflict(system, weights, s_mask, interdictions)
        return
    for f in interdictions:
        e, value = _best_single(system, weights, s_mask, f)
        yield f, e, value


def _interdiction_order(system, weights, s_mask, outside):
    inside = sorted(members(s_mask), key=lambda f: (-weights[f], f))
    order = [None] + inside
    if outside:
        order += [f for f in range(system.n) if not s_mask >> f & 1]
    return order


def _prepare(system, weights, first_stage):
    w = as_weights(weights, system.n)
    s_mask = first_stage if isinstance(first_stage, int) else to_mask(first_stage, system.n)
    if not system.is_feasible(s_mask):
        raise ValidationError(f"first stage {members(s_mask)} is not feasible")
    return w, s_mask


def regret(system: FeasibilitySystem, weights, first_stage, interdicted: Optional[int]) -> RegretReport:
    """Loss w(S) - w(S - f + e) under the best recourse e (None = no element)."""
    w, s_mask = _prepare(system, weights, first_stage)
    if interdicted is not None and not 0 <= interdicted < system.n:
        raise ValidationError(f"element {interdicted} out of range")
    ((_, e, value),) = tuple(_single_outcomes(system, w, s_mask, [interdicted]))
    return RegretReport(interdicted, weight_of(w, s_mask) - value, e)


def max_regret(system: FeasibilitySystem, weights, first_stage) -> Fraction:
    """max over f in E and the empty interdiction of the regret."""
    w, s_mask = _prepare(system, weights, first_stage)
    w_s = weight_of(w, s_mask)
    order = _interdiction_order(system, w, s_mask, True)
    return max(w_s - v for _, _, v in _single_outcomes(system, w, s_mask, order))


# -- the (k, l) game ----------------------------------------------------------

def _game_size(n, k, l, s_count, outside):
    pool = n if outside else s_count
    f_count = sum(comb(pool, i) for i in range(min(k, pool) + 1))
    r_count = sum(comb(n, j) for j in range(min(l, n) + 1))
    return f_count * r_count


def _inner_best(system, weights, s_mask, f_mask, l, lookup):
    base = s_mask & ~f_mask
    pool = [e for e in range(system.n) if not (s_mask | f_mask) >> e & 1]
    feasible = (lambda m: m in lookup) if lookup is not None else system.is_feasible
    best_r, best_v = (), weight_of(weights, base)
    for size in range(1, l + 1):
        for r in combinations(pool, size):
            m = base
            for e in r:
                m |= 1 << e
            if feasible(m):
                v = weight_of(weights, m)
                if v > best_v:
                    best_r, best_v = r, v
    return best_r, best_v


def _outcome(s_mask, f_tuple, r_tuple, value):
    second = s_mask
    for f in f_tuple:
        second &= ~(1 << f)
    for e in r_tuple:
        second |= 1 << e
    return Outcome(tuple(f_tuple), tuple(r_tuple), members(second), value)


def _general_outcomes(system, w, s_mask, k, l, outside):
    lookup = system.feasible_lookup() if system.n <= 20 else None
    pool = list(range(system.n)) if outside else list(members(s_mask))
    for size in range(0, k + 1):
        for f in combinations(pool, size):
            f_mask = 0
            for x in f:
                f_mask |= 1 << x
            r, v = _inner_best(system, w, s_mask, f_mask, l, lookup)
            yield _outcome(s_mask, f, r, v)


def robust_value(system: FeasibilitySystem, weights, first_stage, k: int = 1, l: int = 1, *,
                 interdict_outside: bool = True, budget: int = DEFAULT_BUDGET) -> RobustCertificate:
    """Worst case of interdicting up to ``k`` elements then adding up to ``l``.

    For ``k = l = 1`` the certificate lists every interdiction (including the
    empty one); otherwise only the worst-case outcome is kept.  With
    ``interdict_outside=False`` the adversary is restricted to elements of
    the first stage.
    """
    if k < 0 or l < 0:
        raise ValidationError("k and l must be nonnegative")
    w, s_mask = _prepare(system, weights, first_stage)
    first = members(s_mask)
    if k == 1 and l == 1:
        order = [None] + list(range(system.n) if interdict_outside else first)
        outcomes = []
        for f, e, v in _single_outcomes(system, w, s_mask, order):
            outcomes.append(_outcome(s_mask, () if f is None else (f,), () if e is None else (e,), v))
        worst = min(o.value for o in outcomes)
        return RobustCertificate(first, tuple(outcomes), worst, k, l)
    if _game_size(system.n, k, l, len(first), interdict_outside) > budget:
        raise BudgetExceeded(f"(k={k}, l={l}) game on {system.n} elements exceeds budget {budget}")
    worst = None
    for o in _general_outcomes(system, w, s_mask, k, l, interdict_outside):
        if worst is None or o.value < worst.value:
            worst = o
    return RobustCertificate(first, (worst,), worst.value, k, l)


def _robust_min(system, w, s_mask, k, l, outside, stop_below, inclusive=False):
    """Robust value of S, or any value already past ``stop_below`` once S is known to lose.

    With ``inclusive`` the search stops as soon as a value <= stop_below appears.
    """
    def done(v):
        return stop_below is not None and (v <= stop_below if inclusive else v < stop_below)

    if k == 1 and l == 1:
        order = _interdiction_order(system, w, s_mask, outside)
        best = None
        for _, _, v in _single_outcomes(system, w, s_mask, order):
            if best is None or v < best:
                best = v
                if done(v):
                    return v
        return best
    best = None
    lookup = system.feasible_lookup() if system.n <= 20 else None
    pool = list(range(system.n)) if outside else list(members(s_mask))
    for size in range(0, k + 1):
        for f in combinations(pool, size):
            f_mask = 0
            for x in f:
                f_mask |= 1 << x
            _, v = _inner_best(system, w, s_mask, f_mask, l, lookup)
            if best is None or v < best:
                best = v
                if done(v):
                    return v
    return best


def _default_cap(system):
    return STRUCTURED_CAP if isinstance(system, ConflictSystem) else EXPLICIT_CAP


def _check_cap(system, cap):
    cap = _default_cap(system) if cap is None else cap
    if system.n > cap:
        raise BudgetExceeded(f"{system.n} elements exceed the brute-force cap of {cap}")


def brute_force_rp(system: FeasibilitySystem, weights, k: int = 1, l: int = 1, *,
                   cap: Optional[int] = None, interdict_outside: bool = True,
                   budget: int = DEFAULT_BUDGET) -> RobustCertificate:
    """Exhaustive optimum of the (k, l) game over all feasible first stages.

    Ties: higher robust value, then higher w(S), then the numerically
    smallest mask.
    """
    _check_cap(system, cap)
    w = as_weights(weights, system.n)
    if not (k == 1 and l == 1) and _game_size(system.n, k, l, system.n, interdict_outside) > budget:
        raise BudgetExceeded(f"(k={k}, l={l}) game on {system.n} elements exceeds budget {budget}")
    best = None  # (value, w(S), mask)
    for s_mask in system.feasible_sets():
        w_s = weight_of(w, s_mask)
        if best is None:
            v = _robust_min(system, w, s_mask, k, l, interdict_outside, None)
        else:
            # masks arrive in increasing order, so an equal value only wins on weight
            v = _robust_min(system, w, s_mask, k, l, interdict_outside, best[0],
                            inclusive=w_s <= best[1])
        if best is None or v > best[0] or (v == best[0] and w_s > best[1]):
            best = (v, w_s, s_mask)
    cert = robust_value(system, w, best[2], k, l, interdict_outside=interdict_outside, budget=budget)
    assert cert.worst_case_value == best[0]
    return cert


def regret_profile(system: FeasibilitySystem, weights, *, cap: Optional[int] = None):
    """``(mask, w(S), max regret)`` for every feasible S, masks ascending."""
    _check_cap(system, cap)
    w = as_weights(weights, system.n)
    rows = []
    for s_mask in system.feasible_sets():
        w_s = weight_of(w, s_mask)
        order = _interdiction_order(system, w, s_mask, True)
        worst = max(w_s - v for _, _, v in _single_outcomes(system, w, s_mask, order))
        rows.append((s_mask, w_s, worst))
    return rows


def brute_force_lambda_rp(system: FeasibilitySystem, weights, lam, *, cap: Optional[int] = None,
                          profile=None) -> Optional[LambdaSolution]:
    """Maximum-weight feasible S whose regret is at most ``lam`` for every interdiction.

    Returns None when no feasible set qualifies.  ``profile`` may be a
    precomputed :func:`regret_profile` to amortize sweeps over many values.
    """
    lam = to_fraction(lam)
    rows = regret_profile(system, weights, cap=cap) if profile is None else profile
    best = None
    for mask, w_s, worst in rows:
        if worst <= lam and (best is None or w_s > best[1]):
            best = (mask, w_s)
    if best is None:
        return None
    return LambdaSolution(best[1], members(best[0]))


def candidate_lambdas(weights) -> list[Fraction]:
    """Every value a single-interdiction regret can take, ascending."""
    w = as_weights(weights)
    values = {Fraction(0)}
    for a in w:
        values.add(a)
        values.add(-a)
        for b in w:
            values.add(a - b)
    return sorted(values)


def solve_rp_via_lambda(system: FeasibilitySystem, weights,
                        lambda_solver: Callable[[Fraction], Optional[LambdaSolution]]) -> RobustCertificate:
    """Optimal first stage for k = l = 1 by maximizing w_opt(lam) - lam over the candidates."""
    w = as_weights(weights, system.n)
    best = None  # (objective, lam, solution)
    for lam in candidate_lambdas(w):
        sol = lambda_solver(lam)
        if sol is None:
            continue
        obj = sol.value - lam
        if best is None or obj > best[0]:
            best = (obj, lam, sol)
    obj, lam, sol = best
    cert = robust_value(system, w, sol.first_stage)
    if cert.worst_case_value < obj:
        raise AssertionError(
            f"robust value {cert.worst_case_value} below the bound {obj} certified at lambda={lam}")
    return RobustCertificate(cert.first_stage, cert.outcomes, cert.worst_case_value, 1, 1, lam)


def search_robust_at_least(system: ConflictSystem, weights, threshold) -> Optional[RobustCertificate]:
    """Exact search for a first stage whose (1,1) robust value reaches ``threshold``.

    Branch and bound over conflict-system first stages with nonnegative
    weights.  Interdicting the heaviest element h of S leaves at most
    ``w(S) - w(h) + max_e w(e)``, which bounds every completion of a
    partial choice.  Returns None when no first stage qualifies.
    """
    w = as_weights(weights, system.n)
    if any(x < 0 for x in w):
        raise ValidationError("search_robust_at_least needs nonnegative weights")
    threshold = to_fraction(threshold)
    order = sorted(range(system.n), key=lambda e: (-w[e], e))
    top = w[order[0]] if order else Fraction(0)
    suffix = [Fraction(0)] * (len(order) + 1)
    for i in range(len(order) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + w[order[i]]

    def evaluate(mask):
        cert = robust_value(system, w, mask)
        return cert if cert.worst_case_value >= threshold else None

    found = evaluate(0)
    if found is not None:
        return found
    stack = [(i + 1, 1 << order[i], w[order[i]], w[order[i]]) for i in range(len(order) - 1, -1, -1)]
    while stack:
        i, mask, w_s, heaviest = stack.pop()
        if w_s + suffix[i] - heaviest + top < threshold:
            continue
        if w_s - heaviest + top >= threshold:
            found = evaluate(mask)
            if found is not None:
                return found
        for j in range(len(order) - 1, i - 1, -1):
            e = order[j]
            if system.conflicts[e] & mask:
                continue
            stack.append((j + 1, mask | 1 << e, w_s + w[e], heaviest))
    return None
