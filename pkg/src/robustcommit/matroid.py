"""Matroids: oracles, greedy bases, exchanges and the robust basis solver.

Matroids are :class:`FeasibilitySystem` subclasses whose feasible sets are
the independent sets, so the exhaustive game routines of :mod:`core`
apply to them unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Optional, Sequence

from .core import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    ExplicitSystem,
    FeasibilitySystem,
    Outcome,
    RobustCertificate,
    ValidationError,
    as_weights,
    members,
    robust_value,
    to_mask,
    weight_of,
)


class Matroid(FeasibilitySystem):
    kind = "matroid"

    def is_independent(self, elements) -> bool:
        mask = elements if isinstance(elements, int) else to_mask(elements, self.n)
        return self.is_feasible(mask)

    def rank(self, elements=None) -> int:
        """Size of a maximal independent subset of ``elements`` (default: all)."""
        if elements is None:
            pool = range(self.n)
        elif isinstance(elements, int):
            pool = members(elements)
        else:
            pool = sorted(set(elements))
        mask = 0
        for e in pool:
            if self.is_feasible(mask | 1 << e):
                mask |= 1 << e
        return bin(mask).count("1")


class Uniform(Matroid):
    kind = "uniform"

    def __init__(self, n: int, rank: int):
        if n < 0 or not 0 <= rank <= n:
            raise ValidationError(f"uniform matroid needs 0 <= rank <= n, got n={n}, rank={rank}")
        self.n, self.r = n, rank

    def is_feasible(self, mask: int) -> bool:
        self.check_mask(mask)
        return bin(mask).count("1") <= self.r

    def __repr__(self):
        return f"Uniform(n={self.n}, rank={self.r})"


class Partition(Matroid):
    kind = "partition"

    def __init__(self, blocks: Sequence[Iterable[int]], caps: Sequence[int]):
        blocks = [sorted(b) for b in blocks]
        if len(blocks) != len(caps):
            raise ValidationError("one capacity per block is required")
        seen = sorted(e for b in blocks for e in b)
        if seen != list(range(len(seen))):
            raise ValidationError("blocks must partition 0..n-1")
        if any(c < 0 for c in caps):
            raise ValidationError("capacities must be nonnegative")
        self.n = len(seen)
        self.blocks = tuple(tuple(b) for b in blocks)
        self.caps = tuple(caps)
        self._masks = tuple(to_mask(b, self.n) for b in blocks)

    def is_feasible(self, mask: int) -> bool:
        self.check_mask(mask)
        return all(bin(mask & bm).count("1") <= c for bm, c in zip(self._masks, self.caps))

    def __repr__(self):
        return f"Partition(blocks={[list(b) for b in self.blocks]}, caps={list(self.caps)})"


class Graphic(Matroid):
    """Cycle matroid: element i is edge ``edges[i]``; forests are independent."""

    kind = "graphic"

    def __init__(self, n_vertices: int, edges: Sequence[Sequence[int]]):
        self.n_vertices = n_vertices
        self.edges = tuple(tuple(e) for e in edges)
        for u, v in self.edges:
            if not (0 <= u < n_vertices and 0 <= v < n_vertices):
                raise ValidationError(f"edge ({u}, {v}) has an endpoint out of range")
        self.n = len(self.edges)

    def is_feasible(self, mask: int) -> bool:
        self.check_mask(mask)
        parent = list(range(self.n_vertices))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for i in members(mask):
            u, v = self.edges[i]
            ru, rv = find(u), find(v)
            if ru == rv:
                return False
            parent[ru] = rv
        return True

    def __repr__(self):
        return f"Graphic(n_vertices={self.n_vertices}, edges={[list(e) for e in self.edges]})"


class ExplicitMatroid(Matroid):
    """Independence given by an explicit family; validated as a matroid."""

    kind = "explicit"

    def __init__(self, n: int, independent_sets: Iterable[Iterable[int]], check: bool = True):
        self._system = ExplicitSystem(n, independent_sets)
        self.n = n
        if check and not is_matroid(self._system):
            raise ValidationError("the given family violates the exchange property")

    def is_feasible(self, mask: int) -> bool:
        return self._system.is_feasible(mask)

    def maximal_sets(self):
        return self._system.maximal_sets()

    def __repr__(self):
        return f"ExplicitMatroid(n={self.n}, bases={[list(members(m)) for m in self.maximal_sets()]})"


# -- greedy and exchanges ------------------------------------------------------

def _descending(w, pool):
    return sorted(pool, key=lambda e: (-w[e], e))


def greedy_max_basis(m: FeasibilitySystem, weights, *, excluded: int = 0) -> tuple[int, ...]:
    """Maximum-weight basis of ``m`` minus the elements of ``excluded`` (a mask).

    Every independent addition is taken, negative weights included, so the
    result is always a basis.
    """
    w = as_weights(weights, m.n)
    mask = 0
    for e in _descending(w, [e for e in range(m.n) if not excluded >> e & 1]):
        if m.is_feasible(mask | 1 << e):
            mask |= 1 << e
    return members(mask)


def is_basis(m: FeasibilitySystem, mask: int, excluded: int = 0) -> bool:
    if mask & excluded or not m.is_feasible(mask):
        return False
    return not any(not (mask | excluded) >> e & 1 and m.is_feasible(mask | 1 << e) for e in range(m.n))


def best_exchange(m: FeasibilitySystem, weights, basis, f: int, *, excluded: int = 0) -> Optional[int]:
    """Heaviest g with B - f + g a basis of the deletion minor, or None if f is a coloop.

    ``excluded`` lists elements already deleted from the matroid.
    """
    w = as_weights(weights, m.n)
    b_mask = basis if isinstance(basis, int) else to_mask(basis, m.n)
    if not b_mask >> f & 1:
        raise ValidationError(f"element {f} is not in the basis")
    if not is_basis(m, b_mask, excluded):
        raise ValidationError(f"{members(b_mask)} is not a basis")
    rest = b_mask & ~(1 << f)
    banned = b_mask | excluded
    for g in _descending(w, [g for g in range(m.n) if not banned >> g & 1]):
        if m.is_feasible(rest | 1 << g):
            return g
    return None


def exchange_policy(m: FeasibilitySystem, weights, basis, interdicted: Iterable[int]):
    """Delete the interdicted elements one by one, repairing each with a best exchange.

    Returns ``(added, final_basis)``.
    """
    w = as_weights(weights, m.n)
    current = basis if isinstance(basis, int) else to_mask(basis, m.n)
    excluded = 0
    added = []
    for f in interdicted:
        if current >> f & 1:
            g = best_exchange(m, w, current, f, excluded=excluded)
            current &= ~(1 << f)
            if g is not None:
                current |= 1 << g
                added.append(g)
        excluded |= 1 << f
    return tuple(added), members(current)


def solve_kk_rmb(m: FeasibilitySystem, weights, k: int, *, budget: int = DEFAULT_BUDGET,
                 interdictions: Optional[Iterable[Iterable[int]]] = None) -> RobustCertificate:
    """Robust basis with k interdictions and k recourse additions.

    The first stage is the greedy basis.  The exact adversary is evaluated
    when the game fits in ``budget``; otherwise only the supplied
    ``interdictions`` are answered with the exchange policy.
    """
    if k < 1:
        raise ValidationError("k must be at least 1")
    w = as_weights(weights, m.n)
    first = greedy_max_basis(m, w)
    b_mask = to_mask(first, m.n)
    try:
        exact = robust_value(m, w, first, k, k, budget=budget)
    except BudgetExceeded:
        if interdictions is None:
            raise
        exact = None
    if interdictions is None:
        interdictions = [o.interdicted for o in exact.outcomes]
    policy = []
    for F in interdictions:
        F = tuple(F)
        added, final = exchange_policy(m, w, b_mask, F)
        policy.append(Outcome(F, added, final, weight_of(w, to_mask(final, m.n))))
    if exact is None:
        worst = min(o.value for o in policy)
        return RobustCertificate(first, tuple(policy), worst, k, k, extra={"exact": False})
    return RobustCertificate(first, exact.outcomes, exact.worst_case_value, k, k,
                             extra={"exact": True, "policy": tuple(policy)})


# -- matroid testing and non-matroid witnesses ---------------------------------

def _family(system: FeasibilitySystem, cap: int):
    if system.n > cap:
        raise BudgetExceeded(f"{system.n} elements exceed the cap of {cap}")
    fam = system.feasible_sets()
    if not fam or 0 not in fam:
        raise ValidationError("family must be non-empty")
    return fam


def is_matroid(system: FeasibilitySystem, cap: int = 20) -> bool:
    """Exchange property, checked on all pairs with |J| = |I| + 1 (sufficient by induction)."""
    fam = _family(system, cap)
    by_size: dict[int, list[int]] = {}
    for s in fam:
        by_size.setdefault(bin(s).count("1"), []).append(s)
    lookup = system.feasible_lookup()
    for size, smaller in by_size.items():
        for J in by_size.get(size + 1, ()):
            for I in smaller:
                if not any((I | 1 << g) in lookup for g in members(J & ~I)):
                    return False
    return True


@dataclass(frozen=True)
class NonMatroidWitness:
    X: tuple[int, ...]
    Y: tuple[int, ...]
    a: int
    b: int
    c: int


def _witness_holds(maxima, x, y, a, b, c) -> bool:
    union = x | y
    bc = 1 << b | 1 << c
    return all(z >> a & 1 or z & bc == bc for z in maxima if z & ~union == 0)


def verify_witness(system: FeasibilitySystem, wit: NonMatroidWitness) -> bool:
    maxima = system.maximal_sets()
    x, y = to_mask(wit.X, system.n), to_mask(wit.Y, system.n)
    if x not in maxima or y not in maxima:
        return False
    sym = x ^ y
    if len({wit.a, wit.b, wit.c}) != 3 or any(not sym >> e & 1 for e in (wit.a, wit.b, wit.c)):
        return False
    return _witness_holds(maxima, x, y, wit.a, wit.b, wit.c)


def find_non_matroid_witness(system: FeasibilitySystem, cap: int = 16) -> Optional[NonMatroidWitness]:
    """First (X, Y, a, b, c) in lexicographic order, or None for a matroid."""
    _family(system, cap)
    if is_matroid(system):
        return None
    maxima = sorted(system.maximal_sets())
    for x, y in combinations(maxima, 2):
        sym = members(x ^ y)
        for a in sym:
            for b, c in combinations([e for e in sym if e != a], 2):
                if _witness_holds(maxima, x, y, a, b, c):
                    return NonMatroidWitness(members(x), members(y), a, b, c)
    raise AssertionError(f"no witness found for non-matroid {system!r}")


def adversarial_weights(witness: NonMatroidWitness, n: int) -> tuple[Fraction, ...]:
    w = [Fraction(0)] * n
    w[witness.a] = Fraction(3)
    w[witness.b] = w[witness.c] = Fraction(2)
    return tuple(w)


def nominal_optima(system: FeasibilitySystem, weights) -> list[int]:
    """Masks of every maximum-weight feasible set."""
    w = as_weights(weights, system.n)
    rows = [(weight_of(w, s), s) for s in system.feasible_sets()]
    top = max(v for v, _ in rows)
    return [s for v, s in rows if v == top]
