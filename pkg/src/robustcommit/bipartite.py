"""Stable sets and matchings in bipartite graphs, plus two 3-SAT reductions.

Vertices are ``0..n_vertices-1``; edges are stored as pairs ``(u, v)`` with
``u < v``.  Stable sets live on the vertices, matchings on the edge
indices of :attr:`Graph.edges`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Iterable, Optional, Sequence

from .core import (
    BudgetExceeded,
    ConflictSystem,
    RobustCertificate,
    ValidationError,
    members,
    robust_value,
    to_fraction,
)

KE_CAP = 24
MATCHING_CAP = 20
SAT_CAP = 16


@dataclass(frozen=True)
class Graph:
    n_vertices: int
    edges: tuple
    weights: Optional[tuple] = None
    sides: Optional[tuple] = None  # sides[v] in {0, 1} when a bipartition is known

    def __post_init__(self):
        norm = []
        for e in self.edges:
            u, v = e
            if isinstance(u, bool) or isinstance(v, bool) or not isinstance(u, int) or not isinstance(v, int):
                raise ValidationError(f"edge {e} must join integer vertices")
            if u == v:
                raise ValidationError(f"loop at vertex {u}")
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise ValidationError(f"edge {e} has an endpoint out of range")
            norm.append((min(u, v), max(u, v)))
        if len(set(norm)) != len(norm):
            raise ValidationError("duplicate edge")
        object.__setattr__(self, "edges", tuple(norm))
        if self.weights is not None:
            w = tuple(to_fraction(x) for x in self.weights)
            if len(w) != self.n_vertices or any(x < 0 for x in w):
                raise ValidationError("one nonnegative weight per vertex is required")
            object.__setattr__(self, "weights", w)
        if self.sides is not None:
            sides = tuple(self.sides)
            if len(sides) != self.n_vertices or any(s not in (0, 1) for s in sides):
                raise ValidationError("bipartition must give side 0 or 1 to every vertex")
            if any(sides[u] == sides[v] for u, v in norm):
                raise ValidationError("an edge lies inside one side of the bipartition")
            object.__setattr__(self, "sides", sides)

    def neighbors(self) -> list[list[int]]:
        adj = [[] for _ in range(self.n_vertices)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        for a in adj:
            a.sort()
        return adj

    def degree(self, v: int) -> int:
        return sum(v in e for e in self.edges)

    def vertex_weights(self) -> tuple:
        return self.weights if self.weights is not None else (Fraction(1),) * self.n_vertices


def bipartition(g: Graph) -> Optional[tuple[int, ...]]:
    """Sides of a 2-coloring (smallest vertex of each component on side 0), or None."""
    if g.sides is not None:
        return g.sides
    adj = g.neighbors()
    side = [-1] * g.n_vertices
    for s in range(g.n_vertices):
        if side[s] != -1:
            continue
        side[s] = 0
        queue = [s]
        for u in queue:
            for v in adj[u]:
                if side[v] == -1:
                    side[v] = 1 - side[u]
                    queue.append(v)
                elif side[v] == side[u]:
                    return None
    return tuple(side)


def is_bipartite(g: Graph) -> bool:
    return bipartition(g) is not None


def _sides(g: Graph) -> tuple[int, ...]:
    sides = bipartition(g)
    if sides is None:
        raise ValidationError("graph is not bipartite")
    return sides


def _kuhn(g: Graph, sides):
    adj = g.neighbors()
    mate = [-1] * g.n_vertices

    def augment(u, seen):
        for v in adj[u]:
            if v in seen:
                continue
            seen.add(v)
            if mate[v] == -1 or augment(mate[v], seen):
                mate[u], mate[v] = v, u
                return True
        return False

    for u in range(g.n_vertices):
        if sides[u] == 0 and mate[u] == -1:
            augment(u, set())
    return mate, adj


def max_matching(g: Graph) -> tuple[tuple[int, int], ...]:
    """Maximum-cardinality matching by augmenting paths from side-0 vertices in index order."""
    mate, _ = _kuhn(g, _sides(g))
    return tuple(sorted((u, mate[u]) if u < mate[u] else (mate[u], u)
                        for u in range(g.n_vertices) if mate[u] > u))


def min_vertex_cover_bipartite(g: Graph) -> tuple[int, ...]:
    """König cover: unreached side-0 vertices plus reached side-1 vertices."""
    sides = _sides(g)
    mate, adj = _kuhn(g, sides)
    reached = set()
    stack = [u for u in range(g.n_vertices) if sides[u] == 0 and mate[u] == -1]
    reached.update(stack)
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in reached and mate[u] != v:
                reached.add(v)
                w = mate[v]
                if w != -1 and w not in reached:
                    reached.add(w)
                    stack.append(w)
    return tuple(v for v in range(g.n_vertices)
                 if (sides[v] == 0 and v not in reached) or (sides[v] == 1 and v in reached))


def max_stable_set_bipartite(g: Graph) -> tuple[int, ...]:
    cover = set(min_vertex_cover_bipartite(g))
    return tuple(v for v in range(g.n_vertices) if v not in cover)


def stable_set_system(g: Graph) -> ConflictSystem:
    conflicts = [0] * g.n_vertices
    for u, v in g.edges:
        conflicts[u] |= 1 << v
        conflicts[v] |= 1 << u
    return ConflictSystem(g.n_vertices, conflicts, kind="stable_sets")


def matching_system(g: Graph) -> ConflictSystem:
    """Edges conflict when they share an endpoint."""
    m = len(g.edges)
    conflicts = [0] * m
    for i, j in combinations(range(m), 2):
        if set(g.edges[i]) & set(g.edges[j]):
            conflicts[i] |= 1 << j
            conflicts[j] |= 1 << i
    return ConflictSystem(m, conflicts, kind="matchings")


def max_stable_set_general(g: Graph, cap: int = KE_CAP) -> tuple[int, ...]:
    """Maximum stable set of any graph by branching on a highest-degree vertex."""
    if g.n_vertices > cap:
        raise BudgetExceeded(f"{g.n_vertices} vertices exceed the cap of {cap}")
    nbr = [0] * g.n_vertices
    for u, v in g.edges:
        nbr[u] |= 1 << v
        nbr[v] |= 1 << u
    best = [0]

    def grow(cand: int, chosen: int):
        if bin(chosen).count("1") + bin(cand).count("1") <= bin(best[0]).count("1"):
            return
        if not cand:
            best[0] = chosen
            return
        v = max(members(cand), key=lambda x: (bin(nbr[x] & cand).count("1"), -x))
        if not nbr[v] & cand:
            # v and everything else left are isolated: take them all
            grow(0, chosen | cand)
            return
        grow(cand & ~(1 << v) & ~nbr[v], chosen | 1 << v)
        grow(cand & ~(1 << v), chosen)

    grow((1 << g.n_vertices) - 1, 0)
    return members(best[0])


def is_koenig_egervary(g: Graph, cap: int = KE_CAP) -> bool:
    """True iff the matching number equals the vertex cover number."""
    if is_bipartite(g):
        return True
    import networkx as nx

    G = nx.Graph()
    G.add_nodes_from(range(g.n_vertices))
    G.add_edges_from(g.edges)
    nu = len(nx.max_weight_matching(G, maxcardinality=True))
    tau = g.n_vertices - len(max_stable_set_general(g, cap))
    return nu == tau


# -- repairable stable sets -------------------------------------------------------

def is_repairable(system: ConflictSystem, first_stage: Iterable[int]) -> bool:
    """Every f in S has some e outside S with S - f + e feasible."""
    mask = 0
    for x in first_stage:
        mask |= 1 << x
    for f in members(mask):
        rest = mask & ~(1 << f)
        if not any(not mask >> e & 1 and not system.conflicts[e] & rest for e in range(system.n)):
            return False
    return True


def _require_ke(g: Graph):
    if not is_bipartite(g) and not is_koenig_egervary(g):
        raise ValidationError("graph must be bipartite or Koenig-Egervary")


def repairable_stable_set(g: Graph) -> Optional[tuple[int, ...]]:
    """Repairable maximum stable set via the forced pendant matching, or None.

    Each degree-one vertex must be matched to its unique neighbour; this
    succeeds only if the result is a perfect matching, and then S takes one
    degree-one endpoint from every matching edge.
    """
    _require_ke(g)
    adj = g.neighbors()
    mate = [-1] * g.n_vertices
    for p in range(g.n_vertices):
        if len(adj[p]) != 1:
            continue
        q = adj[p][0]
        if mate[p] == q:
            continue
        if mate[p] != -1 or mate[q] != -1:
            return None
        mate[p], mate[q] = q, p
    if any(m == -1 for m in mate):
        return None
    chosen = []
    for u in range(g.n_vertices):
        v = mate[u]
        if u < v:
            chosen.append(u if len(adj[u]) == 1 else v)
    return tuple(sorted(chosen))


def brute_force_repairable_stable_set(g: Graph, cap: int = MATCHING_CAP) -> Optional[tuple[int, ...]]:
    """Smallest-mask repairable maximum stable set found by enumeration, or None."""
    if g.n_vertices > cap:
        raise BudgetExceeded(f"{g.n_vertices} vertices exceed the cap of {cap}")
    system = stable_set_system(g)
    fam = system.feasible_sets()
    alpha = max(bin(s).count("1") for s in fam)
    for s in fam:
        if bin(s).count("1") == alpha and is_repairable(system, members(s)):
            return members(s)
    return None


def solve_unweighted_rbss(g: Graph) -> RobustCertificate:
    """Optimal unit-weight robust stable set in a bipartite or Koenig-Egervary graph."""
    _require_ke(g)
    system = stable_set_system(g)
    unit = (Fraction(1),) * g.n_vertices
    s = repairable_stable_set(g)
    repairable = s is not None
    if s is None:
        s = max_stable_set_bipartite(g) if is_bipartite(g) else max_stable_set_general(g)
    cert = robust_value(system, unit, s)
    expected = len(s) if repairable else max(len(s) - 1, 0)
    if cert.worst_case_value != expected:
        raise AssertionError(f"robust value {cert.worst_case_value} differs from {expected}")
    return RobustCertificate(cert.first_stage, cert.outcomes, cert.worst_case_value,
                             extra={"repairable": repairable, "alpha": len(s)})


# -- 3-SAT ----------------------------------------------------------------------------

@dataclass(frozen=True)
class CnfFormula:
    """Clauses of signed 1-based variable indices, as in DIMACS."""

    n_vars: int
    clauses: tuple

    def __post_init__(self):
        cl = tuple(tuple(c) for c in self.clauses)
        for c in cl:
            if len(c) != 3:
                raise ValidationError(f"clause {c} does not have exactly 3 literals")
            if any(isinstance(x, bool) or not isinstance(x, int) or x == 0 or abs(x) > self.n_vars for x in c):
                raise ValidationError(f"clause {c} has a literal out of range")
            if len({abs(x) for x in c}) != 3:
                raise ValidationError(f"clause {c} repeats a variable")
        object.__setattr__(self, "clauses", cl)

    @property
    def m(self) -> int:
        return len(self.clauses)

    def satisfied_by(self, assignment: Sequence[bool]) -> bool:
        return all(any(assignment[abs(x) - 1] == (x > 0) for x in c) for c in self.clauses)


def brute_force_sat(phi: CnfFormula, cap: int = SAT_CAP) -> Optional[tuple[bool, ...]]:
    """First satisfying assignment in lexicographic order (False < True), or None."""
    if phi.n_vars > cap:
        raise BudgetExceeded(f"{phi.n_vars} variables exceed the cap of {cap}")
    for bits in product((False, True), repeat=phi.n_vars):
        if phi.satisfied_by(bits):
            return bits
    return None


def random_3cnf(rng, n_vars: int, m: int) -> CnfFormula:
    clauses = []
    for _ in range(m):
        vs = rng.sample(range(1, n_vars + 1), 3)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    return CnfFormula(n_vars, tuple(clauses))


@dataclass(frozen=True)
class ReductionOutput:
    graph: Graph
    threshold: Optional[Fraction]
    labels: dict = field(compare=False)
    edge_labels: dict = field(default_factory=dict, compare=False)


def reduce_3sat_to_rbm(phi: CnfFormula) -> ReductionOutput:
    """Bipartite graph with a repairable matching of size m + n iff ``phi`` is satisfiable.

    Layout: a_i = i-1, abar_i = n+i-1, b_i = 2n+i-1, c_j = 3n+j-1, z_j = 3n+m+j-1
    (1-based i, j).
    """
    n, m = phi.n_vars, phi.m
    labels = {}
    for i in range(n):
        labels[i] = f"a_{i + 1}"
        labels[n + i] = f"abar_{i + 1}"
        labels[2 * n + i] = f"b_{i + 1}"
    for j in range(m):
        labels[3 * n + j] = f"c_{j + 1}"
        labels[3 * n + m + j] = f"z_{j + 1}"
    edges = []
    for i in range(n):
        edges += [(i, 2 * n + i), (n + i, 2 * n + i)]
    for j in range(m):
        edges.append((3 * n + j, 3 * n + m + j))
    for j, clause in enumerate(phi.clauses):
        for x in clause:
            lit = abs(x) - 1 if x > 0 else n + abs(x) - 1
            edges.append((lit, 3 * n + j))
    sides = [0] * (2 * n) + [1] * n + [1] * m + [0] * m
    g = Graph(3 * n + 2 * m, tuple(edges), sides=tuple(sides))
    edge_labels = {idx: f"{labels[u]}-{labels[v]}" for idx, (u, v) in enumerate(g.edges)}
    return ReductionOutput(g, None, labels, edge_labels)


def brute_force_repairable_matching(g: Graph, cap: Optional[int] = MATCHING_CAP) -> Optional[tuple[tuple[int, int], ...]]:
    """A repairable maximum matching, or None.

    Side-0 vertices are matched one at a time in index order.  A matched
    edge is checked as soon as the saturation of every vertex that could
    repair it is settled; a maximum matching can only be repaired through
    an edge to an exposed vertex.
    """
    if cap is not None and len(g.edges) > cap:
        raise BudgetExceeded(f"{len(g.edges)} edges exceed the cap of {cap}")
    sides = _sides(g)
    nu = len(max_matching(g))
    adj = g.neighbors()
    left = [v for v in range(g.n_vertices) if sides[v] == 0]
    pos = {v: i for i, v in enumerate(left)}

    def settled(v):
        # index after which v's saturation is fixed
        if sides[v] == 0:
            return pos[v]
        return max((pos[u] for u in adj[v]), default=-1)

    # edge (u, v) with u on side 0: check once both endpoints' other neighbours are settled
    deadline = {}
    for u in left:
        for v in adj[u]:
            deps = [settled(u), settled(v)] + [settled(x) for x in adj[u] if x != v] \
                + [settled(x) for x in adj[v] if x != u]
            deadline[(u, v)] = max(deps)
    due: dict[int, list] = {}
    for key, d in deadline.items():
        due.setdefault(d, []).append(key)

    mate = [-1] * g.n_vertices

    def repairable(u, v):
        return any(mate[x] == -1 for x in adj[u] if x != v) or any(mate[x] == -1 for x in adj[v] if x != u)

    def check(i):
        for u, v in due.get(i, ()):
            if mate[u] == v and not repairable(u, v):
                return False
        return True

    def search(i, size):
        if size + len(left) - i < nu:
            return False
        if i == len(left):
            return size == nu
        u = left[i]
        for v in adj[u] + [None]:
            if v is not None:
                if mate[v] != -1:
                    continue
                mate[u], mate[v] = v, u
            if check(i) and search(i + 1, size + (v is not None)):
                return True
            if v is not None:
                mate[u] = mate[v] = -1
        return False

    if not check(-1) or not search(0, 0):
        return None
    return tuple(sorted((min(u, mate[u]), max(u, mate[u])) for u in left if mate[u] != -1))


def rwss_constants(n: int, m: int, r: Optional[int] = None) -> tuple[int, int, int]:
    """(r, s, k) for the weighted reduction; r defaults to n + 1."""
    if r is None:
        r = n + 1
    s = (2 * n + 3 * m) * r + 2 * n + 1
    k = (m + n - 1) * s + r + n
    return r, s, k


def reduce_3sat_to_rwss(phi: CnfFormula, r: Optional[int] = None) -> ReductionOutput:
    """Weighted bipartite graph whose robust stable set value reaches k iff ``phi`` is satisfiable.

    Heavy vertices (weight s): b_i and c_j.  Backups (weight r): b_i^1,
    b_i^2 and c_j^1..3.  Literals a_i, abar_i weigh 1.  The backup weight r
    must exceed n: with r <= n a first stage containing every literal
    vertex already reaches k.
    Layout: a_i, abar_i, b_i, b_i^1, b_i^2 at offsets 0, n, 2n, 3n, 4n;
    c_j at 5n + j; c_j^t at 5n + m + 3j + t - 1.
    """
    n, m = phi.n_vars, phi.m
    r, s, k = rwss_constants(n, m, r)
    labels = {}
    weights = [0] * (5 * n + 4 * m)
    for i in range(n):
        for off, name, wt in ((0, "a", 1), (n, "abar", 1), (2 * n, "b", s), (3 * n, "b1", r), (4 * n, "b2", r)):
            labels[off + i] = f"{name}_{i + 1}"
            weights[off + i] = wt
    for j in range(m):
        labels[5 * n + j] = f"c_{j + 1}"
        weights[5 * n + j] = s
        for t in range(3):
            labels[5 * n + m + 3 * j + t] = f"c{t + 1}_{j + 1}"
            weights[5 * n + m + 3 * j + t] = r
    edges = []
    for i in range(n):
        edges += [(2 * n + i, 3 * n + i), (2 * n + i, 4 * n + i), (3 * n + i, i), (4 * n + i, n + i)]
    for j, clause in enumerate(phi.clauses):
        for t, x in enumerate(clause):
            rep = 5 * n + m + 3 * j + t
            lit = abs(x) - 1 if x > 0 else n + abs(x) - 1
            edges += [(5 * n + j, rep), (rep, lit)]
    sides = [0] * (5 * n + 4 * m)
    for i in range(n):
        sides[3 * n + i] = sides[4 * n + i] = 1
    for j in range(3 * m):
        sides[5 * n + m + j] = 1
    g = Graph(5 * n + 4 * m, tuple(edges), tuple(weights), tuple(sides))
    return ReductionOutput(g, Fraction(k), labels)
