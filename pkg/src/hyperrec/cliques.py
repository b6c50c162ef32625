"""Maximal-clique enumeration and edge-coverage factor bookkeeping.

A "factor" is a candidate hyperedge slot: any clique of the input graph with
at least two nodes. Only maximal cliques are enumerated up front; sub-clique
factors materialize lazily when they first become active (a k-clique has
2**k - k - 1 sub-factors, so pre-materializing them is a non-starter).
"""

from __future__ import annotations

from math import comb

from .graph import Graph

__all__ = [
    "CliqueLimitError",
    "maximal_cliques",
    "degeneracy_order",
    "subfactor_count",
    "subfactor_key",
    "FactorGraph",
]

DEFAULT_MAX_CLIQUES = 1_000_000
DEFAULT_MAX_CLIQUE_SIZE = 64

Key = tuple[int, ...]


class CliqueLimitError(RuntimeError):
    """Enumeration exceeded a configured resource cap."""


def degeneracy_order(g: Graph) -> list[int]:
    """Nodes in degeneracy order (repeatedly remove a minimum-degree node)."""
    n = g.num_nodes
    deg = [g.degree(u) for u in range(n)]
    buckets: list[list[int]] = [[] for _ in range(max(deg, default=0) + 1)]
    for u in range(n):
        buckets[deg[u]].append(u)
    order: list[int] = []
    removed = [False] * n
    d = 0
    while len(order) < n:
        if d >= len(buckets) or not buckets[d]:
            d += 1
            continue
        u = buckets[d].pop()
        if removed[u] or deg[u] != d:
            continue
        removed[u] = True
        order.append(u)
        for v in g.adj[u]:
            if not removed[v]:
                deg[v] -= 1
                buckets[deg[v]].append(v)
        d = 0
    return order


def maximal_cliques(
    g: Graph,
    max_cliques: int = DEFAULT_MAX_CLIQUES,
    max_size: int = DEFAULT_MAX_CLIQUE_SIZE,
) -> list[Key]:
    """All inclusion-maximal cliques of size >= 2, each a sorted id tuple.

    Uses pivoting recursion inside a degeneracy-ordered outer loop, which
    keeps the search shallow on sparse graphs. Raises CliqueLimitError when
    the count exceeds ``max_cliques`` or any clique exceeds ``max_size``
    (the problem is NP-hard in general; the caps are an escape hatch).
    """
    adj = g.adj
    out: list[Key] = []

    def expand(r: list[int], p: set[int], x: set[int]) -> None:
        if len(r) > max_size:
            raise CliqueLimitError(
                f"clique larger than max_size={max_size}"
            )
        if not p and not x:
            if len(r) >= 2:
                if len(out) >= max_cliques:
                    raise CliqueLimitError(
                        f"more than max_cliques={max_cliques} maximal cliques"
                    )
                out.append(tuple(sorted(r)))
            return
        # Tomita pivot: maximize |P ∩ N(u)| to prune branches
        pivot = max(p | x, key=lambda u: len(p & adj[u]))
        for v in list(p - adj[pivot]):
            expand(r + [v], p & adj[v], x & adj[v])
            p.remove(v)
            x.add(v)

    order = degeneracy_order(g)
    pos = {u: i for i, u in enumerate(order)}
    for u in order:
        later = {v for v in g.adj[u] if pos[v] > pos[u]}
        earlier = {v for v in g.adj[u] if pos[v] < pos[u]}
        expand([u], later, earlier)
    out.sort()
    return out


def subfactor_count(k: int, size: int) -> int:
    return comb(k, size)


def subfactor_key(factor: Key, size: int, index: int) -> Key:
    """The ``index``-th size-``size`` subset of ``factor`` in lexicographic
    order over the sorted factor nodes. Unranking is a bijection, so a
    uniform index yields a uniform subset."""
    k = len(factor)
    if not 2 <= size <= k:
        raise ValueError(f"subfactor size {size} out of range [2, {k}]")
    if not 0 <= index < comb(k, size):
        raise ValueError(f"subfactor index {index} out of range")
    nodes = sorted(factor)
    out = []
    need = size
    pos = 0
    r = index
    while need > 0:
        c = comb(k - pos - 1, need - 1)
        if r < c:
            out.append(nodes[pos])
            need -= 1
        else:
            r -= c
        pos += 1
    return tuple(out)


class FactorGraph:
    """Active hyperedge slots over a graph's cliques, plus coverage counters.

    ``active`` maps canonical keys (sorted id tuples) to multiplicities >= 1.
    ``coverage[e]`` counts active-factor instances containing edge ``e``,
    with multiplicity, for every edge of the graph. Keys are only ever
    cliques of the graph, so the projection of the active set can never
    create an edge absent from the graph; full coverage is then equivalent
    to the active set projecting exactly onto the graph.

    Single-writer mutable state: one sampler chain owns one instance.
    """

    def __init__(self, g: Graph, maximal_factors: list[Key] | None = None):
        self.graph = g
        if maximal_factors is None:
            maximal_factors = maximal_cliques(g)
        self.maximal_factors: list[Key] = list(maximal_factors)
        self.coverage: dict[tuple[int, int], int] = {e: 0 for e in g.edges}
        self.edge_index: dict[tuple[int, int], list[int]] = {
            e: [] for e in g.edges
        }
        for fid, fac in enumerate(self.maximal_factors):
            for i in range(len(fac)):
                for j in range(i + 1, len(fac)):
                    self.edge_index[(fac[i], fac[j])].append(fid)
        self.active: dict[Key, int] = {}

    def multiplicity(self, key: Key) -> int:
        return self.active.get(key, 0)

    def apply_delta(self, key: Key, delta: int) -> None:
        """Add or remove one instance of ``key``; updates all its pair
        counters. Removing an absent key or touching a non-clique is a
        logic error."""
        if delta not in (1, -1):
            raise ValueError("delta must be +1 or -1")
        key = tuple(sorted(key))
        if len(key) < 2:
            raise ValueError("factor keys have size >= 2")
        a = self.active.get(key, 0)
        if delta == -1 and a == 0:
            raise ValueError(f"decrement of absent key {key}")
        pairs = [
            (key[i], key[j])
            for i in range(len(key))
            for j in range(i + 1, len(key))
        ]
        for e in pairs:
            if e not in self.coverage:
                raise ValueError(f"key {key} is not a clique of the graph")
        if a + delta == 0:
            del self.active[key]
        else:
            self.active[key] = a + delta
        for e in pairs:
            self.coverage[e] += delta

    def is_fully_covered(self) -> bool:
        return all(c > 0 for c in self.coverage.values())

    def uncovered_edges(self) -> list[tuple[int, int]]:
        return sorted(e for e, c in self.coverage.items() if c == 0)

    def coverage_recount(self) -> dict[tuple[int, int], int]:
        """From-scratch recount of the coverage counters (for verification)."""
        cov = {e: 0 for e in self.graph.edges}
        for key, a in self.active.items():
            for i in range(len(key)):
                for j in range(i + 1, len(key)):
                    cov[(key[i], key[j])] += a
        return cov

    def activate_maximal_cliques(self) -> None:
        """Reset to one active instance per maximal factor."""
        self.active.clear()
        for e in self.coverage:
            self.coverage[e] = 0
        for fac in self.maximal_factors:
            self.apply_delta(fac, +1)
