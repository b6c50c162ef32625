"""Undirected simple graphs: parsing, serialization, and random baselines."""

from __future__ import annotations

import math
import random
import re

__all__ = [
    "Graph",
    "GraphFormatError",
    "parse_edge_list",
    "load_edge_list",
    "format_edge_list",
    "save_edge_list",
    "uniform_graph_same_density",
    "add_random_nonedges",
]

_NODES_HEADER = re.compile(r"^#\s*nodes:\s*(.*)$")


class GraphFormatError(ValueError):
    """Malformed edge-list input; carries the offending 1-based line number."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class Graph:
    """Immutable undirected simple graph.

    Nodes carry external string labels mapped to contiguous ids 0..n-1 in
    first-appearance order. Edges are unordered id pairs stored as (i, j)
    with i < j; adjacency sets mirror the edge set. Instances are treated
    as read-only after construction and are safe to share across threads.
    """

    __slots__ = ("labels", "edges", "adj", "_id_of")

    def __init__(self, labels, edges):
        self.labels: list[str] = [str(x) for x in labels]
        n = len(self.labels)
        self._id_of = {lab: i for i, lab in enumerate(self.labels)}
        if len(self._id_of) != n:
            raise ValueError("duplicate node labels")
        adj: list[set[int]] = [set() for _ in range(n)]
        norm: set[tuple[int, int]] = set()
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) out of range for {n} nodes")
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            if u > v:
                u, v = v, u
            norm.add((u, v))
            adj[u].add(v)
            adj[v].add(u)
        self.edges: frozenset[tuple[int, int]] = frozenset(norm)
        self.adj = adj

    @property
    def num_nodes(self) -> int:
        return len(self.labels)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        if u > v:
            u, v = v, u
        return (u, v) in self.edges

    def neighbors(self, u: int) -> set[int]:
        return self.adj[u]

    def degree(self, u: int) -> int:
        return len(self.adj[u])

    def id_of(self, label: str) -> int:
        return self._id_of[str(label)]

    def isolated_nodes(self) -> list[int]:
        return [u for u in range(self.num_nodes) if not self.adj[u]]

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.labels == other.labels and self.edges == other.edges

    def __hash__(self):
        return hash((tuple(self.labels), self.edges))

    def __repr__(self) -> str:
        return f"Graph(n={self.num_nodes}, m={self.num_edges})"


def parse_edge_list(text: str) -> Graph:
    """Parse edge-list text: two whitespace-separated labels per line.

    Lines starting with ``#`` are comments, except ``# nodes: a b c`` headers
    which declare nodes (used for isolated ones). Blank lines are skipped.
    Duplicate edges collapse; self-loops and malformed lines are rejected
    with their line number.
    """
    labels: list[str] = []
    id_of: dict[str, int] = {}

    def intern(label: str) -> int:
        i = id_of.get(label)
        if i is None:
            i = len(labels)
            id_of[label] = i
            labels.append(label)
        return i

    edges: set[tuple[int, int]] = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _NODES_HEADER.match(line)
            if m:
                for lab in m.group(1).split():
                    intern(lab)
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphFormatError(
                f"expected two node labels, got {len(parts)}", line_no
            )
        a, b = parts
        if a == b:
            raise GraphFormatError(f"self-loop on node {a!r}", line_no)
        u, v = intern(a), intern(b)
        if u > v:
            u, v = v, u
        edges.add((u, v))
    return Graph(labels, edges)


def load_edge_list(path) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_edge_list(fh.read())


def format_edge_list(g: Graph) -> str:
    """Serialize a graph; isolated nodes go into a ``# nodes:`` header."""
    out = []
    isolated = g.isolated_nodes()
    if isolated:
        out.append("# nodes: " + " ".join(g.labels[u] for u in isolated))
    for u, v in g.sorted_edges():
        out.append(f"{g.labels[u]} {g.labels[v]}")
    return "\n".join(out) + "\n"


def save_edge_list(g: Graph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_edge_list(g))


def _pair_code(i: int, j: int, n: int) -> int:
    # lexicographic rank of (i, j), i < j, among all n*(n-1)/2 pairs
    return i * n - i * (i + 1) // 2 + (j - i - 1)


def _pair_decode(code: int, n: int) -> tuple[int, int]:
    i = (2 * n - 1 - math.isqrt((2 * n - 1) ** 2 - 8 * code)) // 2
    # nudge the isqrt estimate onto the row that actually holds `code`
    while i > 0 and _pair_code(i, i + 1, n) > code:
        i -= 1
    while i + 2 < n and _pair_code(i + 1, i + 2, n) <= code:
        i += 1
    j = code - _pair_code(i, i + 1, n) + i + 1
    return i, j


def uniform_graph_same_density(g: Graph, seed: int) -> Graph:
    """Uniform draw among all graphs on g's nodes with exactly g's edge count."""
    n = g.num_nodes
    total = n * (n - 1) // 2
    m = g.num_edges
    if m > total:
        raise ValueError("more edges than node pairs")
    rng = random.Random(seed)
    codes = rng.sample(range(total), m)
    return Graph(g.labels, [_pair_decode(c, n) for c in codes])


def add_random_nonedges(g: Graph, count: int, seed: int) -> Graph:
    """Add ``count`` distinct edges drawn uniformly from g's non-edges."""
    if count < 0:
        raise ValueError("count must be >= 0")
    n = g.num_nodes
    total = n * (n - 1) // 2
    present = {_pair_code(u, v, n) for u, v in g.edges}
    slack = total - len(present)
    if count > slack:
        raise ValueError(
            f"cannot add {count} non-edges: only {slack} available"
        )
    rng = random.Random(seed)
    if total <= 2_000_000:
        pool = [c for c in range(total) if c not in present]
        chosen = rng.sample(pool, count)
    else:
        chosen = []
        seen = set(present)
        while len(chosen) < count:
            c = rng.randrange(total)
            if c not in seen:
                seen.add(c)
                chosen.append(c)
    new_edges = set(g.edges)
    new_edges.update(_pair_decode(c, n) for c in chosen)
    return Graph(g.labels, new_edges)
