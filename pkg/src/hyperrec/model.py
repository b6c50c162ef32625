"""Hypergraphs, the pairwise projection, and the integrated multiplicity prior.

The prior treats the multiplicity of every candidate node set independently
as Poisson with a size-dependent rate, integrates the rates out against
exponential hyperpriors, and fixes the single remaining density parameter
``mu`` empirically so that every hyperedge size contributes the same
expected number of projected edges: ``mu = E / (L - 1)``.

For a hypergraph with ``E_k`` hyperedges of size k (counted with
multiplicity) on N nodes this gives, in natural logs,

    log P(H) = sum over k in 2..L of
        lnGamma(E_k + 1) - ln Z_k - ln(mu)
        - E_k * ln C(N, k) - (E_k + 1) * ln(1 + 1/mu)

where ln Z_k sums lnGamma(A + 1) over the size-k keys with multiplicity A.
Description lengths are this quantity converted to base-2 bits and negated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .cliques import maximal_cliques
from .graph import Graph, GraphFormatError

__all__ = [
    "Hypergraph",
    "ModelConfig",
    "DegenerateGraphError",
    "make_config",
    "project",
    "is_projection_of",
    "maximal_clique_hypergraph",
    "log_prior",
    "log_prior_delta",
    "description_length",
    "parse_hypergraph",
    "load_hypergraph",
    "format_hypergraph",
    "save_hypergraph",
]

LN2 = math.log(2.0)

Key = tuple[int, ...]

MAX_MULTIPLICITY = 2**63 - 1


class DegenerateGraphError(ValueError):
    """The graph has no edges, so the density parameter is undefined."""


def canonical_key(nodes) -> Key:
    key = tuple(sorted(nodes))
    if len(set(key)) != len(key):
        raise ValueError(f"repeated node in hyperedge {key}")
    return key


class Hypergraph:
    """Multiset of hyperedges over nodes 0..n-1.

    ``edges`` maps canonical keys (sorted id tuples, size >= 2) to strictly
    positive multiplicities. Per-size totals are maintained incrementally.
    Plain data: copies are cheap and safe to move between threads.
    """

    __slots__ = ("n", "edges", "labels", "_size_counts")

    def __init__(self, n: int, edges: dict[Key, int] | None = None,
                 labels: list[str] | None = None):
        self.n = n
        self.labels = list(labels) if labels is not None else None
        if self.labels is not None and len(self.labels) != n:
            raise ValueError("labels length must equal node count")
        self.edges: dict[Key, int] = {}
        self._size_counts: dict[int, int] = {}
        if edges:
            for key, mult in edges.items():
                self.add(canonical_key(key), mult)

    def add(self, key: Key, mult: int = 1) -> None:
        key = canonical_key(key)
        if len(key) < 2:
            raise ValueError("hyperedges have size >= 2")
        if key[0] < 0 or key[-1] >= self.n:
            raise ValueError(f"hyperedge {key} out of range for n={self.n}")
        if mult < 1:
            raise ValueError("multiplicity increments must be >= 1")
        new = self.edges.get(key, 0) + mult
        if new > MAX_MULTIPLICITY:
            raise OverflowError("multiplicity exceeds 2**63 - 1")
        self.edges[key] = new
        k = len(key)
        self._size_counts[k] = self._size_counts.get(k, 0) + mult

    def remove(self, key: Key, mult: int = 1) -> None:
        key = canonical_key(key)
        have = self.edges.get(key, 0)
        if mult < 1 or have < mult:
            raise ValueError(f"cannot remove {mult} of key {key} (have {have})")
        if have == mult:
            del self.edges[key]
        else:
            self.edges[key] = have - mult
        k = len(key)
        self._size_counts[k] -= mult
        if self._size_counts[k] == 0:
            del self._size_counts[k]

    def multiplicity(self, key) -> int:
        return self.edges.get(tuple(sorted(key)), 0)

    def size_counts(self) -> dict[int, int]:
        """E_k: number of size-k hyperedges, with multiplicity."""
        return dict(self._size_counts)

    def repeat_histogram(self, k: int) -> dict[int, int]:
        """Number of size-k keys repeated exactly m times, by m."""
        hist: dict[int, int] = {}
        for key, a in self.edges.items():
            if len(key) == k:
                hist[a] = hist.get(a, 0) + 1
        return hist

    def total_count(self) -> int:
        return sum(self._size_counts.values())

    def distinct_count(self) -> int:
        return len(self.edges)

    def max_size(self) -> int:
        return max((len(k) for k in self.edges), default=0)

    def label_key(self, key: Key) -> tuple[str, ...]:
        if self.labels is None:
            return tuple(sorted(str(i) for i in key))
        return tuple(sorted(self.labels[i] for i in key))

    def label_key_set(self) -> set[tuple[str, ...]]:
        """Distinct hyperedges as sorted label tuples (multiplicity ignored)."""
        return {self.label_key(k) for k in self.edges}

    def copy(self) -> "Hypergraph":
        return Hypergraph(self.n, dict(self.edges), self.labels)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Hypergraph):
            return NotImplemented
        return self.n == other.n and self.edges == other.edges

    def __hash__(self):
        return hash((self.n, frozenset(self.edges.items())))

    def __repr__(self) -> str:
        return (f"Hypergraph(n={self.n}, distinct={self.distinct_count()}, "
                f"total={self.total_count()})")


@dataclass(frozen=True)
class ModelConfig:
    """Everything the prior needs, precomputed in log space."""

    N: int
    E: int
    L: int
    mu: float
    log_binom: tuple[float, ...] = field(repr=False)  # index k -> ln C(N, k)
    ln_one_plus_inv_mu: float = field(repr=False, default=0.0)

    @classmethod
    def explicit(cls, n: int, big_l: int, mu: float,
                 num_edges: int = 0) -> "ModelConfig":
        """Config with a hand-picked density parameter (prior evaluation
        without an underlying graph)."""
        if big_l < 2 or mu <= 0:
            raise ValueError("need L >= 2 and mu > 0")
        log_binom = tuple(
            _ln_binom(n, k) if k <= n else float("-inf")
            for k in range(big_l + 1)
        )
        return cls(N=n, E=num_edges, L=big_l, mu=mu, log_binom=log_binom,
                   ln_one_plus_inv_mu=math.log(1.0 + 1.0 / mu))


def _ln_binom(n: int, k: int) -> float:
    return (math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1))


def make_config(g: Graph, cliques: list[Key] | None = None) -> ModelConfig:
    """Fix model constants from the data.

    L is the size of the largest maximal clique: the projection constraint
    gives zero posterior mass to anything larger, so higher sizes would only
    add empty prior terms. ``mu = E / (L - 1)`` splits the observed edge
    count evenly across the L - 1 hyperedge sizes.
    """
    if g.num_edges == 0:
        raise DegenerateGraphError(
            "graph has no edges: density parameter mu is undefined"
        )
    if cliques is None:
        cliques = maximal_cliques(g)
    L = max(len(c) for c in cliques)
    mu = g.num_edges / (L - 1)
    log_binom = tuple(
        _ln_binom(g.num_nodes, k) if k <= g.num_nodes else float("-inf")
        for k in range(L + 1)
    )
    return ModelConfig(
        N=g.num_nodes,
        E=g.num_edges,
        L=L,
        mu=mu,
        log_binom=log_binom,
        ln_one_plus_inv_mu=math.log(1.0 + 1.0 / mu),
    )


def project(h: Hypergraph) -> Graph:
    """The pairwise projection: an edge for every pair co-appearing in a
    hyperedge. Node set (including isolated nodes) is preserved."""
    labels = h.labels if h.labels is not None else [str(i) for i in range(h.n)]
    edges = set()
    for key in h.edges:
        for i in range(len(key)):
            for j in range(i + 1, len(key)):
                edges.add((key[i], key[j]))
    return Graph(labels, edges)


def is_projection_of(g: Graph, h: Hypergraph) -> bool:
    """True iff h projects to exactly g: every edge of g covered and no
    hyperedge pair outside g's edge set."""
    if h.n != g.num_nodes:
        return False
    projected = set()
    for key in h.edges:
        for i in range(len(key)):
            for j in range(i + 1, len(key)):
                projected.add((key[i], key[j]))
    return projected == set(g.edges)


def maximal_clique_hypergraph(g: Graph, cliques: list[Key] | None = None) -> Hypergraph:
    """One hyperedge per maximal clique; always projects back to g."""
    if g.num_edges == 0:
        return Hypergraph(g.num_nodes, {}, labels=g.labels)
    if cliques is None:
        cliques = maximal_cliques(g)
    return Hypergraph(g.num_nodes, {c: 1 for c in cliques}, labels=g.labels)


def _check_sizes(h: Hypergraph, cfg: ModelConfig) -> None:
    if h.n != cfg.N:
        raise ValueError(f"hypergraph has {h.n} nodes, config expects {cfg.N}")
    big = h.max_size()
    if big > cfg.L:
        raise ValueError(
            f"hyperedge of size {big} exceeds L={cfg.L}; prior undefined"
        )


def log_prior(h: Hypergraph, cfg: ModelConfig) -> float:
    """Natural-log prior probability of ``h`` (exact to float rounding)."""
    _check_sizes(h, cfg)
    ln_mu = math.log(cfg.mu)
    counts = h.size_counts()
    ln_z = {k: 0.0 for k in range(2, cfg.L + 1)}
    for key, a in h.edges.items():
        ln_z[len(key)] += math.lgamma(a + 1)
    total = 0.0
    for k in range(2, cfg.L + 1):
        e_k = counts.get(k, 0)
        total += (
            math.lgamma(e_k + 1)
            - ln_z[k]
            - ln_mu
            - e_k * cfg.log_binom[k]
            - (e_k + 1) * cfg.ln_one_plus_inv_mu
        )
    return total


def log_prior_delta(h: Hypergraph, key, delta: int, cfg: ModelConfig) -> float:
    """log_prior(h') - log_prior(h) for one multiplicity step, in O(1).

    For delta=+1 on a size-k key with current multiplicity A:
        ln(E_k + 1) - ln(A + 1) - ln C(N, k) - ln(1 + 1/mu)
    and the negation with (E_k, A) in place of (E_k + 1, A + 1) for delta=-1.
    """
    key = canonical_key(key)
    k = len(key)
    if k < 2 or k > cfg.L:
        raise ValueError(f"key size {k} outside [2, {cfg.L}]")
    a = h.multiplicity(key)
    e_k = h.size_counts().get(k, 0)
    if delta == 1:
        return (
            math.log(e_k + 1) - math.log(a + 1)
            - cfg.log_binom[k] - cfg.ln_one_plus_inv_mu
        )
    if delta == -1:
        if a < 1:
            raise ValueError(f"decrement of absent key {key}")
        return (
            math.log(a) - math.log(e_k)
            + cfg.log_binom[k] + cfg.ln_one_plus_inv_mu
        )
    raise ValueError("delta must be +1 or -1")


def description_length(h: Hypergraph, cfg: ModelConfig) -> float:
    """Bits needed to transmit the hypergraph under the shared model.

    This equals a description length of the underlying graph only when the
    hypergraph actually projects to it."""
    return -log_prior(h, cfg) / LN2


def parse_hypergraph(text: str, graph: Graph | None = None) -> Hypergraph:
    """Parse hyperedge lines: space-separated node labels, one hyperedge per
    line, with an optional leading ``m:`` multiplicity prefix. When ``graph``
    is given, labels resolve against it; otherwise labels are interned in
    first-appearance order."""
    labels: list[str] = [] if graph is None else list(graph.labels)
    id_of: dict[str, int] = (
        {} if graph is None else {lab: i for i, lab in enumerate(labels)}
    )

    def intern(lab: str, line_no: int) -> int:
        i = id_of.get(lab)
        if i is None:
            if graph is not None:
                raise GraphFormatError(
                    f"unknown node label {lab!r}", line_no
                )
            i = len(labels)
            id_of[lab] = i
            labels.append(lab)
        return i

    entries: list[tuple[list[str], int, int]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        mult = 1
        if parts[0].endswith(":"):
            head = parts[0][:-1]
            if not head.isdigit() or int(head) < 1:
                raise GraphFormatError(
                    f"bad multiplicity prefix {parts[0]!r}", line_no
                )
            mult = int(head)
            parts = parts[1:]
        if len(parts) < 2:
            raise GraphFormatError("hyperedge needs at least 2 nodes", line_no)
        if len(set(parts)) != len(parts):
            raise GraphFormatError("repeated node in hyperedge", line_no)
        entries.append((parts, mult, line_no))

    # first pass interns labels so n is known before any hyperedge is added
    if graph is None:
        for parts, _, line_no in entries:
            for lab in parts:
                intern(lab, line_no)
    h = Hypergraph(len(labels), labels=labels)
    for parts, mult, line_no in entries:
        ids = [intern(lab, line_no) for lab in parts]
        h.add(tuple(sorted(ids)), mult)
    return h


def load_hypergraph(path, graph: Graph | None = None) -> Hypergraph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_hypergraph(fh.read(), graph)


def format_hypergraph(h: Hypergraph) -> str:
    """Deterministic serialization: label keys in lexicographic order, with
    an ``m:`` prefix only for multiplicities above 1."""
    lines = []
    for lab_key, mult in sorted(
        (h.label_key(k), m) for k, m in h.edges.items()
    ):
        prefix = f"{mult}: " if mult > 1 else ""
        lines.append(prefix + " ".join(lab_key))
    return "\n".join(lines) + ("\n" if lines else "")


def save_hypergraph(h: Hypergraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_hypergraph(h))
