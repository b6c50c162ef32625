"""Independent oracles used to pin expected values in tests.

Everything here deliberately avoids the library's own computational paths:
cliques come from subset enumeration, priors from direct factorial
arithmetic, and posterior marginals either from full enumeration over capped
multiplicity vectors or from an inclusion-exclusion sum over uncovered edge
sets (the two agree, and the second stays cheap on denser graphs).
"""

from __future__ import annotations

import itertools
import math

from hyperrec.graph import Graph
from hyperrec.model import ModelConfig


def brute_maximal_cliques(g: Graph) -> list[tuple[int, ...]]:
    """Inclusion-maximal cliques of size >= 2 by checking every node subset."""
    nodes = range(g.num_nodes)
    cliques = []
    for r in range(2, g.num_nodes + 1):
        for sub in itertools.combinations(nodes, r):
            if all(g.has_edge(u, v)
                   for u, v in itertools.combinations(sub, 2)):
                cliques.append(sub)
    csets = [set(c) for c in cliques]
    out = [c for c, cs in zip(cliques, csets)
           if not any(cs < other for other in csets)]
    return sorted(out)


def clique_keys(g: Graph) -> list[tuple[int, ...]]:
    """Every clique of size >= 2 (all candidate hyperedges)."""
    nodes = range(g.num_nodes)
    keys = []
    for r in range(2, g.num_nodes + 1):
        for sub in itertools.combinations(nodes, r):
            if all(g.has_edge(u, v)
                   for u, v in itertools.combinations(sub, 2)):
                keys.append(sub)
    return keys


def naive_log_prior(edges: dict[tuple[int, ...], int], n: int, big_l: int,
                    mu: float) -> float:
    """Direct evaluation of the integrated prior using plain factorials."""
    total = 0.0
    for k in range(2, big_l + 1):
        keys_k = {key: a for key, a in edges.items() if len(key) == k}
        e_k = sum(keys_k.values())
        z_k = 1
        for a in keys_k.values():
            z_k *= math.factorial(a)
        c_nk = math.comb(n, k)
        total += (
            math.log(math.factorial(e_k))
            - math.log(z_k)
            - math.log(mu)
            - e_k * math.log(c_nk)
            - (e_k + 1) * math.log(1.0 + 1.0 / mu)
        )
    return total


def posterior_enumeration(g: Graph, cfg: ModelConfig, cap: int):
    """All hypergraphs with per-key multiplicity <= cap that project to g,
    with their normalized posterior weights. Exponential in the number of
    clique keys; keep graphs tiny."""
    keys = clique_keys(g)
    edges = sorted(g.edges)
    states = []
    weights = []
    for mults in itertools.product(range(cap + 1), repeat=len(keys)):
        present = [k for k, m in zip(keys, mults) if m > 0]
        covered = set()
        for k in present:
            covered.update(itertools.combinations(k, 2))
        if any(e not in covered for e in edges):
            continue
        state = {k: m for k, m in zip(keys, mults) if m > 0}
        states.append(state)
        weights.append(
            math.exp(naive_log_prior(state, cfg.N, cfg.L, cfg.mu)))
    z = sum(weights)
    return [(s, w / z) for s, w in zip(states, weights)]


def marginals_from_enumeration(g: Graph, cfg: ModelConfig, cap: int):
    post = posterior_enumeration(g, cfg, cap)
    out: dict[tuple[int, ...], float] = {}
    for state, p in post:
        for key in state:
            out[key] = out.get(key, 0.0) + p
    return out


def _present_weight_tables(cfg: ModelConfig, k: int, max_present: int,
                           cap: int) -> list[float]:
    """W[s] = total relative prior weight of any fixed set of s present
    size-k keys, summed over their multiplicities in 1..cap.

    Relative weight of a multiplicity vector A is E! * x**E / prod(A_i!)
    with E = sum(A) and x = 1 / (C(N, k) * (1 + 1/mu)); the per-size
    constants shared by every hypergraph cancel in the posterior.
    """
    x = math.exp(-(cfg.log_binom[k] + cfg.ln_one_plus_inv_mu))
    single = [0.0] * (cap + 1)
    for a in range(1, cap + 1):
        single[a] = x**a / math.factorial(a)
    tables = [1.0]
    conv = [1.0]  # s-fold convolution of `single`, starting with s = 0
    for s in range(1, max_present + 1):
        new = [0.0] * (s * cap + 1)
        for t, c in enumerate(conv):
            if c == 0.0:
                continue
            for a in range(1, cap + 1):
                new[t + a] += c * single[a]
        conv = new
        # t! * conv[t] via lgamma: exact factorials overflow floats at t ~ 170
        tables.append(sum(
            math.exp(math.lgamma(t + 1) + math.log(c))
            for t, c in enumerate(conv) if c > 0.0))
    return tables


def exact_marginals(g: Graph, cfg: ModelConfig, cap: int):
    """Posterior presence marginals over hypergraphs with multiplicity <= cap,
    via inclusion-exclusion on the set of uncovered edges. Cost is
    O(2**E * keys); exact up to float rounding."""
    keys = clique_keys(g)
    edges = sorted(g.edges)
    n_edges = len(edges)
    edge_pos = {e: i for i, e in enumerate(edges)}
    key_mask = []
    for key in keys:
        m = 0
        for e in itertools.combinations(key, 2):
            m |= 1 << edge_pos[e]
        key_mask.append(m)
    sizes = sorted({len(k) for k in keys})
    keys_by_size = {s: [i for i, k in enumerate(keys) if len(k) == s]
                    for s in sizes}
    w_tab = {s: _present_weight_tables(cfg, s, len(keys_by_size[s]), cap)
             for s in sizes}
    # F[s][n] = sum over how many of n allowed keys are present
    f_free = {
        s: [sum(math.comb(n, c) * w_tab[s][c] for c in range(n + 1))
            for n in range(len(keys_by_size[s]) + 1)]
        for s in sizes
    }
    # same, with one designated key forced present
    f_forced = {
        s: [sum(math.comb(n - 1, c - 1) * w_tab[s][c]
                for c in range(1, n + 1))
            for n in range(len(keys_by_size[s]) + 1)]
        for s in sizes
    }

    subsets = list(range(1 << n_edges))
    allowed_count = []
    signs = []
    allowed_masks = []
    for t in subsets:
        sign = -1 if bin(t).count("1") % 2 else 1
        counts = {s: 0 for s in sizes}
        mask_allowed = 0
        for i, km in enumerate(key_mask):
            if km & t == 0:
                counts[len(keys[i])] += 1
                mask_allowed |= 1 << i
        allowed_count.append(counts)
        signs.append(sign)
        allowed_masks.append(mask_allowed)

    z = 0.0
    for t in subsets:
        term = signs[t]
        for s in sizes:
            term *= f_free[s][allowed_count[t][s]]
        z += term

    out = {}
    for i, key in enumerate(keys):
        s0 = len(key)
        num = 0.0
        for t in subsets:
            if not (allowed_masks[t] >> i) & 1:
                continue
            term = signs[t] * f_forced[s0][allowed_count[t][s0]]
            for s in sizes:
                if s != s0:
                    term *= f_free[s][allowed_count[t][s]]
            num += term
        out[key] = num / z
    return out


def _canonical_edge_form(n: int, edges: frozenset) -> tuple:
    best = None
    for perm in itertools.permutations(range(n)):
        form = tuple(sorted(
            (min(perm[u], perm[v]), max(perm[u], perm[v])) for u, v in edges))
        if best is None or form < best:
            best = form
    return best


def connected_graphs_upto(n_max: int) -> list[Graph]:
    """All connected graphs with 2..n_max nodes, one per isomorphism class."""
    out = []
    for n in range(2, n_max + 1):
        pairs = list(itertools.combinations(range(n), 2))
        seen = set()
        for bits in range(1 << len(pairs)):
            edges = frozenset(p for i, p in enumerate(pairs)
                              if (bits >> i) & 1)
            # connectivity over all n nodes
            adj = {u: set() for u in range(n)}
            for u, v in edges:
                adj[u].add(v)
                adj[v].add(u)
            stack, comp = [0], {0}
            while stack:
                u = stack.pop()
                for v in adj[u]:
                    if v not in comp:
                        comp.add(v)
                        stack.append(v)
            if len(comp) != n:
                continue
            canon = _canonical_edge_form(n, edges)
            if canon in seen:
                continue
            seen.add(canon)
            out.append(Graph([str(i) for i in range(n)], edges))
    return out
