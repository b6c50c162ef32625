"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with ``pytest tests/test_acceptance.py -v -s``).

Criteria bound to external datasets (the football network, extra bipartite
corpora) skip with instructions when the files are absent; everything else
runs standalone. Tolerances are pinned here and nowhere else.
"""

import itertools
import math
import random
import statistics
import time

import pytest

from datasets import BIPARTITE_SKIP, FOOTBALL_SKIP, bipartite_datasets, football_graph
from oracles import clique_keys, exact_marginals
from hyperrec.cliques import maximal_cliques
from hyperrec.estimators import classify_uncertain, compression, entropy
from hyperrec.graph import Graph
from hyperrec.model import (
    Hypergraph,
    ModelConfig,
    description_length,
    log_prior,
    log_prior_delta,
    make_config,
    maximal_clique_hypergraph,
)
from hyperrec.rng import derive_seed
from hyperrec.sampler import SamplerConfig, run, run_chains
from hyperrec.synth import (
    bipartite_to_hypergraph,
    jaccard,
    make_planted_instance,
    run_planted_experiment,
)

SEED = 20260809


def report(criterion: str, ok: bool, detail: str = ""):
    print(f"\n[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")
    assert ok, f"{criterion}: {detail}"


@pytest.fixture(scope="module")
def football():
    g = football_graph()
    if g is None:
        pytest.skip(FOOTBALL_SKIP)
    return g


def test_criterion_01_baseline_description_length_exact(football):
    """Maximal-clique hypergraph of the football network costs 4246.5 bits
    (+-1%), deterministically, in under 5 seconds."""
    t0 = time.perf_counter()
    cliques = maximal_cliques(football)
    cfg = make_config(football, cliques)
    sigma = description_length(maximal_clique_hypergraph(football, cliques),
                               cfg)
    elapsed = time.perf_counter() - t0
    detail = (f"sigma'={sigma:.1f} bits (expect 4246.5 +-1%), "
              f"N={cfg.N} E={cfg.E} L={cfg.L} mu={cfg.mu:.3f}, "
              f"{elapsed:.2f}s")
    report("C1 baseline description length",
           abs(sigma - 4246.5) <= 0.01 * 4246.5 and elapsed < 5.0, detail)


def test_criterion_02_map_quality_football(football):
    """10 chains x 1e5 sweeps reach <= 2460 bits (>= 40% saving) and the
    best fit carries 25..35 hyperedges larger than pairs."""
    cliques = maximal_cliques(football)
    cfg = make_config(football, cliques)
    baseline = description_length(
        maximal_clique_hypergraph(football, cliques), cfg)
    scfg = SamplerConfig(seed=SEED, burn_in_sweeps=100_000, num_samples=0,
                         mode="map")
    t0 = time.perf_counter()
    res = run_chains(football, 10, scfg, cfg=cfg)
    elapsed = time.perf_counter() - t0
    big = sum(m for k, m in res.best.edges.items() if len(k) > 2)
    saving = compression(baseline, res.sigma_bits) / baseline
    detail = (f"sigma={res.sigma_bits:.1f} bits (<=2460), saving "
              f"{100 * saving:.1f}% (>=40%), {big} hyperedges of size>2 "
              f"(25..35), {elapsed:.0f}s")
    report("C2 MAP quality",
           res.sigma_bits <= 2460.0 and saving >= 0.40 and 25 <= big <= 35,
           detail)


def test_criterion_03_posterior_exactness_small_graphs(small_catalog, fig2):
    """On every connected graph with <= 5 nodes, sampled presence marginals
    match enumeration within 0.02 per key at 1e5 thinned samples.

    Two comparisons per graph: samples restricted to multiplicities <= 3
    against the cap-3 enumeration (the capped posterior is exactly the
    conditional law), and unrestricted samples against a cap-40 enumeration,
    whose truncation error is negligible. Comparing raw samples against the
    cap-3 enumeration would be inconsistent: the cap-3 truncation alone
    shifts marginals by up to 0.058 on these graphs.
    """
    t0 = time.perf_counter()
    worst_raw = worst_capped = 0.0
    graphs = list(small_catalog) + [fig2]
    for i, g in enumerate(graphs):
        cfg = make_config(g)
        scfg = SamplerConfig(seed=derive_seed(SEED, i), burn_in_sweeps=500,
                             thin_sweeps=15, num_samples=100_000,
                             mode="sample", engine="auto",
                             cap_marginal_stats=3)
        res = run(g, cfg=cfg, scfg=scfg)
        exact_full = exact_marginals(g, cfg, cap=40)
        exact_cap = exact_marginals(g, cfg, cap=3)
        n_raw = res.marginals.total_samples
        n_cap = res.capped_marginals.total_samples
        for key, p in exact_full.items():
            ph = res.marginals.counts.get(key, 0) / n_raw
            worst_raw = max(worst_raw, abs(ph - p))
        for key, p in exact_cap.items():
            ph = res.capped_marginals.counts.get(key, 0) / n_cap
            worst_capped = max(worst_capped, abs(ph - p))
    elapsed = time.perf_counter() - t0
    detail = (f"{len(graphs)} graphs; worst |p_hat - p|: raw {worst_raw:.4f},"
              f" capped {worst_capped:.4f} (<=0.02); {elapsed:.0f}s")
    report("C3 posterior exactness",
           worst_raw <= 0.02 and worst_capped <= 0.02, detail)


def test_criterion_04_single_edge_multiplicity_law(single_edge):
    """Stationary multiplicity distribution on a single edge is 2**-m,
    within 0.01 per mass point at 1e6 samples."""
    counts: dict[int, int] = {}
    chains = 4
    per_chain = 250_000
    for c in range(chains):
        scfg = SamplerConfig(seed=derive_seed(SEED, 100 + c),
                             burn_in_sweeps=1000, thin_sweeps=1,
                             num_samples=per_chain, mode="sample")
        res = run(single_edge, scfg=scfg)
        # E_2 equals the multiplicity of the only key
        for _, _, ek in res.diagnostics.samples:
            counts[ek[0]] = counts.get(ek[0], 0) + 1
    total = chains * per_chain
    worst = 0.0
    for m in range(1, 21):
        p_hat = counts.get(m, 0) / total
        worst = max(worst, abs(p_hat - 2.0**-m))
    detail = f"1e6 samples; worst |P(m) - 2^-m| = {worst:.4f} (<=0.01)"
    report("C4 analytic chain law", worst <= 0.01, detail)


def test_criterion_05_prior_normalization():
    """Truncated prior mass (multiplicity <= 20) on N=3, L=3 exceeds 0.999
    for mu in {0.5, 1.5, 5}.

    Known red: the criterion's cap/threshold pair is arithmetically
    unattainable at mu=5. The single size-3 key's multiplicity is geometric
    with ratio mu/(1+mu) = 5/6, so the mass beyond multiplicity 20 is
    (5/6)**21 = 0.0217 > 0.001 for ANY correct implementation; the bound
    would need a cap of at least 39. The mu in {0.5, 1.5} cases pass, and
    the mass does converge to 1 with larger caps (printed below), so the
    normalization property itself holds.
    """
    keys = [(0, 1), (0, 2), (1, 2), (0, 1, 2)]
    totals = {}
    for mu in (0.5, 1.5, 5.0):
        cfg = ModelConfig.explicit(n=3, big_l=3, mu=mu)
        total = 0.0
        for mults in itertools.product(range(21), repeat=4):
            state = {k: m for k, m in zip(keys, mults) if m}
            total += math.exp(log_prior(Hypergraph(3, state), cfg))
        totals[mu] = total
    # context for the failure: closed-form sector masses at larger caps
    for cap in (20, 40, 60):
        x3 = 5.0 / 6.0
        print(f"  [C5 context] mu=5 cap={cap}: top-key sector mass "
              f"1-(5/6)**{cap + 1} = {1 - x3 ** (cap + 1):.6f}")
    detail = ", ".join(f"mu={mu}: {t:.6f}" for mu, t in totals.items())
    report("C5 prior normalization",
           all(t > 0.999 for t in totals.values()), detail + " (all >0.999)")


def test_criterion_06_planted_recovery():
    """10 disjoint planted hyperedges (sizes 3..7, 10 noise edges, 100 spare
    nodes): the best fit equals the planted truth in >= 9 of 10 runs."""
    sizes = [3, 4, 5, 6, 7, 3, 4, 5, 6, 7]
    perfect = 0
    js = []
    for i in range(10):
        seed = derive_seed(SEED, 200 + i)
        inst = make_planted_instance(sizes, 100, 10, seed)
        res = run(inst.graph, scfg=SamplerConfig(
            seed=seed, burn_in_sweeps=2000, num_samples=0, mode="map"))
        j = jaccard(res.best, inst.truth)
        js.append(j)
        perfect += (j == 1.0)
    detail = f"perfect recoveries {perfect}/10 (>=9); J values {js}"
    report("C6 planted recovery", perfect >= 9, detail)


def test_criterion_07_compression_separation():
    """Planted graphs compress better than uniform graphs of equal density
    at every noise level in 0..200, and both description-length curves are
    nondecreasing in added edges."""
    sizes = [3, 4, 5, 6, 7, 3, 4, 5, 6, 7]
    grid = [0, 50, 100, 150, 200]
    scfg = SamplerConfig(seed=SEED, burn_in_sweeps=1500, num_samples=0,
                         mode="map")
    t0 = time.perf_counter()
    rows = run_planted_experiment(sizes, 100, grid, 10, scfg, seed=SEED)
    mean_p, mean_u = [], []
    for x in grid:
        mean_p.append(statistics.mean(
            r["sigma_planted"] for r in rows if r["extra_edges"] == x))
        mean_u.append(statistics.mean(
            r["sigma_uniform"] for r in rows if r["extra_edges"] == x))
    separated = all(p < u for p, u in zip(mean_p, mean_u))
    monotone = (all(a <= b for a, b in zip(mean_p, mean_p[1:]))
                and all(a <= b for a, b in zip(mean_u, mean_u[1:])))
    elapsed = time.perf_counter() - t0
    detail = (f"planted {[round(x) for x in mean_p]} vs uniform "
              f"{[round(x) for x in mean_u]} bits; {elapsed:.0f}s")
    report("C7 compression separation", separated and monotone, detail)


def test_criterion_08_bipartite_baseline_dominance():
    """On public bipartite datasets, the reconstruction is at least as
    similar to the planted hypergraph as the maximal-clique baseline."""
    from hyperrec.synth import run_bipartite_experiment

    data = bipartite_datasets()
    results = {}
    ok = True
    for name, text in data:
        truth = bipartite_to_hypergraph(text)
        out = run_bipartite_experiment(
            truth, SamplerConfig(seed=SEED, burn_in_sweeps=10_000,
                                 mode="map"), seed=SEED, n_chains=2)
        results[name] = (out["jaccard_map"], out["jaccard_maxclique"])
        ok = ok and out["jaccard_map"] >= out["jaccard_maxclique"]
    detail = "; ".join(f"{n}: J_map={a:.3f} >= J_mc={b:.3f}"
                       for n, (a, b) in results.items())
    if len(data) < 3:
        print(f"\n[SKIP] C8 baseline dominance: only {len(data)} dataset(s) "
              f"available, criterion needs >= 3. Partial check: {detail}")
        assert ok, detail
        pytest.skip(BIPARTITE_SKIP)
    report("C8 baseline dominance", ok, detail)


def test_criterion_09_football_uncertainty_counts(football):
    """4000 samples thinned by 1000 sweeps at alpha=0.05 give uncertain
    counts within 30% of 16 triangles / 70 edges / 9 higher-order."""
    scfg = SamplerConfig(seed=SEED, burn_in_sweeps=1000, thin_sweeps=1000,
                         num_samples=4000, mode="sample")
    t0 = time.perf_counter()
    res = run(football, scfg=scfg)
    part = classify_uncertain(res.marginals, alpha=0.05)
    edges = part.uncertain_count(2)
    triangles = part.uncertain_count(3)
    higher = part.uncertain_higher_count(3)
    elapsed = time.perf_counter() - t0
    ok = (abs(triangles - 16) <= 0.3 * 16
          and abs(edges - 70) <= 0.3 * 70
          and abs(higher - 9) <= 0.3 * 9)
    detail = (f"uncertain: {triangles} triangles (16 +-30%), {edges} edges "
              f"(70 +-30%), {higher} higher (9 +-30%); {elapsed:.0f}s")
    report("C9 uncertainty counts", ok, detail)


def test_criterion_10a_prior_monotonicity_properties():
    """Adding a duplicate or a spurious hyperedge to a minimal cover always
    lowers the posterior, across 1000 random graphs with <= 8 nodes."""
    rnd = random.Random(SEED)
    checked = 0
    graphs = 0
    while graphs < 1000:
        n = rnd.randint(3, 8)
        g = Graph([str(i) for i in range(n)],
                  [(i, j) for i in range(n) for j in range(i + 1, n)
                   if rnd.random() < rnd.choice([0.3, 0.5, 0.7])])
        if g.num_edges == 0:
            continue
        graphs += 1
        cfg = make_config(g)
        # minimal cover: partition the edges into cliques
        remaining = set(g.edges)
        cover = {}
        while remaining:
            u, v = rnd.choice(sorted(remaining))
            clique = {u, v}
            for w in range(n):
                if w not in clique and all(
                        g.has_edge(w, x) for x in clique) and all(
                        (min(w, x), max(w, x)) in remaining for x in clique):
                    clique.add(w)
            key = tuple(sorted(clique))
            cover[key] = 1
            for e in itertools.combinations(key, 2):
                remaining.discard(e)
        h = Hypergraph(n, cover)
        for key in cover:
            assert log_prior_delta(h, key, +1, cfg) < 0, (g.edges, key)
            checked += 1
        for key in clique_keys(g):
            if key not in cover:
                assert log_prior_delta(h, key, +1, cfg) < 0, (g.edges, key)
                checked += 1
    report("C10a duplicate/spurious penalties",
           True, f"{checked} additions on {graphs} graphs, all negative")


def test_criterion_10b_incremental_drift():
    """Incrementally maintained log-prior drifts < 1e-6 from a full
    recompute over 1e6 moves."""
    rnd = random.Random(4)
    g = Graph([str(i) for i in range(40)],
              [(i, j) for i in range(40) for j in range(i + 1, 40)
               if rnd.random() < 0.25])
    cliques = maximal_cliques(g)
    cfg = make_config(g, cliques)
    thin = math.ceil(1_000_000 / len(cliques))
    final = {}
    scfg = SamplerConfig(seed=SEED, burn_in_sweeps=0, thin_sweeps=thin,
                         num_samples=1, mode="sample")
    res = run(g, cfg=cfg, scfg=scfg, sink=lambda h: final.setdefault("h", h))
    incremental = -res.diagnostics.samples[-1][1] * math.log(2.0)
    full = log_prior(final["h"], cfg)
    moves = thin * len(cliques)
    drift = abs(incremental - full)
    report("C10b incremental drift", drift < 1e-6,
           f"drift {drift:.2e} over {moves} moves (<1e-6)")


def test_criterion_10c_entropy_identities():
    """S(1/2) = 1 and S(p) = S(1-p) hold exactly."""
    ok = entropy(0.5) == 1.0 and entropy(0.0) == 0.0 and entropy(1.0) == 0.0
    for i in range(1, 4096):
        p = i / 4096  # dyadic: 1-p is exact, so symmetry must be bit-exact
        ok = ok and entropy(p) == entropy(1 - p)
    report("C10c entropy identities", ok,
           "S(1/2)==1 and S(p)==S(1-p) bit-exact on 4095 dyadic points")
