"""Metropolis-Hastings random walk over hypergraphs consistent with a graph.

The chain state is the multiplicity assignment on clique factors. Moves pick
a maximal factor uniformly, a sub-clique size uniformly in {2..k}, one of the
C(k, size) sub-cliques uniformly, and a +/-1 multiplicity step (forced to +1
at multiplicity zero). A move that would uncover an edge has zero posterior
support and is always rejected. Because sub-clique selection probabilities
are identical for a move and its reverse, only the +/-1 asymmetry enters the
proposal ratio: 1/2 for a forced increment, 2 for a decrement to zero.

Two engines produce bit-identical chains from the same seed: a pure-Python
reference (this module) and a compiled kernel (``_kernel``). The reference
is the readable definition of a move; the kernel is what ``run`` uses by
default.
"""

from __future__ import annotations

import math
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cliques import FactorGraph, maximal_cliques, subfactor_key
from .estimators import MarginalTable
from .graph import Graph
from .model import (
    LN2,
    Hypergraph,
    Key,
    ModelConfig,
    log_prior,
    make_config,
)
from .rng import GENERATOR_NAME, SplitMix64, derive_seed

__all__ = [
    "Move",
    "SamplerConfig",
    "ChainState",
    "Diagnostics",
    "RunResult",
    "MultiChainResult",
    "init_chain",
    "propose",
    "acceptance_log_ratio",
    "step",
    "sweep",
    "run",
    "run_chains",
]

LN_TWO = math.log(2.0)
LN_HALF = -LN_TWO
NEG_INF = float("-inf")


@dataclass(frozen=True)
class Move:
    key: Key
    delta: int


@dataclass
class SamplerConfig:
    """Chain schedule. ``mode="map"`` runs the same number of sweeps as the
    sampling schedule but records nothing, tracking only the best state."""

    seed: int = 1
    burn_in_sweeps: int = 1000
    thin_sweeps: int = 1
    num_samples: int = 0
    mode: str = "sample"  # "sample" | "map"
    engine: str = "auto"  # "auto" | "numba" | "python"
    cap_marginal_stats: int = 0  # >0: extra marginals over samples with all A <= cap

    def __post_init__(self):
        if self.mode not in ("sample", "map"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.engine not in ("auto", "numba", "python"):
            raise ValueError(f"unknown engine {self.engine!r}")
        if min(self.burn_in_sweeps, self.num_samples,
               self.cap_marginal_stats) < 0:
            raise ValueError("sweep/sample/cap counts must be >= 0")
        if self.mode == "sample" and self.num_samples > 0 and self.thin_sweeps < 1:
            raise ValueError("thin_sweeps must be >= 1 in sampling mode")

    def total_sweeps(self) -> int:
        return self.burn_in_sweeps + self.num_samples * self.thin_sweeps


def make_ln_table(cfg: ModelConfig) -> np.ndarray:
    """ln(i) lookup shared by both engines (index 0 unused)."""
    size = max(1024, 4 * cfg.E + 64)
    tab = np.zeros(size, dtype=np.float64)
    tab[1:] = np.log(np.arange(1, size, dtype=np.float64))
    return tab


class ChainState:
    """One chain's mutable state (reference engine).

    Owned by a single thread of execution; distinct chains own distinct
    copies. The stored log-prior is updated incrementally and must agree
    with a full recompute to within accumulated float rounding.
    """

    def __init__(self, graph: Graph, cfg: ModelConfig, scfg: SamplerConfig,
                 cliques: list[Key] | None = None):
        self.graph = graph
        self.cfg = cfg
        self.fg = FactorGraph(graph, cliques)
        self.fg.activate_maximal_cliques()
        self.rng = SplitMix64(scfg.seed)
        self.ln_tab = make_ln_table(cfg)
        self.e_k = [0] * (cfg.L + 1)
        for key, a in self.fg.active.items():
            self.e_k[len(key)] += a
        self.log_prior = log_prior(self._snapshot_hypergraph(), cfg)
        self.best: dict[Key, int] = dict(self.fg.active)
        self.best_log_prior = self.log_prior
        self.proposed = [0] * (cfg.L + 1)
        self.accepted = [0] * (cfg.L + 1)
        self.sweep_index = 0

    def _snapshot_hypergraph(self) -> Hypergraph:
        return Hypergraph(self.graph.num_nodes, dict(self.fg.active),
                          labels=self.graph.labels)

    def _ln(self, x: int) -> float:
        tab = self.ln_tab
        return float(tab[x]) if x < tab.size else math.log(x)

    def _delta_log_prior(self, k: int, a: int, e_k: int, delta: int) -> float:
        cfg = self.cfg
        if delta == 1:
            return (self._ln(e_k + 1) - self._ln(a + 1)
                    - cfg.log_binom[k] - cfg.ln_one_plus_inv_mu)
        return (self._ln(a) - self._ln(e_k)
                + cfg.log_binom[k] + cfg.ln_one_plus_inv_mu)

    def sigma_bits(self) -> float:
        return -self.log_prior / LN2

    def best_sigma_bits(self) -> float:
        return -self.best_log_prior / LN2

    def best_hypergraph(self) -> Hypergraph:
        return Hypergraph(self.graph.num_nodes, dict(self.best),
                          labels=self.graph.labels)


def init_chain(g: Graph, cfg: ModelConfig, scfg: SamplerConfig,
               cliques: list[Key] | None = None) -> ChainState:
    """Chain initialized at the maximal-clique hypergraph (close to the good
    local optima, which is what makes the walk converge in practice)."""
    if g.num_edges == 0:
        raise ValueError("cannot sample on an edgeless graph")
    return ChainState(g, cfg, scfg, cliques)


def propose(state: ChainState) -> Move:
    """Draw one move. Consumes RNG draws in the fixed order (factor, size,
    subset, direction); degenerate choices with a single outcome consume
    nothing, which the compiled kernel mirrors exactly."""
    fg = state.fg
    rng = state.rng
    factor = fg.maximal_factors[rng.bounded_int(len(fg.maximal_factors))]
    k = len(factor)
    size = 2 + rng.bounded_int(k - 1)
    index = rng.bounded_int(math.comb(k, size))
    key = subfactor_key(factor, size, index)
    if fg.active.get(key, 0) == 0:
        delta = 1  # forced increment at zero
    else:
        delta = 1 if rng.bounded_int(2) == 0 else -1
    return Move(key, delta)


def acceptance_log_ratio(state: ChainState, move: Move) -> float:
    """Unclamped log acceptance ratio: proposal asymmetry plus prior change.

    Returns -inf when the move would leave an edge uncovered (zero
    likelihood). For a valid move/reverse pair the unclamped ratios sum to
    zero, which is the assertable form of detailed balance here.
    """
    key, delta = move.key, move.delta
    k = len(key)
    a = state.fg.active.get(key, 0)
    e_k = state.e_k[k]
    if delta == 1:
        lnq = LN_HALF if a == 0 else 0.0
        return lnq + state._delta_log_prior(k, a, e_k, 1)
    if a == 0:
        raise ValueError(f"decrement proposed for absent key {key}")
    if a == 1:
        cov = state.fg.coverage
        for i in range(k):
            for j in range(i + 1, k):
                if cov[(key[i], key[j])] < 2:
                    return NEG_INF
    lnq = LN_TWO if a == 1 else 0.0
    return lnq + state._delta_log_prior(k, a, e_k, -1)


def step(state: ChainState) -> bool:
    """One propose/accept step; returns True when the move was applied."""
    move = propose(state)
    k = len(move.key)
    state.proposed[k] += 1
    ln_a = acceptance_log_ratio(state, move)
    if ln_a == NEG_INF:
        return False
    if ln_a < 0.0:
        u = state.rng.next_double()
        if not math.log(u) < ln_a:
            return False
    a = state.fg.active.get(move.key, 0)
    dlp = state._delta_log_prior(k, a, state.e_k[k], move.delta)
    state.fg.apply_delta(move.key, move.delta)
    state.e_k[k] += move.delta
    state.accepted[k] += 1
    state.log_prior += dlp
    if state.log_prior > state.best_log_prior:
        state.best_log_prior = state.log_prior
        state.best = dict(state.fg.active)
    return True


def sweep(state: ChainState) -> None:
    """One proposal per maximal factor. Sweeps are the thinning unit, so
    thinning scales with problem size."""
    for _ in range(len(state.fg.maximal_factors)):
        step(state)
    state.sweep_index += 1


@dataclass
class Diagnostics:
    seed: int
    rng_name: str
    engine: str
    n_maximal_factors: int
    sweeps_run: int = 0
    proposed_by_size: dict[int, int] = field(default_factory=dict)
    accepted_by_size: dict[int, int] = field(default_factory=dict)
    # one row per recorded sample: (sweep index, sigma bits, E_k for k=2..L)
    samples: list[tuple[int, float, tuple[int, ...]]] = field(default_factory=list)
    wall_time_s: float = 0.0
    capped_sample_total: int = 0

    def acceptance_rate(self) -> float:
        p = sum(self.proposed_by_size.values())
        a = sum(self.accepted_by_size.values())
        return a / p if p else 0.0


@dataclass
class RunResult:
    best: Hypergraph
    sigma_bits: float
    diagnostics: Diagnostics
    marginals: MarginalTable | None = None
    capped_marginals: MarginalTable | None = None


def _map_trace_stride(total_sweeps: int) -> int:
    return max(1, total_sweeps // 128)


def _empty_graph_result(g: Graph, scfg: SamplerConfig) -> RunResult:
    warnings.warn("edgeless graph: the empty hypergraph is the only "
                  "reconstruction; description length is 0 bits")
    diag = Diagnostics(seed=scfg.seed, rng_name=GENERATOR_NAME,
                       engine="none", n_maximal_factors=0)
    empty = Hypergraph(g.num_nodes, {}, labels=g.labels)
    marg = MarginalTable() if scfg.mode == "sample" else None
    return RunResult(empty, 0.0, diag, marg, None)


def _resolve_engine(name: str) -> str:
    if name == "auto":
        from . import _kernel
        return "numba" if _kernel.HAVE_NUMBA else "python"
    if name == "numba":
        from . import _kernel
        if not _kernel.HAVE_NUMBA:
            raise RuntimeError("numba engine requested but numba is unavailable")
    return name


def run(g: Graph, cfg: ModelConfig | None = None,
        scfg: SamplerConfig | None = None, sink=None,
        cliques: list[Key] | None = None) -> RunResult:
    """Burn in, then record ``num_samples`` snapshots separated by
    ``thin_sweeps`` sweeps (delivered to ``sink`` when given), tracking the
    minimum-description-length hypergraph throughout."""
    scfg = scfg if scfg is not None else SamplerConfig()
    if g.num_edges == 0:
        return _empty_graph_result(g, scfg)
    if cliques is None:
        cliques = maximal_cliques(g)
    if cfg is None:
        cfg = make_config(g, cliques)
    engine = _resolve_engine(scfg.engine)
    t0 = time.perf_counter()
    if engine == "numba":
        result = _run_kernel(g, cfg, scfg, cliques, sink)
    else:
        result = _run_python(g, cfg, scfg, cliques, sink)
    result.diagnostics.wall_time_s = time.perf_counter() - t0
    return result


def _run_python(g: Graph, cfg: ModelConfig, scfg: SamplerConfig,
                cliques: list[Key], sink) -> RunResult:
    state = init_chain(g, cfg, scfg, cliques)
    recording = scfg.mode == "sample"
    marg = MarginalTable() if recording else None
    capped = MarginalTable() if recording and scfg.cap_marginal_stats else None
    diag = Diagnostics(seed=scfg.seed, rng_name=GENERATOR_NAME,
                       engine="python",
                       n_maximal_factors=len(state.fg.maximal_factors))

    def ek_row():
        return tuple(state.e_k[2:cfg.L + 1])

    if recording:
        for _ in range(scfg.burn_in_sweeps):
            sweep(state)
        for _ in range(scfg.num_samples):
            for _ in range(scfg.thin_sweeps):
                sweep(state)
            snap = dict(state.fg.active)
            marg.accumulate_keys(snap.keys())
            if capped is not None and all(
                    a <= scfg.cap_marginal_stats for a in snap.values()):
                capped.accumulate_keys(snap.keys())
            diag.samples.append((state.sweep_index, state.sigma_bits(), ek_row()))
            if sink is not None:
                sink(state._snapshot_hypergraph())
    else:
        total = scfg.total_sweeps()
        stride = _map_trace_stride(total)
        for i in range(total):
            sweep(state)
            if (i + 1) % stride == 0 or i + 1 == total:
                diag.samples.append((state.sweep_index, state.sigma_bits(), ek_row()))

    diag.sweeps_run = state.sweep_index
    diag.proposed_by_size = {k: v for k, v in enumerate(state.proposed) if v}
    diag.accepted_by_size = {k: v for k, v in enumerate(state.accepted) if v}
    if capped is not None:
        diag.capped_sample_total = capped.total_samples
    return RunResult(state.best_hypergraph(), state.best_sigma_bits(), diag,
                     marg, capped)


def _run_kernel(g: Graph, cfg: ModelConfig, scfg: SamplerConfig,
                cliques: list[Key], sink) -> RunResult:
    from ._kernel import KernelChain

    chain = KernelChain(g, cfg, scfg.seed, cliques,
                        cap_stats=scfg.cap_marginal_stats)
    recording = scfg.mode == "sample"
    diag = Diagnostics(seed=scfg.seed, rng_name=GENERATOR_NAME,
                       engine="numba", n_maximal_factors=len(cliques))

    if recording:
        chain.run_sweeps(scfg.burn_in_sweeps)
        for _ in range(scfg.num_samples):
            chain.run_sweeps(scfg.thin_sweeps)
            chain.tick()
            diag.samples.append(
                (chain.sweeps_run, chain.sigma_bits(), chain.ek_row()))
            if sink is not None:
                sink(Hypergraph(g.num_nodes, chain.snapshot(),
                                labels=g.labels))
        marg, capped = chain.marginal_tables()
        if not scfg.cap_marginal_stats:
            capped = None
    else:
        total = scfg.total_sweeps()
        stride = _map_trace_stride(total)
        done = 0
        while done < total:
            n = min(stride, total - done)
            chain.run_sweeps(n)
            done += n
            diag.samples.append(
                (chain.sweeps_run, chain.sigma_bits(), chain.ek_row()))
        marg = capped = None

    diag.sweeps_run = chain.sweeps_run
    diag.proposed_by_size = chain.proposed_by_size()
    diag.accepted_by_size = chain.accepted_by_size()
    diag.capped_sample_total = chain.capped_ticks()
    best_edges, best_logp = chain.best()
    best = Hypergraph(g.num_nodes, best_edges, labels=g.labels)
    return RunResult(best, -best_logp / LN2, diag, marg, capped)


@dataclass
class MultiChainResult:
    best: Hypergraph
    sigma_bits: float
    best_chain_index: int
    chains: list[RunResult]
    marginals: MarginalTable | None = None
    capped_marginals: MarginalTable | None = None


def run_chains(g: Graph, n_chains: int, scfg: SamplerConfig,
               cfg: ModelConfig | None = None, sink=None,
               max_workers: int | None = None) -> MultiChainResult:
    """Independent chains with seeds split from ``scfg.seed`` by a fixed
    rule; marginal tables merge by summing counts and the best hypergraph is
    the lowest-description-length state across chains (ties to the lowest
    chain index, so the result does not depend on scheduling)."""
    if n_chains < 1:
        raise ValueError("need at least one chain")
    if g.num_edges == 0:
        r = _empty_graph_result(g, scfg)
        return MultiChainResult(r.best, r.sigma_bits, 0, [r], r.marginals, None)
    cliques = maximal_cliques(g)
    if cfg is None:
        cfg = make_config(g, cliques)
    seeds = [derive_seed(scfg.seed, i) for i in range(n_chains)]
    configs = [
        SamplerConfig(seed=s, burn_in_sweeps=scfg.burn_in_sweeps,
                      thin_sweeps=scfg.thin_sweeps,
                      num_samples=scfg.num_samples, mode=scfg.mode,
                      engine=scfg.engine,
                      cap_marginal_stats=scfg.cap_marginal_stats)
        for s in seeds
    ]
    if _resolve_engine(scfg.engine) == "numba":
        from ._kernel import warm_up
        warm_up()  # compile outside the thread pool

    workers = max_workers or min(n_chains, os.cpu_count() or 1)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(
                lambda c: run(g, cfg, c, sink=sink, cliques=cliques), configs))
    else:
        results = [run(g, cfg, c, sink=sink, cliques=cliques) for c in configs]

    best_idx = min(range(n_chains), key=lambda i: (results[i].sigma_bits, i))
    marg = None
    capped = None
    if scfg.mode == "sample":
        marg = MarginalTable()
        for r in results:
            marg = marg.merge(r.marginals)
        if scfg.cap_marginal_stats:
            capped = MarginalTable()
            for r in results:
                capped = capped.merge(r.capped_marginals)
    return MultiChainResult(results[best_idx].best,
                            results[best_idx].sigma_bits,
                            best_idx, results, marg, capped)
