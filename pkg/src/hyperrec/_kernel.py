"""Compiled hot loop for the factor sampler.

Mirrors the reference engine in ``sampler.py`` draw for draw and float for
float: same splitmix64 stream, same degenerate-choice conventions, same
log-table lookups, same accumulation order. Parity is enforced by tests that
compare whole chains across engines.

State layout: maximal factors live in flat arrays; sub-clique factors
materialize lazily as slots in an open-addressing hash table keyed by the
sorted node ids. A slot is never freed; multiplicity zero means inactive.
Edge coverage counters live in an array aligned with the graph's sorted
edge codes (u * N + v).
"""

from __future__ import annotations

import math

import numpy as np

try:
    import numba
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

HAVE_NUMBA = numba is not None

# ctr indices
C_NSLOTS, C_ACTIVE, C_NOVER, C_TICKS, C_CAPPED, C_BEST = range(6)
# fctr indices
F_LOGP, F_BEST = range(2)

STATUS_OK = 0
STATUS_GROW = 1

if HAVE_NUMBA:
    U64 = np.uint64

    @njit(numba.uint64(numba.uint64[::1]), cache=True, nogil=True, inline="always")
    def _rng_next(state):
        s = state[0] + U64(0x9E3779B97F4A7C15)
        state[0] = s
        z = (s ^ (s >> U64(30))) * U64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> U64(27))) * U64(0x94D049BB133111EB)
        return z ^ (z >> U64(31))

    @njit(numba.int64(numba.uint64[::1], numba.int64), cache=True, nogil=True,
          inline="always")
    def _rng_bounded(state, n):
        # consumes nothing when n <= 1; rejection keeps the draw unbiased
        if n <= 1:
            return 0
        un = U64(n)
        t = (U64(0) - un) % un
        while True:
            x = _rng_next(state)
            if x >= t:
                return np.int64(x % un)

    @njit(numba.float64(numba.uint64[::1]), cache=True, nogil=True,
          inline="always")
    def _rng_double(state):
        x = _rng_next(state)
        return (np.float64(x >> U64(11)) + 1.0) * 2.0**-53

    @njit(cache=True, nogil=True, inline="always")
    def _ln_int(x, ln_tab):
        if x < ln_tab.size:
            return ln_tab[x]
        return math.log(np.float64(x))

    @njit(cache=True, nogil=True, inline="always")
    def _edge_idx(codes, code):
        lo = 0
        hi = codes.size
        while lo < hi:
            mid = (lo + hi) >> 1
            if codes[mid] < code:
                lo = mid + 1
            else:
                hi = mid
        return lo

    @njit(cache=True, nogil=True, inline="always")
    def _hash_key(key_buf, klen):
        h = U64(0xCBF29CE484222325)
        h = (h ^ U64(klen)) * U64(0x100000001B3)
        for i in range(klen):
            h = (h ^ U64(key_buf[i] + 1)) * U64(0x100000001B3)
        return h

    @njit(cache=True, nogil=True)
    def _lookup_or_create(table, slot_nodes, slot_len, slot_mult, slot_hash,
                          slot_active_pos, kmax, key_buf, klen, ctr):
        h = _hash_key(key_buf, klen)
        mask = np.int64(table.size - 1)
        i = np.int64(h & U64(mask))
        while True:
            s = table[i]
            if s == -1:
                s = ctr[C_NSLOTS]
                ctr[C_NSLOTS] += 1
                slot_len[s] = klen
                slot_hash[s] = h
                slot_mult[s] = 0
                slot_active_pos[s] = -1
                base = s * kmax
                for t in range(klen):
                    slot_nodes[base + t] = key_buf[t]
                table[i] = s
                return s
            if slot_hash[s] == h and slot_len[s] == klen:
                base = s * kmax
                same = True
                for t in range(klen):
                    if slot_nodes[base + t] != key_buf[t]:
                        same = False
                        break
                if same:
                    return s
            i = (i + 1) & mask

    @njit(cache=True, nogil=True)
    def _rebuild_table(table, slot_hash, n_slots):
        table[:] = -1
        mask = np.int64(table.size - 1)
        for s in range(n_slots):
            i = np.int64(slot_hash[s] & U64(mask))
            while table[i] != -1:
                i = (i + 1) & mask
            table[i] = np.int64(s)

    @njit(cache=True, nogil=True, inline="always")
    def _save_best(active_list, slot_nodes, slot_len, slot_mult, kmax,
                   best_nodes, best_len, best_mult, ctr, fctr):
        ac = ctr[C_ACTIVE]
        ctr[C_BEST] = ac
        fctr[F_BEST] = fctr[F_LOGP]
        for t in range(ac):
            s = active_list[t]
            l = slot_len[s]
            best_len[t] = l
            bb = t * kmax
            sb = s * kmax
            for q in range(l):
                best_nodes[bb + q] = slot_nodes[sb + q]
            best_mult[t] = slot_mult[s]

    @njit(cache=True, nogil=True)
    def _save_best_now(active_list, slot_nodes, slot_len, slot_mult, kmax,
                       best_nodes, best_len, best_mult, ctr, fctr):
        _save_best(active_list, slot_nodes, slot_len, slot_mult, kmax,
                   best_nodes, best_len, best_mult, ctr, fctr)

    @njit(cache=True, nogil=True)
    def _force_insert(table, slot_nodes, slot_len, slot_mult, slot_hash,
                      slot_active_pos, active_list, kmax, key_buf, klen,
                      n_nodes, edge_codes, coverage, ek, ctr, cap_stats):
        s = _lookup_or_create(table, slot_nodes, slot_len, slot_mult,
                              slot_hash, slot_active_pos, kmax, key_buf,
                              klen, ctr)
        a = slot_mult[s]
        slot_mult[s] = a + 1
        ek[klen] += 1
        if a == 0:
            active_list[ctr[C_ACTIVE]] = s
            slot_active_pos[s] = ctr[C_ACTIVE]
            ctr[C_ACTIVE] += 1
        if cap_stats > 0 and a == cap_stats:
            ctr[C_NOVER] += 1
        for ii in range(klen):
            u = np.int64(key_buf[ii])
            for jj in range(ii + 1, klen):
                v = np.int64(key_buf[jj])
                coverage[_edge_idx(edge_codes, u * n_nodes + v)] += 1

    @njit(cache=True, nogil=True)
    def _run_moves(n_moves, n_nodes, kmax,
                   mf_nodes, mf_off,
                   binom,
                   edge_codes, coverage,
                   ek, ln_binom, ln_one_plus_inv_mu, ln_two, ln_half,
                   ln_tab,
                   table, slot_nodes, slot_len, slot_mult, slot_hash,
                   slot_active_pos, pcount, pcount_cap, active_list,
                   best_nodes, best_len, best_mult,
                   stats_prop, stats_acc,
                   ctr, fctr, rng_state, cap_stats, key_buf):
        n_factors = mf_off.size - 1
        for mv in range(n_moves):
            if (ctr[C_NSLOTS] + 1 > slot_len.size
                    or (ctr[C_NSLOTS] + 1) * 3 > table.size):
                return mv, STATUS_GROW
            f = _rng_bounded(rng_state, n_factors)
            base = mf_off[f]
            k = np.int64(mf_off[f + 1] - base)
            size = 2 + _rng_bounded(rng_state, k - 1)
            r = _rng_bounded(rng_state, binom[k, size])
            # lexicographic unranking of the chosen subset
            need = size
            pos = np.int64(0)
            o = 0
            while need > 0:
                c = binom[k - pos - 1, need - 1]
                if r < c:
                    key_buf[o] = mf_nodes[base + pos]
                    o += 1
                    need -= 1
                else:
                    r -= c
                pos += 1
            slot = _lookup_or_create(table, slot_nodes, slot_len, slot_mult,
                                     slot_hash, slot_active_pos, kmax,
                                     key_buf, size, ctr)
            a = slot_mult[slot]
            if a > 0:
                delta = 1 if _rng_bounded(rng_state, 2) == 0 else -1
            else:
                delta = 1
            stats_prop[size] += 1
            eks = ek[size]
            if delta == 1:
                lnq = ln_half if a == 0 else 0.0
                dlp = (_ln_int(eks + 1, ln_tab) - _ln_int(a + 1, ln_tab)
                       - ln_binom[size] - ln_one_plus_inv_mu)
            else:
                if a == 1:
                    # removing the last instance must not uncover an edge
                    ok = True
                    for ii in range(size):
                        u = np.int64(key_buf[ii])
                        for jj in range(ii + 1, size):
                            v = np.int64(key_buf[jj])
                            e = _edge_idx(edge_codes, u * n_nodes + v)
                            if coverage[e] < 2:
                                ok = False
                                break
                        if not ok:
                            break
                    if not ok:
                        continue
                lnq = ln_two if a == 1 else 0.0
                dlp = (_ln_int(a, ln_tab) - _ln_int(eks, ln_tab)
                       + ln_binom[size] + ln_one_plus_inv_mu)
            ln_a = lnq + dlp
            if ln_a < 0.0:
                u_draw = _rng_double(rng_state)
                if not math.log(u_draw) < ln_a:
                    continue
            # apply the accepted move
            stats_acc[size] += 1
            slot_mult[slot] = a + delta
            ek[size] = eks + delta
            for ii in range(size):
                u = np.int64(key_buf[ii])
                for jj in range(ii + 1, size):
                    v = np.int64(key_buf[jj])
                    coverage[_edge_idx(edge_codes, u * n_nodes + v)] += delta
            if delta == 1 and a == 0:
                active_list[ctr[C_ACTIVE]] = slot
                slot_active_pos[slot] = ctr[C_ACTIVE]
                ctr[C_ACTIVE] += 1
            elif delta == -1 and a == 1:
                p = slot_active_pos[slot]
                last = ctr[C_ACTIVE] - 1
                moved = active_list[last]
                active_list[p] = moved
                slot_active_pos[moved] = p
                ctr[C_ACTIVE] = last
                slot_active_pos[slot] = -1
            if cap_stats > 0:
                if delta == 1 and a == cap_stats:
                    ctr[C_NOVER] += 1
                elif delta == -1 and a == cap_stats + 1:
                    ctr[C_NOVER] -= 1
            fctr[F_LOGP] += dlp
            if fctr[F_LOGP] > fctr[F_BEST]:
                _save_best(active_list, slot_nodes, slot_len, slot_mult, kmax,
                           best_nodes, best_len, best_mult, ctr, fctr)
        return n_moves, STATUS_OK

    @njit(cache=True, nogil=True)
    def _tick(active_list, pcount, pcount_cap, ctr, cap_stats):
        ctr[C_TICKS] += 1
        capped = cap_stats > 0 and ctr[C_NOVER] == 0
        if capped:
            ctr[C_CAPPED] += 1
        for t in range(ctr[C_ACTIVE]):
            s = active_list[t]
            pcount[s] += 1
            if capped:
                pcount_cap[s] += 1


def _next_pow2(x: int) -> int:
    n = 1
    while n < x:
        n <<= 1
    return n


class KernelChain:
    """Python-side owner of one compiled chain's arrays."""

    def __init__(self, graph, cfg, seed: int, cliques, cap_stats: int = 0):
        if not HAVE_NUMBA:
            raise RuntimeError("numba is not available")
        from .model import log_prior, maximal_clique_hypergraph
        from .sampler import make_ln_table

        self.graph = graph
        self.cfg = cfg
        self.cap_stats = int(cap_stats)
        self.kmax = cfg.L
        self.M = len(cliques)
        self.sweeps_run = 0

        lens = np.fromiter((len(c) for c in cliques), dtype=np.int64,
                           count=self.M)
        self.mf_off = np.zeros(self.M + 1, dtype=np.int64)
        np.cumsum(lens, out=self.mf_off[1:])
        self.mf_nodes = np.fromiter(
            (v for c in cliques for v in c), dtype=np.int32,
            count=int(self.mf_off[-1]))

        km = self.kmax
        self.binom = np.zeros((km + 1, km + 1), dtype=np.int64)
        for a in range(km + 1):
            for b in range(a + 1):
                self.binom[a, b] = math.comb(a, b)

        n = graph.num_nodes
        self.n_nodes = np.int64(n)
        codes = sorted(u * n + v for u, v in graph.edges)
        self.edge_codes = np.asarray(codes, dtype=np.int64)
        self.coverage = np.zeros(len(codes), dtype=np.int64)

        self.ek = np.zeros(cfg.L + 1, dtype=np.int64)
        self.ln_binom = np.asarray(cfg.log_binom, dtype=np.float64)
        self.ln_tab = make_ln_table(cfg)

        cap = _next_pow2(max(256, 2 * self.M + 64))
        self._alloc_slots(cap)
        self.table = np.full(4 * cap, -1, dtype=np.int64)

        self.stats_prop = np.zeros(cfg.L + 1, dtype=np.int64)
        self.stats_acc = np.zeros(cfg.L + 1, dtype=np.int64)
        self.ctr = np.zeros(8, dtype=np.int64)
        self.fctr = np.zeros(2, dtype=np.float64)
        self.rng_state = np.array([seed % (1 << 64)], dtype=np.uint64)
        self.key_buf = np.zeros(km, dtype=np.int32)

        for clique in cliques:
            klen = len(clique)
            self.key_buf[:klen] = clique
            _force_insert(self.table, self.slot_nodes, self.slot_len,
                          self.slot_mult, self.slot_hash,
                          self.slot_active_pos, self.active_list, km,
                          self.key_buf, klen, self.n_nodes, self.edge_codes,
                          self.coverage, self.ek, self.ctr, self.cap_stats)

        init = maximal_clique_hypergraph(graph, cliques)
        self.fctr[F_LOGP] = log_prior(init, cfg)
        self.fctr[F_BEST] = -math.inf
        _save_best_now(self.active_list, self.slot_nodes, self.slot_len,
                       self.slot_mult, km, self.best_nodes, self.best_len,
                       self.best_mult, self.ctr, self.fctr)

    def _alloc_slots(self, cap: int) -> None:
        km = self.kmax
        self.slot_nodes = np.zeros(cap * km, dtype=np.int32)
        self.slot_len = np.zeros(cap, dtype=np.int64)
        self.slot_mult = np.zeros(cap, dtype=np.int64)
        self.slot_hash = np.zeros(cap, dtype=np.uint64)
        self.slot_active_pos = np.full(cap, -1, dtype=np.int64)
        self.pcount = np.zeros(cap, dtype=np.int64)
        self.pcount_cap = np.zeros(cap, dtype=np.int64)
        self.active_list = np.zeros(cap, dtype=np.int64)
        self.best_nodes = np.zeros(cap * km, dtype=np.int32)
        self.best_len = np.zeros(cap, dtype=np.int64)
        self.best_mult = np.zeros(cap, dtype=np.int64)

    def _grow(self) -> None:
        old = self.slot_len.size
        new = old * 2

        def extend(a, per_slot=1):
            out = np.zeros(new * per_slot, dtype=a.dtype)
            out[:old * per_slot] = a
            return out

        km = self.kmax
        self.slot_nodes = extend(self.slot_nodes, km)
        self.slot_len = extend(self.slot_len)
        self.slot_mult = extend(self.slot_mult)
        self.slot_hash = extend(self.slot_hash)
        new_pos = np.full(new, -1, dtype=np.int64)
        new_pos[:old] = self.slot_active_pos
        self.slot_active_pos = new_pos
        self.pcount = extend(self.pcount)
        self.pcount_cap = extend(self.pcount_cap)
        self.active_list = extend(self.active_list)
        self.best_nodes = extend(self.best_nodes, km)
        self.best_len = extend(self.best_len)
        self.best_mult = extend(self.best_mult)
        self.table = np.full(4 * new, -1, dtype=np.int64)
        _rebuild_table(self.table, self.slot_hash, int(self.ctr[C_NSLOTS]))

    def run_sweeps(self, n_sweeps: int) -> None:
        remaining = int(n_sweeps) * self.M
        while remaining > 0:
            done, status = _run_moves(
                remaining, self.n_nodes, self.kmax, self.mf_nodes,
                self.mf_off, self.binom, self.edge_codes, self.coverage,
                self.ek, self.ln_binom, self.cfg.ln_one_plus_inv_mu,
                LN_TWO_CONST, LN_HALF_CONST, self.ln_tab, self.table,
                self.slot_nodes, self.slot_len, self.slot_mult,
                self.slot_hash, self.slot_active_pos, self.pcount,
                self.pcount_cap, self.active_list, self.best_nodes,
                self.best_len, self.best_mult, self.stats_prop,
                self.stats_acc, self.ctr, self.fctr, self.rng_state,
                self.cap_stats, self.key_buf)
            remaining -= int(done)
            if status == STATUS_GROW:
                self._grow()
        self.sweeps_run += int(n_sweeps)

    def tick(self) -> None:
        _tick(self.active_list, self.pcount, self.pcount_cap, self.ctr,
              self.cap_stats)

    def sigma_bits(self) -> float:
        return -float(self.fctr[F_LOGP]) / math.log(2.0)

    def log_prior_value(self) -> float:
        return float(self.fctr[F_LOGP])

    def ek_row(self) -> tuple[int, ...]:
        return tuple(int(x) for x in self.ek[2:self.cfg.L + 1])

    def _slot_key(self, s: int) -> tuple[int, ...]:
        km = self.kmax
        l = int(self.slot_len[s])
        return tuple(int(x) for x in self.slot_nodes[s * km:s * km + l])

    def snapshot(self) -> dict[tuple[int, ...], int]:
        out = {}
        for t in range(int(self.ctr[C_ACTIVE])):
            s = int(self.active_list[t])
            out[self._slot_key(s)] = int(self.slot_mult[s])
        return out

    def best(self) -> tuple[dict[tuple[int, ...], int], float]:
        km = self.kmax
        out = {}
        for t in range(int(self.ctr[C_BEST])):
            l = int(self.best_len[t])
            key = tuple(int(x) for x in self.best_nodes[t * km:t * km + l])
            out[key] = int(self.best_mult[t])
        return out, float(self.fctr[F_BEST])

    def marginal_tables(self):
        from .estimators import MarginalTable

        counts = {}
        counts_cap = {}
        for s in range(int(self.ctr[C_NSLOTS])):
            c = int(self.pcount[s])
            if c:
                counts[self._slot_key(s)] = c
            cc = int(self.pcount_cap[s])
            if cc:
                counts_cap[self._slot_key(s)] = cc
        total = int(self.ctr[C_TICKS])
        capped_total = int(self.ctr[C_CAPPED])
        return (MarginalTable.from_counts(counts, total),
                MarginalTable.from_counts(counts_cap, capped_total))

    def capped_ticks(self) -> int:
        return int(self.ctr[C_CAPPED])

    def proposed_by_size(self) -> dict[int, int]:
        return {k: int(v) for k, v in enumerate(self.stats_prop) if v}

    def accepted_by_size(self) -> dict[int, int]:
        return {k: int(v) for k, v in enumerate(self.stats_acc) if v}


LN_TWO_CONST = math.log(2.0)
LN_HALF_CONST = -LN_TWO_CONST

_warmed = False


def warm_up() -> None:
    """Force one compilation pass so thread pools never compile concurrently."""
    global _warmed
    if _warmed or not HAVE_NUMBA:
        return
    from .graph import parse_edge_list
    from .model import make_config

    g = parse_edge_list("0 1\n1 2\n0 2")
    cfg = make_config(g)
    chain = KernelChain(g, cfg, seed=1, cliques=[(0, 1, 2)], cap_stats=3)
    chain.run_sweeps(4)
    chain.tick()
    chain.snapshot()
    chain.best()
    chain.marginal_tables()
    _warmed = True
