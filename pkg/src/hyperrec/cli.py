"""Command-line front end for the full reconstruction pipeline.

Every command with a file output also writes ``<out>.manifest.json`` holding
the command line, input digests, all flag values, the seed and generator
name, the code version, wall time, and the headline results, so a run can be
reproduced bit for bit. Primary outputs contain no timestamps.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import sys
import time

from . import __version__
from .cliques import CliqueLimitError, maximal_cliques
from .estimators import (
    classify_uncertain,
    compression,
    summary_stats,
    write_marginals_csv,
)
from .graph import format_edge_list, load_edge_list
from .model import (
    DegenerateGraphError,
    Hypergraph,
    description_length,
    format_hypergraph,
    is_projection_of,
    load_hypergraph,
    make_config,
    maximal_clique_hypergraph,
    project,
)
from .rng import GENERATOR_NAME
from .sampler import SamplerConfig, run_chains
from .synth import (
    PLANTED_EXPERIMENT_COLUMNS,
    jaccard,
    load_bipartite,
    make_planted_instance,
    run_bipartite_experiment,
    run_planted_experiment,
)


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _write(path, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


class Manifest:
    def __init__(self, command: str, args: argparse.Namespace,
                 inputs: list[str]):
        self.t0 = time.perf_counter()
        self.data = {
            "command": command,
            "argv": sys.argv[1:],
            "inputs": {p: _sha256(p) for p in inputs},
            "flags": {k: v for k, v in vars(args).items() if k != "func"},
            "seed": getattr(args, "seed", None),
            "rng": GENERATOR_NAME,
            "version": __version__,
            "results": {},
            "conventions": {},
        }

    def note_model(self, cfg) -> None:
        self.data["conventions"] = {
            "node_count": "nodes appearing in edges plus any '# nodes:' "
                          "header entries",
            "max_hyperedge_size": "largest maximal clique of the input graph",
            "log_base_bits": 2,
            "N": cfg.N,
            "E": cfg.E,
            "L": cfg.L,
            "mu": cfg.mu,
        }

    def finish(self, out_path, results: dict) -> None:
        self.data["results"] = results
        self.data["wall_time_s"] = round(time.perf_counter() - self.t0, 3)
        if out_path:
            _write(str(out_path) + ".manifest.json",
                   json.dumps(self.data, indent=2, sort_keys=True) + "\n")


def _emit(args, text_lines: list[str], payload: dict) -> None:
    if getattr(args, "json", False):
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


def _write_trace(path, chain_results, big_l: int) -> None:
    """Diagnostics stream: one CSV row per recorded sample."""
    header = ["chain", "sweep", "sigma_bits"] + [
        f"E_{k}" for k in range(2, big_l + 1)]
    lines = [",".join(header)]
    for ci, res in enumerate(chain_results):
        for sweep_idx, sigma, ek in res.diagnostics.samples:
            lines.append(",".join(
                [str(ci), str(sweep_idx), f"{sigma:.6f}"]
                + [str(e) for e in ek]))
    _write(path, "\n".join(lines) + "\n")


def _sampler_flags(p: argparse.ArgumentParser, sampling: bool) -> None:
    p.add_argument("--seed", type=int, default=1, help="master RNG seed")
    p.add_argument("--chains", type=int, default=1,
                   help="independent chains (merged)")
    p.add_argument("--engine", choices=["auto", "numba", "python"],
                   default="auto")
    if sampling:
        p.add_argument("--burn-in", type=int, default=1000,
                       help="sweeps discarded before recording")
        p.add_argument("--thin", type=int, default=1000,
                       help="sweeps between recorded samples")
        p.add_argument("--samples", type=int, default=4000,
                       help="number of recorded samples")
    else:
        p.add_argument("--sweeps", type=int, default=100_000,
                       help="optimization sweeps per chain")


def cmd_reconstruct(args) -> int:
    man = Manifest("reconstruct", args, [args.graph])
    g = load_edge_list(args.graph)
    if g.num_edges == 0:
        print("warning: edgeless graph; the empty hypergraph is the only "
              "reconstruction (0 bits)", file=sys.stderr)
        empty = Hypergraph(g.num_nodes, {}, labels=g.labels)
        if args.out:
            _write(args.out, format_hypergraph(empty))
        results = {"sigma_bits": 0.0, "baseline_bits": 0.0,
                   "compression_bits": 0.0, "hyperedges": 0}
        man.finish(args.out, results)
        _emit(args, ["sigma_bits 0.0", "baseline_bits 0.0",
                     "compression_bits 0.0"], results)
        return 0
    cliques = maximal_cliques(g)
    cfg = make_config(g, cliques)
    man.note_model(cfg)
    baseline = maximal_clique_hypergraph(g, cliques)
    sigma_baseline = description_length(baseline, cfg)
    scfg = SamplerConfig(seed=args.seed, burn_in_sweeps=args.sweeps,
                         num_samples=0, mode="map", engine=args.engine)
    res = run_chains(g, args.chains, scfg, cfg=cfg)
    if args.trace:
        _write_trace(args.trace, res.chains, cfg.L)
    stats = summary_stats(res.best)
    results = {
        "sigma_bits": res.sigma_bits,
        "baseline_bits": sigma_baseline,
        "compression_bits": compression(sigma_baseline, res.sigma_bits),
        "hyperedges": stats.total_hyperedges,
        "hyperedges_above_pairs": sum(
            v for k, v in stats.size_histogram.items() if k > 2),
        "mean_size": stats.mean_size,
        "best_chain": res.best_chain_index,
    }
    if args.out:
        _write(args.out, format_hypergraph(res.best))
    man.finish(args.out, results)
    _emit(args, [f"sigma_bits {res.sigma_bits:.1f}",
                 f"baseline_bits {sigma_baseline:.1f}",
                 f"compression_bits {results['compression_bits']:.1f}",
                 f"hyperedges {stats.total_hyperedges} "
                 f"(mean size {stats.mean_size:.3g})"], results)
    return 0


def cmd_sample(args) -> int:
    man = Manifest("sample", args, [args.graph])
    g = load_edge_list(args.graph)
    cliques = maximal_cliques(g)
    cfg = make_config(g, cliques)
    man.note_model(cfg)
    scfg = SamplerConfig(seed=args.seed, burn_in_sweeps=args.burn_in,
                         thin_sweeps=args.thin, num_samples=args.samples,
                         mode="sample", engine=args.engine)
    res = run_chains(g, args.chains, scfg, cfg=cfg)
    if args.trace:
        _write_trace(args.trace, res.chains, cfg.L)
    part = classify_uncertain(res.marginals, args.alpha)
    buf = io.StringIO()
    write_marginals_csv(res.marginals, g.labels, args.alpha, buf)
    if args.out:
        _write(args.out, buf.getvalue())
    elif not args.json:
        sys.stdout.write(buf.getvalue())
    results = {
        "best_sigma_bits": res.sigma_bits,
        "alpha": args.alpha,
        "uncertain_edges": part.uncertain_count(2),
        "uncertain_triangles": part.uncertain_count(3),
        "uncertain_higher": part.uncertain_higher_count(3),
        "keys_seen": len(res.marginals),
        "samples": res.marginals.total_samples,
    }
    if args.json and not args.out:
        results["csv"] = buf.getvalue()
    man.finish(args.out, results)
    _emit(args, [f"samples {results['samples']}",
                 f"best_sigma_bits {res.sigma_bits:.1f}",
                 f"uncertain_edges {results['uncertain_edges']}",
                 f"uncertain_triangles {results['uncertain_triangles']}",
                 f"uncertain_higher {results['uncertain_higher']}"], results)
    return 0


def cmd_project(args) -> int:
    man = Manifest("project", args, [args.hypergraph])
    h = load_hypergraph(args.hypergraph)
    text = format_edge_list(project(h))
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    man.finish(args.out, {"nodes": h.n, "hyperedges": h.total_count()})
    return 0


def cmd_cliques(args) -> int:
    man = Manifest("cliques", args, [args.graph])
    g = load_edge_list(args.graph)
    lines = []
    for c in maximal_cliques(g):
        lines.append(" ".join(sorted((g.labels[i] for i in c))))
    lines.sort()
    text = "\n".join(lines) + ("\n" if lines else "")
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    man.finish(args.out, {"maximal_cliques": len(lines)})
    return 0


def cmd_dl(args) -> int:
    man = Manifest("dl", args, [args.graph, args.hypergraph])
    g = load_edge_list(args.graph)
    cfg = make_config(g)
    man.note_model(cfg)
    h = load_hypergraph(args.hypergraph, graph=g)
    sigma = description_length(h, cfg)
    results = {"sigma_bits": sigma,
               "projects_to_graph": is_projection_of(g, h)}
    man.finish(None, results)
    _emit(args, [f"sigma_bits {sigma:.4f}"], results)
    return 0


def cmd_eval(args) -> int:
    h1 = load_hypergraph(args.hypergraph_a)
    h2 = load_hypergraph(args.hypergraph_b)
    j = jaccard(h1, h2)
    _emit(args, [f"jaccard {j:.6f}"], {"jaccard": j})
    return 0


def _parse_int_list(text: str) -> list[int]:
    return [int(x) for x in text.replace(",", " ").split()]


def cmd_synth(args) -> int:
    man = Manifest("synth", args, [])
    sizes = _parse_int_list(args.sizes)
    inst = make_planted_instance(sizes, args.extra_nodes, args.noise,
                                 args.seed)
    _write(args.out_graph, format_edge_list(inst.graph))
    _write(args.out_truth, format_hypergraph(inst.truth))
    results = {"nodes": inst.graph.num_nodes,
               "edges": inst.graph.num_edges,
               "hyperedges": inst.truth.distinct_count(),
               "noise_edges": inst.noise_edges}
    man.finish(args.out_graph, results)
    _emit(args, [f"wrote {args.out_graph} ({results['edges']} edges) and "
                 f"{args.out_truth} ({results['hyperedges']} hyperedges)"],
          results)
    return 0


def cmd_synth_experiment(args) -> int:
    man = Manifest("synth-experiment", args, [])
    sizes = _parse_int_list(args.sizes)
    grid = _parse_int_list(args.grid)
    scfg = SamplerConfig(seed=args.seed, burn_in_sweeps=args.sweeps,
                         num_samples=0, mode="map", engine=args.engine)
    rows = run_planted_experiment(sizes, args.extra_nodes, grid,
                                  args.realizations, scfg, args.seed)
    lines = [",".join(PLANTED_EXPERIMENT_COLUMNS)]
    for r in rows:
        lines.append(",".join(f"{r[c]:.6g}" if isinstance(r[c], float)
                              else str(r[c])
                              for c in PLANTED_EXPERIMENT_COLUMNS))
    text = "\n".join(lines) + "\n"
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    man.finish(args.out, {"rows": len(rows)})
    return 0


def cmd_bipartite(args) -> int:
    man = Manifest("bipartite", args, [args.bipartite])
    h = load_bipartite(args.bipartite, group_side=args.side)
    text = format_hypergraph(h)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    man.finish(args.out, {"nodes": h.n, "hyperedges": h.distinct_count()})
    return 0


def cmd_bipartite_experiment(args) -> int:
    man = Manifest("bipartite-experiment", args, [args.bipartite])
    truth = load_bipartite(args.bipartite, group_side=args.side)
    scfg = SamplerConfig(seed=args.seed, burn_in_sweeps=args.sweeps,
                         num_samples=0, mode="map", engine=args.engine)
    out = run_bipartite_experiment(truth, scfg, args.seed,
                                   n_chains=args.chains)
    results = {k: v for k, v in out.items() if k != "best"}
    man.finish(None, results)
    _emit(args, [f"jaccard_map {out['jaccard_map']:.4f}",
                 f"jaccard_maxclique {out['jaccard_maxclique']:.4f}",
                 f"sigma_map {out['sigma_map']:.1f}",
                 f"sigma_maxclique {out['sigma_maxclique']:.1f}"], results)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hyperrec",
        description="Reconstruct latent higher-order interactions from "
                    "pairwise network data.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    trace_help = ("write per-sample diagnostics (sweep, description length, "
                  "size counts) to this CSV file")

    p = sub.add_parser("reconstruct",
                       help="find the best hypergraph for a graph")
    p.add_argument("graph")
    p.add_argument("--out", help="output hypergraph file")
    p.add_argument("--trace", metavar="CSV", help=trace_help)
    p.add_argument("--json", action="store_true")
    _sampler_flags(p, sampling=False)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("sample", help="posterior samples -> marginals CSV")
    p.add_argument("graph")
    p.add_argument("--alpha", type=float, default=0.05,
                   help="uncertainty threshold")
    p.add_argument("--out", help="output CSV file")
    p.add_argument("--trace", metavar="CSV", help=trace_help)
    p.add_argument("--json", action="store_true")
    _sampler_flags(p, sampling=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("project", help="project a hypergraph to a graph")
    p.add_argument("hypergraph")
    p.add_argument("--out")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("cliques", help="list maximal cliques, one per line")
    p.add_argument("graph")
    p.add_argument("--out")
    p.set_defaults(func=cmd_cliques)

    p = sub.add_parser("dl", help="description length of a hypergraph "
                                  "under a graph's model")
    p.add_argument("graph")
    p.add_argument("hypergraph")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_dl)

    p = sub.add_parser("eval", help="Jaccard similarity of two hypergraphs")
    p.add_argument("hypergraph_a")
    p.add_argument("hypergraph_b")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="generate a planted instance")
    p.add_argument("--sizes", default="3,4,5,6,7,3,4,5,6,7",
                   help="comma-separated hyperedge sizes")
    p.add_argument("--extra-nodes", type=int, default=100)
    p.add_argument("--noise", type=int, default=10,
                   help="random extra edges")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out-graph", required=True)
    p.add_argument("--out-truth", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("synth-experiment",
                       help="description-length curves for planted vs "
                            "uniform graphs")
    p.add_argument("--sizes", default="3,4,5,6,7,3,4,5,6,7")
    p.add_argument("--extra-nodes", type=int, default=100)
    p.add_argument("--grid", default="0,50,100,150,200",
                   help="extra-edge grid")
    p.add_argument("--realizations", type=int, default=10)
    p.add_argument("--sweeps", type=int, default=2000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--engine", choices=["auto", "numba", "python"],
                   default="auto")
    p.add_argument("--out")
    p.set_defaults(func=cmd_synth_experiment)

    p = sub.add_parser("bipartite",
                       help="bipartite membership file -> hypergraph")
    p.add_argument("bipartite")
    p.add_argument("--side", choices=["left", "right"], default="left",
                   help="which column holds the group")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bipartite)

    p = sub.add_parser("bipartite-experiment",
                       help="recovery quality on a projected bipartite "
                            "dataset")
    p.add_argument("bipartite")
    p.add_argument("--side", choices=["left", "right"], default="left")
    p.add_argument("--json", action="store_true")
    _sampler_flags(p, sampling=False)
    p.set_defaults(func=cmd_bipartite_experiment)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, CliqueLimitError,
            DegenerateGraphError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
