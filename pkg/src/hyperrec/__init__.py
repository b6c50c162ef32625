"""hyperrec: reconstruct latent higher-order interactions from network data.

Given an ordinary pairwise network, infer a posterior distribution over
hypergraphs that project to it, report the best (minimum description length)
hypergraph, and summarize per-node-set presence probabilities.
"""

from .graph import (
    Graph,
    GraphFormatError,
    add_random_nonedges,
    format_edge_list,
    load_edge_list,
    parse_edge_list,
    save_edge_list,
    uniform_graph_same_density,
)
from .cliques import (
    CliqueLimitError,
    FactorGraph,
    maximal_cliques,
    subfactor_count,
    subfactor_key,
)
from .model import (
    DegenerateGraphError,
    Hypergraph,
    ModelConfig,
    description_length,
    format_hypergraph,
    is_projection_of,
    load_hypergraph,
    log_prior,
    log_prior_delta,
    make_config,
    maximal_clique_hypergraph,
    parse_hypergraph,
    project,
    save_hypergraph,
)
from .sampler import (
    ChainState,
    Diagnostics,
    Move,
    MultiChainResult,
    RunResult,
    SamplerConfig,
    acceptance_log_ratio,
    init_chain,
    propose,
    run,
    run_chains,
    step,
    sweep,
)
from .estimators import (
    MarginalTable,
    SummaryStats,
    UncertaintyPartition,
    classify_uncertain,
    compression,
    entropy,
    summary_stats,
    write_marginals_csv,
)
from .synth import (
    PlantedInstance,
    bipartite_to_hypergraph,
    jaccard,
    load_bipartite,
    make_planted_instance,
    planted_disjoint,
    run_bipartite_experiment,
    run_planted_experiment,
)

__version__ = "0.1.0"
