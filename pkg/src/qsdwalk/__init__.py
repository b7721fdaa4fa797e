"""Sampling toolkit for directed graphs.

Random-walk agents estimate a chosen node distribution on a directed
graph while touching as little of it as possible. The walk follows a
transient chain whose survival probabilities are tuned so that the
distribution of long-lived trajectories equals the target; killed
agents restart from their own visit history, so the history itself is
the estimate and it sharpens as the run proceeds. Exact spectral
references, two Metropolis-Hastings baselines, and an undirected
crawl baseline ship alongside for validation and comparison.

Quick start::

    import numpy as np
    from qsdwalk import DirectedGraph, ReinforcedWalkSampler

    rng = np.random.default_rng(7)
    g = DirectedGraph.from_edges(50, rng.integers(0, 50, 800),
                                 rng.integers(0, 50, 800))
    sampler = ReinforcedWalkSampler(target="indegree", steps=200_000)
    sampler.fit(g)
    print(sampler.distribution_)
"""

from .baselines import (
    DurwResult,
    MH_VARIANTS,
    UndirectedView,
    durw_run,
    mh_kernel,
    mh_run,
    mh_step,
    ratio_estimate,
)
from .empirical import (
    SCHEDULE_KINDS,
    EmpiricalMeasure,
    WeightSchedule,
    merge_measures,
)
from .engine import (
    INDEGREE_MODES,
    MERGE_MODES,
    MODES,
    AgentState,
    RunConfig,
    RunResult,
    SharedState,
    run,
    step_dynamic,
    step_static,
)
from .graph import (
    DirectedGraph,
    GraphFormatError,
    NodeMap,
    induced_subgraph,
    is_strongly_connected,
    largest_scc,
    load_edge_list,
    reachable_set,
    write_edge_list,
)
from .metrics import MetricsLog, loglog_slope, nrmse, stable_hash, tvd
from .samplers import DurwSampler, MetropolisHastingsSampler, ReinforcedWalkSampler
from .spectral import (
    SparseOperator,
    SpectralResult,
    eigenvector_centrality,
    left_leading_eigen,
    stationary,
)
from .targets import (
    TARGET_KINDS,
    AcceptanceModel,
    SimpleRandomWalk,
    TargetSpec,
    TeleportingWalk,
    build_acceptance,
    proposal_matrix,
    propose,
    redistribution_kernel,
    transient_kernel,
)

__version__ = "0.1.0"

__all__ = [
    "AcceptanceModel",
    "AgentState",
    "DirectedGraph",
    "DurwResult",
    "DurwSampler",
    "EmpiricalMeasure",
    "GraphFormatError",
    "INDEGREE_MODES",
    "MERGE_MODES",
    "MH_VARIANTS",
    "MODES",
    "MetricsLog",
    "MetropolisHastingsSampler",
    "NodeMap",
    "ReinforcedWalkSampler",
    "RunConfig",
    "RunResult",
    "SCHEDULE_KINDS",
    "SharedState",
    "SimpleRandomWalk",
    "SparseOperator",
    "SpectralResult",
    "TARGET_KINDS",
    "TargetSpec",
    "TeleportingWalk",
    "UndirectedView",
    "WeightSchedule",
    "build_acceptance",
    "durw_run",
    "eigenvector_centrality",
    "induced_subgraph",
    "is_strongly_connected",
    "largest_scc",
    "left_leading_eigen",
    "load_edge_list",
    "loglog_slope",
    "merge_measures",
    "mh_kernel",
    "mh_run",
    "mh_step",
    "nrmse",
    "proposal_matrix",
    "propose",
    "ratio_estimate",
    "reachable_set",
    "redistribution_kernel",
    "run",
    "stable_hash",
    "stationary",
    "step_dynamic",
    "step_static",
    "transient_kernel",
    "tvd",
    "write_edge_list",
]
