"""History-reinforced walk engine.

Agents follow the proposal chain, accept moves with probability
bound / ceiling, and on rejection restart from a draw of their own
weighted occupation measure. Recording every position with scheduled
weights makes the normalized measure converge to the quasi-stationary
distribution of the thinned chain, which the acceptance construction
has arranged to be the target.

Two execution paths cover the same semantics: ``run`` drives a compiled
kernel over all agents, and ``step_static`` / ``step_dynamic`` advance
one agent at a time in plain Python through the same jitted primitives,
so the two produce identical trajectories for identical seeds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .empirical import EmpiricalMeasure, WeightSchedule, merge_mass_arrays
from .graph import DirectedGraph
from .metrics import MetricsLog, stable_hash, tvd
from .targets import (
    AcceptanceModel,
    ProposalChain,
    SimpleRandomWalk,
    TargetSpec,
    TeleportingWalk,
    build_acceptance,
)
from .validation import check_node_array

MODES = ("static", "dynamic")
INDEGREE_MODES = ("exact", "online")
MERGE_MODES = ("pool", "average")


@dataclass(frozen=True, eq=False)
class RunConfig:
    """Everything a run depends on; hashable into a reproducibility key.

    ``mode`` picks the acceptance rule: ``static`` divides bounds by
    the exact precomputed ceiling, ``dynamic`` learns the ceiling on
    the fly (each proposal may raise it with ``update_probability``).
    ``indegree_mode`` ``online`` estimates in-degrees from discovered
    edges instead of reading them from the graph; it requires dynamic
    mode and the plain random-walk proposal. ``checkpoints`` defaults
    to about a hundred evenly spaced rows ending at ``steps``.
    """

    chain: ProposalChain
    target: TargetSpec
    schedule: WeightSchedule
    steps: int
    agents: int = 1
    mode: str = "static"
    update_probability: float = 0.01
    indegree_mode: str = "exact"
    seed: int = 0
    checkpoints: Optional[np.ndarray] = None
    initial_measure: Optional[np.ndarray] = None
    start_nodes: Optional[np.ndarray] = None
    shared_ceiling: bool = False
    merge: str = "pool"

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.indegree_mode not in INDEGREE_MODES:
            raise ValueError(f"unknown indegree_mode {self.indegree_mode!r}")
        if self.merge not in MERGE_MODES:
            raise ValueError(f"unknown merge {self.merge!r}")
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        if self.agents < 1:
            raise ValueError("agents must be at least 1")
        if not 0.0 <= self.update_probability <= 1.0:
            raise ValueError("update_probability must lie in [0, 1]")
        if self.indegree_mode == "online":
            if self.mode != "dynamic":
                raise ValueError(
                    "online in-degree estimation requires dynamic mode "
                    "(the exact ceiling is unknowable without exact in-degrees)"
                )
            if not isinstance(self.chain, SimpleRandomWalk):
                raise ValueError(
                    "online in-degree estimation supports only the plain "
                    "random-walk proposal"
                )
            if self.target.kind == "evc":
                raise ValueError(
                    "eigenvector-centrality bounds use no in-degrees; "
                    "online estimation does not apply"
                )

    def resolved_checkpoints(self) -> np.ndarray:
        if self.checkpoints is None:
            stride = max(1, self.steps // 100)
            cps = np.arange(stride, self.steps + 1, stride, dtype=np.int64)
        else:
            cps = np.unique(np.asarray(self.checkpoints, dtype=np.int64))
            if cps.size == 0 or cps[0] < 1 or cps[-1] > self.steps:
                raise ValueError("checkpoints must lie in [1, steps]")
        if cps[-1] != self.steps:
            cps = np.append(cps, self.steps)
        return cps

    def fingerprint(self) -> str:
        g = self.chain.graph
        params = {
            "graph": _array_digest(g.out_indptr, g.out_indices),
            "chain": type(self.chain).__name__,
            "target": self.target.kind,
            "schedule": (self.schedule.kind, self.schedule.alpha),
            "steps": self.steps,
            "agents": self.agents,
            "mode": self.mode,
            "update_probability": self.update_probability,
            "indegree_mode": self.indegree_mode,
            "seed": self.seed,
            "shared_ceiling": self.shared_ceiling,
            "merge": self.merge,
        }
        if isinstance(self.chain, TeleportingWalk):
            params["p_follow"] = self.chain.p_follow
            params["seeds"] = _array_digest(self.chain.seeds)
        if self.target.vector is not None:
            params["target_vector"] = _array_digest(self.target.vector)
        if self.checkpoints is not None:
            params["checkpoints"] = _array_digest(self.resolved_checkpoints())
        if self.initial_measure is not None:
            params["initial_measure"] = _array_digest(
                np.asarray(self.initial_measure, dtype=np.float64)
            )
        if self.start_nodes is not None:
            params["start_nodes"] = _array_digest(
                np.asarray(self.start_nodes, dtype=np.int64)
            )
        return stable_hash(params)


def _array_digest(*arrays: np.ndarray) -> str:
    import hashlib

    h = hashlib.blake2b(digest_size=8)
    for arr in arrays:
        h.update(np.ascontiguousarray(arr).tobytes())
    return h.hexdigest()


@dataclass
class RunResult:
    """Final state and per-checkpoint log of one run.

    ``indegree_estimates`` and ``edge_seen`` are populated only when
    the run estimated in-degrees online; ``edge_seen`` flags, in the
    canonical ``edge_arrays`` order, the edges some proposal has
    revealed.
    """

    distribution: np.ndarray
    reference: np.ndarray
    log: MetricsLog
    model: AcceptanceModel
    ceilings: np.ndarray
    unique_queries: int
    absorptions: int
    positions: np.ndarray
    masses: np.ndarray
    totals: np.ndarray
    log2_scales: np.ndarray
    indegree_estimates: Optional[np.ndarray] = None
    edge_seen: Optional[np.ndarray] = None


def kernel_tables(
    model: AcceptanceModel, indegree_mode: str
) -> tuple[int, np.ndarray, np.ndarray, np.ndarray]:
    """Bound-evaluation mode and lookup arrays for a model.

    Returns (b_mode, b_edge, pi, supp). For the plain walk with exact
    in-degrees the per-edge bound table is the model's own array, which
    is what keeps the sampled chain and the spectral reference route
    reading the same numbers.
    """
    g = model.graph
    if isinstance(model.chain, SimpleRandomWalk):
        if indegree_mode == "exact":
            if model.bounds.size != g.m:
                raise AssertionError("bound table does not align with edges")
            return _kernels.BOUND_TABLE, model.bounds, np.ones(1), np.ones(1)
        kind = model.target.kind
        if kind == "uniform":
            return _kernels.BOUND_ONLINE_UNIFORM, np.zeros(1), np.ones(1), np.ones(1)
        if kind == "indegree":
            return _kernels.BOUND_ONLINE_INDEGREE, np.zeros(1), np.ones(1), np.ones(1)
        if kind == "custom":
            return (
                _kernels.BOUND_ONLINE_CUSTOM,
                np.zeros(1),
                model.target.weights(g),
                np.ones(1),
            )
        raise ValueError(f"online estimation undefined for target {kind!r}")
    if indegree_mode != "exact":
        raise ValueError("online in-degree estimation requires the plain random walk")
    return (
        _kernels.BOUND_TELEPORT,
        np.zeros(1),
        model.target.weights(g),
        model.supports.astype(np.float64),
    )


def _chain_arrays(
    chain: ProposalChain,
) -> tuple[int, np.ndarray, np.ndarray, float]:
    if isinstance(chain, SimpleRandomWalk):
        return 0, np.zeros(1, dtype=np.int64), np.zeros(1, dtype=np.bool_), 0.0
    return 1, chain.seeds, chain.seed_mask, chain.p_follow


def run(config: RunConfig) -> RunResult:
    """Execute one multi-agent run and log metrics at each checkpoint.

    Deterministic for a fixed config: agent RNG streams and starting
    positions derive from ``config.seed`` alone. Unique-query counting
    charges the first visit of each node by any agent (starting
    positions included); redistribution moves revisit recorded nodes,
    so they are never charged. A supplied ``initial_measure`` plays the
    role of prior knowledge: its support is marked visited for free and
    every agent's measure starts from it at record index 0.
    """
    chain = config.chain
    g = chain.graph
    n = g.n
    agents = config.agents
    model = build_acceptance(chain, config.target)
    reference = config.target.reference(g)
    b_mode, b_edge, pi, supp = kernel_tables(model, config.indegree_mode)
    chain_kind, seeds, seed_mask, p_follow = _chain_arrays(chain)

    ss = np.random.SeedSequence(config.seed)
    init_ss, agent_ss = ss.spawn(2)
    init_rng = np.random.default_rng(init_ss)
    rng_states = agent_ss.generate_state(agents, dtype=np.uint64)

    initial_measure = None
    if config.initial_measure is not None:
        initial_measure = np.asarray(config.initial_measure, dtype=np.float64)
        if initial_measure.shape != (n,):
            raise ValueError(f"initial measure must have shape ({n},)")
        if not np.all(np.isfinite(initial_measure)) or np.any(initial_measure < 0):
            raise ValueError("initial measure must be finite and nonnegative")
        if initial_measure.sum() <= 0:
            raise ValueError("initial measure must have positive total")

    if config.start_nodes is not None:
        positions = check_node_array(config.start_nodes, n, name="start_nodes").copy()
        if positions.size != agents:
            raise ValueError("start_nodes must provide one node per agent")
    elif initial_measure is not None:
        dist = initial_measure / initial_measure.sum()
        positions = init_rng.choice(n, size=agents, p=dist).astype(np.int64)
    else:
        positions = init_rng.integers(0, n, size=agents, dtype=np.int64)

    masses = np.zeros((agents, n), dtype=np.float64)
    trees = np.zeros((agents, n + 1), dtype=np.float64)
    totals = np.zeros(agents, dtype=np.float64)
    log2s = np.zeros(agents, dtype=np.float64)
    visited = np.zeros(n, dtype=np.uint8)
    unique_count = np.zeros(1, dtype=np.int64)
    absorb_counts = np.zeros(agents, dtype=np.int64)

    if initial_measure is not None:
        visited[initial_measure > 0] = 1
        for a in range(agents):
            _kernels.measure_seed(masses, trees, totals, a, initial_measure)
    for a in range(agents):
        if visited[positions[a]] == 0:
            visited[positions[a]] = 1
            unique_count[0] += 1
    if initial_measure is None:
        for a in range(agents):
            w0 = config.schedule.weight(0, 0.0)
            _kernels.measure_record(
                masses, trees, totals, log2s, a, positions[a], w0
            )

    if config.mode == "static":
        ceilings = np.full(agents, model.c_true, dtype=np.float64)
    else:
        ceilings = np.ones(agents, dtype=np.float64)
    dhat = np.zeros(n if config.indegree_mode == "online" else 1, dtype=np.int64)
    edge_seen = np.zeros(
        g.m if config.indegree_mode == "online" else 1, dtype=np.uint8
    )

    log = MetricsLog(config_hash=config.fingerprint(), seed=config.seed)
    checkpoints = config.resolved_checkpoints()
    dynamic = config.mode == "dynamic"
    use_online = config.indegree_mode == "online"
    merged = np.zeros(n)
    prev = 0
    for cp in checkpoints:
        _kernels.advance(
            prev + 1,
            int(cp) + 1,
            chain_kind,
            g.out_indptr,
            g.out_indices,
            seeds,
            seed_mask,
            p_follow,
            b_mode,
            b_edge,
            pi,
            supp,
            dynamic,
            config.update_probability,
            config.shared_ceiling,
            ceilings,
            use_online,
            dhat,
            edge_seen,
            config.schedule.code,
            config.schedule.alpha,
            positions,
            rng_states,
            masses,
            trees,
            totals,
            log2s,
            visited,
            unique_count,
            absorb_counts,
        )
        prev = int(cp)
        merged = merge_mass_arrays(
            masses, totals, log2s, average=config.merge == "average"
        )
        ceiling_now = (
            float(ceilings[0]) if config.shared_ceiling else float(ceilings.max())
        )
        log.append(
            step=int(cp),
            tvd=tvd(merged, reference),
            unique_queries=float(unique_count[0]),
            unique_query_pct=100.0 * unique_count[0] / n,
            c_t_max=ceiling_now,
            absorptions=float(absorb_counts.sum()),
        )
    return RunResult(
        distribution=merged,
        reference=reference,
        log=log,
        model=model,
        ceilings=ceilings.copy(),
        unique_queries=int(unique_count[0]),
        absorptions=int(absorb_counts.sum()),
        positions=positions.copy(),
        masses=masses,
        totals=totals,
        log2_scales=log2s,
        indegree_estimates=dhat.copy() if use_online else None,
        edge_seen=edge_seen.astype(bool) if use_online else None,
    )


@dataclass
class AgentState:
    """One walker for the single-step Python path."""

    position: int
    rng_state: int
    measure: EmpiricalMeasure
    ceiling: float = 1.0
    absorptions: int = 0


@dataclass
class SharedState:
    """Knowledge common to all agents on one graph.

    ``dhat`` and ``edge_seen`` exist only for online in-degree
    estimation; ``ceiling`` is set when agents share one ceiling
    instead of learning their own.
    """

    visited: np.ndarray
    unique_queries: int = 0
    dhat: Optional[np.ndarray] = None
    edge_seen: Optional[np.ndarray] = None
    ceiling: Optional[float] = None

    @classmethod
    def for_graph(cls, graph: DirectedGraph, online: bool = False) -> "SharedState":
        return cls(
            visited=np.zeros(graph.n, dtype=np.uint8),
            dhat=np.zeros(graph.n, dtype=np.int64) if online else None,
            edge_seen=np.zeros(graph.m, dtype=np.uint8) if online else None,
        )

    def mark_visited(self, node: int) -> None:
        if self.visited[node] == 0:
            self.visited[node] = 1
            self.unique_queries += 1


def _draw(state):
    # the jitted helper hands uint64 back as a plain int; re-wrap it so
    # the next dispatch does not try to fit values >= 2**63 into int64
    s, u = _kernels.rng_next(np.uint64(state))
    return np.uint64(s), u


def _tick(
    agent: AgentState,
    model: AcceptanceModel,
    schedule: WeightSchedule,
    *,
    dynamic: bool,
    update_probability: float,
    shared: SharedState,
    online: bool,
) -> int:
    """One agent tick; mirrors the compiled kernel draw for draw."""
    chain = model.chain
    g = model.graph
    online = online and shared.dhat is not None
    b_mode, b_edge, pi, supp = kernel_tables(
        model, "online" if online else "exact"
    )
    dhat = shared.dhat if online else np.zeros(1, dtype=np.int64)
    chain_kind, seeds, seed_mask, p_follow = _chain_arrays(chain)
    indptr, indices = g.out_indptr, g.out_indices

    s = np.uint64(agent.rng_state)
    i = agent.position
    epos = np.int64(-1)
    if chain_kind == 0:
        lo = indptr[i]
        deg = indptr[i + 1] - lo
        s, u = _draw(s)
        epos = lo + _kernels.pick_index(u, deg)
        j = int(indices[epos])
    else:
        lo = indptr[i]
        deg = indptr[i + 1] - lo
        if deg == 0:
            s, u = _draw(s)
            j = int(seeds[_kernels.pick_index(u, seeds.size)])
        else:
            s, u = _draw(s)
            if u < p_follow:
                s, u2 = _draw(s)
                epos = lo + _kernels.pick_index(u2, deg)
                j = int(indices[epos])
            else:
                s, u2 = _draw(s)
                j = int(seeds[_kernels.pick_index(u2, seeds.size)])
    if online and epos >= 0 and shared.edge_seen is not None:
        if shared.edge_seen[epos] == 0:
            shared.edge_seen[epos] = 1
            dhat[j] += 1
    b = float(
        _kernels.eval_bound(
            b_mode,
            b_edge,
            pi,
            supp,
            dhat,
            indptr,
            indices,
            seed_mask,
            seeds.size,
            p_follow,
            i,
            j,
            epos,
        )
    )
    use_shared = shared.ceiling is not None
    ceiling = shared.ceiling if use_shared else agent.ceiling
    if dynamic:
        s, u1 = _draw(s)
        if u1 <= update_probability and ceiling < b:
            ceiling = b
            if use_shared:
                shared.ceiling = b
            else:
                agent.ceiling = b
    s, u2 = _draw(s)
    if u2 <= b / ceiling:
        z = j
        shared.mark_visited(z)
    else:
        s, u3 = _draw(s)
        m = agent.measure
        z = int(
            _kernels.measure_sample(m._tree2[0], m._m2[0], m._tot[0], u3)
        )
        agent.absorptions += 1
    agent.measure.record(z, schedule)
    agent.position = z
    agent.rng_state = int(s)
    return z


def step_static(
    agent: AgentState,
    model: AcceptanceModel,
    schedule: WeightSchedule,
    shared: SharedState,
) -> int:
    """Advance one agent under the fixed exact ceiling.

    The caller must have set ``agent.ceiling`` (or ``shared.ceiling``)
    to ``model.c_true``; acceptance is bound / ceiling and rejection
    redistributes according to the agent's current measure.
    """
    return _tick(
        agent,
        model,
        schedule,
        dynamic=False,
        update_probability=0.0,
        shared=shared,
        online=False,
    )


def step_dynamic(
    agent: AgentState,
    model: AcceptanceModel,
    schedule: WeightSchedule,
    shared: SharedState,
    update_probability: float,
    online: bool = False,
) -> int:
    """Advance one agent while learning the ceiling.

    Each proposal's bound may raise the ceiling with probability
    ``update_probability`` before the acceptance draw; the ceiling
    never decreases. With ``online`` the bound reads shared in-degree
    estimates (counts of discovered in-edges) instead of exact ones.
    """
    return _tick(
        agent,
        model,
        schedule,
        dynamic=True,
        update_probability=update_probability,
        shared=shared,
        online=online,
    )
