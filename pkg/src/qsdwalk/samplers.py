"""Estimator-style front ends for the samplers.

Thin wrappers following the scikit-learn conventions: constructor
stores parameters untouched, ``fit`` consumes a graph and exposes
results as trailing-underscore attributes, ``get_params`` round-trips.
The library modules stay importable on their own; these classes only
orchestrate them.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .baselines import DurwResult, UndirectedView, durw_run, mh_run
from .empirical import WeightSchedule
from .engine import RunConfig, run
from .graph import DirectedGraph
from .targets import SimpleRandomWalk, TargetSpec, TeleportingWalk
from .validation import check_probability_vector, require_graph


def _resolve_target(target, target_vector) -> TargetSpec:
    if isinstance(target, TargetSpec):
        if target_vector is not None:
            raise ValueError("pass the vector inside the TargetSpec, not separately")
        return target
    if target == "custom":
        if target_vector is None:
            raise ValueError("custom target needs target_vector")
        return TargetSpec.custom(np.asarray(target_vector, dtype=np.float64))
    if target in ("uniform", "indegree", "evc"):
        if target_vector is not None:
            raise ValueError(f"{target} target does not take target_vector")
        return TargetSpec(target)
    raise ValueError(f"unknown target {target!r}")


def _resolve_schedule(schedule, alpha) -> WeightSchedule:
    if isinstance(schedule, WeightSchedule):
        return schedule
    if schedule == "polynomial":
        return WeightSchedule.polynomial(alpha)
    if schedule in ("constant", "subexponential"):
        return WeightSchedule(schedule)
    raise ValueError(f"unknown schedule {schedule!r}")


class ReinforcedWalkSampler(BaseEstimator):
    """Estimate a target distribution on a directed graph by crawling it.

    Parameters mirror the run configuration: proposal chain (``srw``
    or ``teleport`` with seeds), target (``uniform``, ``indegree``,
    ``evc``, or ``custom`` with an explicit vector), weight schedule,
    acceptance mode, and budget. ``fit(graph)`` runs the agents and
    exposes the merged estimate as ``distribution_`` along with the
    per-checkpoint ``log_``.
    """

    def __init__(
        self,
        target="uniform",
        target_vector=None,
        proposal="srw",
        seeds=None,
        p_follow=0.95,
        schedule="constant",
        alpha=1.0,
        mode="static",
        update_probability=0.01,
        indegree_mode="exact",
        agents=1,
        steps=10000,
        seed=0,
        checkpoints=None,
        initial_measure=None,
        start_nodes=None,
        shared_ceiling=False,
        merge="pool",
    ):
        self.target = target
        self.target_vector = target_vector
        self.proposal = proposal
        self.seeds = seeds
        self.p_follow = p_follow
        self.schedule = schedule
        self.alpha = alpha
        self.mode = mode
        self.update_probability = update_probability
        self.indegree_mode = indegree_mode
        self.agents = agents
        self.steps = steps
        self.seed = seed
        self.checkpoints = checkpoints
        self.initial_measure = initial_measure
        self.start_nodes = start_nodes
        self.shared_ceiling = shared_ceiling
        self.merge = merge

    def _build_chain(self, graph: DirectedGraph):
        if self.proposal == "srw":
            if self.seeds is not None:
                raise ValueError("seeds only apply to the teleport proposal")
            return SimpleRandomWalk(graph)
        if self.proposal == "teleport":
            if self.seeds is None:
                raise ValueError("teleport proposal needs seeds")
            return TeleportingWalk(
                graph, np.asarray(self.seeds, dtype=np.int64), self.p_follow
            )
        raise ValueError(f"unknown proposal {self.proposal!r}")

    def fit(self, X, y=None):
        graph = require_graph(X)
        config = RunConfig(
            chain=self._build_chain(graph),
            target=_resolve_target(self.target, self.target_vector),
            schedule=_resolve_schedule(self.schedule, self.alpha),
            steps=self.steps,
            agents=self.agents,
            mode=self.mode,
            update_probability=self.update_probability,
            indegree_mode=self.indegree_mode,
            seed=self.seed,
            checkpoints=self.checkpoints,
            initial_measure=self.initial_measure,
            start_nodes=self.start_nodes,
            shared_ceiling=self.shared_ceiling,
            merge=self.merge,
        )
        result = run(config)
        self.n_nodes_ = graph.n
        self.distribution_ = result.distribution
        self.reference_ = result.reference
        self.log_ = result.log
        self.model_ = result.model
        self.c_true_ = result.model.c_true
        self.ceilings_ = result.ceilings
        self.unique_queries_ = result.unique_queries
        self.absorptions_ = result.absorptions
        self.result_ = result
        return self

    def sample(self, size: int = 1, random_state=None) -> np.ndarray:
        """Draw node indices from the fitted estimate."""
        check_is_fitted(self, "distribution_")
        rng = np.random.default_rng(random_state)
        return rng.choice(self.n_nodes_, size=size, p=self.distribution_)


class MetropolisHastingsSampler(BaseEstimator):
    """Classical reversible sampler on the undirected view of a graph.

    ``variant="max"`` proposes over max-degree slots with lazy holds;
    ``variant="neighbor"`` proposes uniformly over neighbors. Targets:
    ``uniform`` or ``custom`` with an explicit vector over nodes.
    """

    def __init__(
        self,
        variant="max",
        target="uniform",
        target_vector=None,
        walkers=1,
        steps=10000,
        seed=0,
        checkpoints=None,
    ):
        self.variant = variant
        self.target = target
        self.target_vector = target_vector
        self.walkers = walkers
        self.steps = steps
        self.seed = seed
        self.checkpoints = checkpoints

    def fit(self, X, y=None):
        view = X if isinstance(X, UndirectedView) else UndirectedView.from_directed(require_graph(X))
        if self.target == "uniform":
            target = np.full(view.n, 1.0 / view.n)
        elif self.target == "custom":
            if self.target_vector is None:
                raise ValueError("custom target needs target_vector")
            target = check_probability_vector(
                np.asarray(self.target_vector, dtype=np.float64), view.n, name="target"
            )
        else:
            raise ValueError(f"unknown target {self.target!r}")
        estimate, log = mh_run(
            view,
            target,
            variant=self.variant,
            walkers=self.walkers,
            steps=self.steps,
            seed=self.seed,
            checkpoints=self.checkpoints,
        )
        self.view_ = view
        self.target_ = target
        self.distribution_ = estimate
        self.log_ = log
        return self


class DurwSampler(BaseEstimator):
    """Directed crawler with random jumps and degree reweighting."""

    def __init__(
        self,
        jump_weight=1.0,
        jump_cost=1.0,
        steps=10000,
        seed=0,
        start=None,
        checkpoints=None,
    ):
        self.jump_weight = jump_weight
        self.jump_cost = jump_cost
        self.steps = steps
        self.seed = seed
        self.start = start
        self.checkpoints = checkpoints

    def fit(self, X, y=None):
        graph = require_graph(X)
        result: DurwResult = durw_run(
            graph,
            jump_weight=self.jump_weight,
            jump_cost=self.jump_cost,
            steps=self.steps,
            seed=self.seed,
            start=self.start,
            checkpoints=self.checkpoints,
        )
        self.distribution_ = result.estimate
        self.query_cost_ = result.query_cost
        self.unique_visits_ = result.unique_visits
        self.jumps_ = result.jumps
        self.log_ = result.log
        self.result_ = result
        return self
