import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from helpers import random_sc_digraph, random_target
from qsdwalk import (
    DurwSampler,
    MetropolisHastingsSampler,
    ReinforcedWalkSampler,
    RunConfig,
    SimpleRandomWalk,
    TargetSpec,
    WeightSchedule,
    durw_run,
    mh_run,
    run,
)


@pytest.fixture(scope="module")
def graph():
    return random_sc_digraph(np.random.default_rng(0), 12)


class TestEstimatorContract:
    def test_get_params_round_trip(self, graph):
        est = ReinforcedWalkSampler(steps=123, mode="dynamic", alpha=3.0)
        params = est.get_params()
        assert params["steps"] == 123
        assert params["mode"] == "dynamic"
        rebuilt = ReinforcedWalkSampler(**params)
        assert rebuilt.get_params() == params

    def test_set_params(self):
        est = ReinforcedWalkSampler()
        est.set_params(steps=77, agents=4)
        assert est.steps == 77 and est.agents == 4
        with pytest.raises(ValueError):
            est.set_params(bogus=1)

    def test_clone_before_fit(self, graph):
        est = ReinforcedWalkSampler(steps=200, schedule="polynomial", alpha=2.0)
        est.fit(graph)
        fresh = clone(est)
        assert fresh.get_params() == est.get_params()
        assert not hasattr(fresh, "distribution_")

    def test_fit_returns_self_and_sets_attributes(self, graph):
        est = ReinforcedWalkSampler(steps=300)
        assert est.fit(graph) is est
        assert est.distribution_.shape == (graph.n,)
        assert est.distribution_.sum() == pytest.approx(1.0)
        assert est.reference_.shape == (graph.n,)
        assert est.c_true_ == est.model_.c_true
        assert len(est.log_) > 0

    def test_sample_requires_fit(self):
        with pytest.raises(NotFittedError):
            ReinforcedWalkSampler().sample(3)

    def test_sample_reproducible(self, graph):
        est = ReinforcedWalkSampler(steps=300).fit(graph)
        a = est.sample(50, random_state=5)
        b = est.sample(50, random_state=5)
        assert np.array_equal(a, b)
        assert a.min() >= 0 and a.max() < graph.n

    def test_baseline_estimators_follow_contract(self, graph):
        for est in (MetropolisHastingsSampler(steps=200), DurwSampler(steps=200)):
            params = est.get_params()
            assert type(est)(**params).get_params() == params
            fitted = est.fit(graph)
            assert fitted is est
            assert est.distribution_.sum() == pytest.approx(1.0)


class TestReinforcedWalkSampler:
    def test_matches_engine_run(self, graph):
        est = ReinforcedWalkSampler(
            target="indegree",
            schedule="polynomial",
            alpha=3.0,
            mode="dynamic",
            update_probability=0.2,
            agents=3,
            steps=400,
            seed=9,
        ).fit(graph)
        config = RunConfig(
            chain=SimpleRandomWalk(graph),
            target=TargetSpec("indegree"),
            schedule=WeightSchedule.polynomial(3.0),
            steps=400,
            agents=3,
            mode="dynamic",
            update_probability=0.2,
            seed=9,
        )
        result = run(config)
        assert np.array_equal(est.distribution_, result.distribution)
        assert np.array_equal(est.ceilings_, result.ceilings)
        assert est.unique_queries_ == result.unique_queries
        assert est.absorptions_ == result.absorptions

    def test_custom_target(self, graph):
        vec = random_target(np.random.default_rng(1), graph.n)
        est = ReinforcedWalkSampler(
            target="custom", target_vector=vec, steps=300
        ).fit(graph)
        assert np.allclose(est.reference_, vec)

    def test_teleport_proposal(self, graph):
        est = ReinforcedWalkSampler(
            proposal="teleport", seeds=[0, 1], p_follow=0.9, steps=300
        ).fit(graph)
        assert est.distribution_.sum() == pytest.approx(1.0)

    def test_parameter_validation(self, graph):
        with pytest.raises(ValueError, match="target_vector"):
            ReinforcedWalkSampler(target="custom").fit(graph)
        with pytest.raises(ValueError, match="does not take"):
            ReinforcedWalkSampler(
                target="uniform", target_vector=np.full(graph.n, 1 / graph.n)
            ).fit(graph)
        with pytest.raises(ValueError, match="unknown target"):
            ReinforcedWalkSampler(target="popularity").fit(graph)
        with pytest.raises(ValueError, match="unknown schedule"):
            ReinforcedWalkSampler(schedule="harmonic").fit(graph)
        with pytest.raises(ValueError, match="unknown proposal"):
            ReinforcedWalkSampler(proposal="levy").fit(graph)
        with pytest.raises(ValueError, match="needs seeds"):
            ReinforcedWalkSampler(proposal="teleport").fit(graph)
        with pytest.raises(ValueError, match="only apply"):
            ReinforcedWalkSampler(proposal="srw", seeds=[0]).fit(graph)

    def test_spec_objects_pass_through(self, graph):
        vec = random_target(np.random.default_rng(2), graph.n)
        est = ReinforcedWalkSampler(
            target=TargetSpec("custom", vec),
            schedule=WeightSchedule.subexponential(),
            steps=200,
        ).fit(graph)
        assert np.allclose(est.reference_, vec)
        with pytest.raises(ValueError, match="inside the TargetSpec"):
            ReinforcedWalkSampler(
                target=TargetSpec("custom", vec), target_vector=vec
            ).fit(graph)

    def test_rejects_non_graph(self):
        with pytest.raises(TypeError):
            ReinforcedWalkSampler().fit(np.eye(3))


class TestBaselineSamplers:
    def test_mh_matches_run(self, graph):
        est = MetropolisHastingsSampler(
            variant="neighbor", walkers=3, steps=400, seed=2
        ).fit(graph)
        expected, _ = mh_run(
            graph,
            np.full(graph.n, 1.0 / graph.n),
            variant="neighbor",
            walkers=3,
            steps=400,
            seed=2,
        )
        assert np.array_equal(est.distribution_, expected)

    def test_mh_custom_target(self, graph):
        vec = random_target(np.random.default_rng(3), graph.n)
        est = MetropolisHastingsSampler(
            target="custom", target_vector=vec, steps=300
        ).fit(graph)
        assert np.allclose(est.target_, vec)
        with pytest.raises(ValueError, match="target_vector"):
            MetropolisHastingsSampler(target="custom").fit(graph)
        with pytest.raises(ValueError, match="unknown target"):
            MetropolisHastingsSampler(target="indegree").fit(graph)

    def test_durw_matches_run(self, graph):
        est = DurwSampler(jump_weight=2.0, steps=500, seed=4).fit(graph)
        expected = durw_run(graph, jump_weight=2.0, steps=500, seed=4)
        assert np.array_equal(est.distribution_, expected.estimate)
        assert est.query_cost_ == expected.query_cost
        assert est.jumps_ == expected.jumps
