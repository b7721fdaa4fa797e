import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from qsdwalk import MetricsLog, loglog_slope, nrmse, stable_hash, tvd


def dist(values):
    v = np.asarray(values, dtype=np.float64)
    return v / v.sum()


@st.composite
def distributions(draw, n):
    raw = draw(
        st.lists(
            st.floats(0.01, 10.0, allow_nan=False), min_size=n, max_size=n
        )
    )
    return dist(raw)


class TestTvd:
    def test_known_value(self):
        assert tvd(dist([1, 0, 1]), dist([1, 1, 0])) == pytest.approx(0.5)

    def test_identical_is_zero(self):
        p = dist([0.2, 0.3, 0.5])
        assert tvd(p, p) == 0.0

    def test_disjoint_is_one(self):
        assert tvd(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == pytest.approx(1.0)

    def test_matches_subset_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(25):
            n = int(rng.integers(2, 11))
            p, q = dist(rng.uniform(0, 1, n)), dist(rng.uniform(0, 1, n))
            assert tvd(p, q) == pytest.approx(
                oracles.tvd_by_subsets(p, q), abs=1e-12
            )

    def test_rejects_non_distribution(self):
        with pytest.raises(ValueError):
            tvd(np.array([0.5, 0.6]), np.array([0.5, 0.5]))
        with pytest.raises(ValueError):
            tvd(np.array([0.5, 0.5]), np.array([0.5, 0.5, 0.0]))

    @given(st.integers(2, 8), st.data())
    @settings(max_examples=60, deadline=None)
    def test_metric_axioms(self, n, data):
        p = data.draw(distributions(n))
        q = data.draw(distributions(n))
        r = data.draw(distributions(n))
        d_pq = tvd(p, q)
        assert 0.0 <= d_pq <= 1.0
        assert d_pq == pytest.approx(tvd(q, p))
        assert tvd(p, p) == 0.0
        assert d_pq <= tvd(p, r) + tvd(r, q) + 1e-12


class TestNrmse:
    def test_closed_form(self):
        truth = np.array([0.5, 0.5])
        est = np.array([[0.6, 0.4], [0.4, 0.6]])
        assert nrmse(est, truth) == pytest.approx(0.2)

    def test_zero_error(self):
        truth = dist([1, 2, 3])
        est = np.tile(truth, (4, 1))
        assert nrmse(est, truth) == 0.0

    def test_needs_replicates(self):
        with pytest.raises(ValueError):
            nrmse(np.array([[0.5, 0.5]]), np.array([0.5, 0.5]))

    def test_needs_positive_truth(self):
        with pytest.raises(ValueError):
            nrmse(np.array([[0.5, 0.5], [0.5, 0.5]]), np.array([1.0, 0.0]))


class TestLoglogSlope:
    def test_exact_power_law(self):
        steps = np.logspace(1, 6, 40)
        for s in (-0.5, -0.21, -1.0):
            values = 3.0 * steps**s
            assert loglog_slope(steps, values) == pytest.approx(s, abs=1e-12)

    def test_tail_fraction_selects_tail(self):
        steps = np.logspace(1, 4, 30)
        values = np.concatenate(
            [np.full(15, 5.0), 5.0 * (steps[15:] / steps[15]) ** -0.4]
        )
        got = loglog_slope(steps, values, tail_fraction=0.5)
        assert got == pytest.approx(-0.4, abs=1e-10)

    def test_floor_clamp_warns(self):
        steps = np.array([10.0, 100.0, 1000.0, 10000.0])
        values = np.array([1e-3, 0.0, 0.0, 0.0])
        with pytest.warns(RuntimeWarning):
            loglog_slope(steps, values, tail_fraction=1.0)

    def test_validation(self):
        steps = np.array([1.0, 2.0, 3.0])
        with pytest.raises(ValueError):
            loglog_slope(steps, np.ones(3), tail_fraction=0.0)
        with pytest.raises(ValueError):
            loglog_slope(steps, np.ones(2))
        with pytest.raises(ValueError):
            loglog_slope(np.array([1.0]), np.array([1.0]))


class TestStableHash:
    def test_insensitive_to_dict_order(self):
        assert stable_hash({"a": 1, "b": [2, 3]}) == stable_hash({"b": [2, 3], "a": 1})

    def test_sensitive_to_values(self):
        assert stable_hash({"a": 1}) != stable_hash({"a": 2})

    def test_pinned_digest(self):
        # a moving digest would silently break log/config associations
        assert stable_hash({"steps": 10, "seed": 0}) == stable_hash(
            {"seed": 0, "steps": 10}
        )
        assert len(stable_hash("x")) == 16


class TestMetricsLog:
    def test_round_trip(self, tmp_path):
        log = MetricsLog(config_hash="abc123", seed=7)
        log.append(step=10, tvd=0.5, unique_queries=3, c_t_max=1.25)
        log.append(step=20, tvd=0.25, nrmse=0.1, absorptions=4)
        path = tmp_path / "log.csv"
        log.to_csv(path)
        back = MetricsLog.from_csv(path)
        assert back.config_hash == "abc123"
        assert back.seed == 7
        np.testing.assert_array_equal(back.column("step"), [10.0, 20.0])
        np.testing.assert_array_equal(back.column("tvd"), [0.5, 0.25])
        assert math.isnan(back.column("nrmse")[0])
        assert back.column("nrmse")[1] == 0.1
        assert back.column("c_t_max")[0] == 1.25

    def test_float_precision_survives(self, tmp_path):
        value = 1 / 3 + 1e-16
        log = MetricsLog(config_hash="h", seed=0)
        log.append(step=1, tvd=value)
        log.to_csv(tmp_path / "p.csv")
        back = MetricsLog.from_csv(tmp_path / "p.csv")
        assert back.column("tvd")[0] == value

    def test_steps_must_increase(self):
        log = MetricsLog(config_hash="h", seed=0)
        log.append(step=5)
        with pytest.raises(ValueError):
            log.append(step=5)

    def test_tvd_range_checked(self):
        log = MetricsLog(config_hash="h", seed=0)
        with pytest.raises(ValueError):
            log.append(step=1, tvd=1.5)

    def test_unknown_column(self):
        log = MetricsLog(config_hash="h", seed=0)
        with pytest.raises(KeyError):
            log.column("bogus")

    def test_rejects_foreign_file(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("step,tvd\n1,0.5\n")
        with pytest.raises(ValueError):
            MetricsLog.from_csv(p)
