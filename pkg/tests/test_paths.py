import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from tanakasim.paths import (
    GridPath,
    RngStream,
    TimeGrid,
    bridge_extremum,
    bridge_lower_crossing_prob,
    brownian_batch,
    running_max,
    sample_brownian,
    streams_for,
)

floats = st.floats(-10, 10, allow_nan=False)


class TestTimeGrid:
    def test_uniform(self):
        g = TimeGrid.uniform(1.0, 0.25)
        assert np.allclose(g.t, [0, 0.25, 0.5, 0.75, 1.0])
        assert g.n_steps == 4 and g.horizon == 1.0

    @pytest.mark.parametrize("t", [[], [0.1, 0.2], [0.0, 0.5, 0.5], [0.0, 1.0, 0.5]])
    def test_invalid(self, t):
        with pytest.raises(ValueError):
            TimeGrid(np.array(t))

    def test_horizon_not_multiple(self):
        with pytest.raises(ValueError):
            TimeGrid.uniform(1.0, 0.3)

    def test_nonuniform_allowed(self):
        g = TimeGrid(np.array([0.0, 0.1, 0.5, 2.0]))
        assert np.allclose(g.dt, [0.1, 0.4, 1.5])

    def test_path_length_must_match(self):
        with pytest.raises(ValueError):
            GridPath(TimeGrid.uniform(1.0, 0.5), np.zeros(2))


class TestSampleBrownian:
    def test_single_point_grid(self):
        p = sample_brownian(TimeGrid(np.array([0.0])), RngStream(1))
        assert p.values.tolist() == [0.0]

    def test_increment_variance(self):
        grid = TimeGrid.uniform(100.0, 0.01)
        for seed in range(5):
            inc = np.diff(sample_brownian(grid, RngStream(seed)).values)
            assert 0.0097 <= np.var(inc, ddof=1) <= 0.0103

    def test_bit_identical(self):
        grid = TimeGrid.uniform(1.0, 1e-3)
        a = sample_brownian(grid, RngStream(99, 3))
        b = sample_brownian(grid, RngStream(99, 3))
        c = sample_brownian(grid, RngStream(99, 4))
        assert np.array_equal(a.values, b.values)
        assert not np.array_equal(a.values, c.values)

    def test_batch_rows_match_single_paths(self):
        grid = TimeGrid.uniform(1.0, 1e-2)
        batch = brownian_batch(grid, streams_for(5, range(3)))
        for k in range(3):
            assert np.array_equal(batch.values[k], sample_brownian(grid, RngStream(5, k)).values)

    def test_normality(self):
        grid = TimeGrid.uniform(10.0, 1e-3)
        w = brownian_batch(grid, streams_for(17, range(10)))
        z = np.diff(w.values, axis=1).ravel() / math.sqrt(1e-3)
        assert stats.kstest(z, "norm").pvalue > 1e-4

    def test_nonuniform_grid_variance(self):
        grid = TimeGrid(np.concatenate([[0.0], np.cumsum(np.tile([1e-3, 4e-3], 5000))]))
        w = brownian_batch(grid, streams_for(3, range(4))).values
        z = np.diff(w, axis=1) / np.sqrt(grid.dt)
        assert abs(np.var(z) - 1.0) < 0.03


class TestRunningMax:
    def test_examples(self):
        g = TimeGrid.uniform(2.0, 1.0)
        assert running_max(GridPath(g, np.array([0.0, 1.0, -1.0]))).values.tolist() == [0, 1, 1]
        assert running_max(GridPath(g, np.full(3, 2.5))).values.tolist() == [2.5] * 3
        b = np.array([0.0, -0.5, 0.2])
        assert running_max(GridPath(g, -b)).values.tolist() == [0, 0.5, 0.5]

    @given(st.lists(floats, min_size=1, max_size=50))
    def test_idempotent_and_nondecreasing(self, v):
        p = GridPath(TimeGrid(np.arange(len(v), dtype=float)), np.array(v))
        m = running_max(p)
        assert np.array_equal(running_max(m).values, m.values)
        assert np.all(np.diff(m.values) >= 0)
        assert np.all(m.values >= p.values)


class TestBridge:
    def test_formula(self):
        assert bridge_lower_crossing_prob(1.0, 1.0, 0.0, 0.5) == pytest.approx(math.exp(-4))
        assert bridge_lower_crossing_prob(1.0, 1.0, 0.0, 0.5) == pytest.approx(0.0183, abs=1e-4)

    def test_small_dt_limit(self):
        assert bridge_lower_crossing_prob(0.1, 0.1, 0.0, 1e-6) == 0.0

    @pytest.mark.parametrize("x0,x1", [(0.0, 1.0), (1.0, -0.1), (-1.0, -1.0)])
    def test_crossed_endpoints_rejected(self, x0, x1):
        with pytest.raises(ValueError):
            bridge_lower_crossing_prob(x0, x1, 0.0, 1.0)

    @given(st.floats(0.01, 3), st.floats(0.01, 3), st.floats(0.01, 2), st.floats(1e-6, 1.0))
    def test_extremum_inverts_crossing(self, a, b, dt, u):
        m = bridge_extremum(a, b, dt, u, upper=False)
        assert m <= min(a, b) + 1e-12
        if m < min(a, b) - 1e-9:
            assert bridge_lower_crossing_prob(a - m, b - m, 0.0, dt) == pytest.approx(u, rel=1e-6)

    def test_crossing_frequency_against_fine_bridges(self):
        # discretely monitored bridges with the Broadie-Glasserman-Kou shift
        n, m = 20_000, 1000
        d = 1.0 / m
        g = RngStream(2024, 0, (1,)).generator()
        out = 0
        t = np.arange(1, m + 1) * d
        for k in range(0, n, 2000):
            w = np.cumsum(g.standard_normal((2000, m)) * math.sqrt(d), axis=1)
            bridge = 1.0 + w - t * w[:, -1:]
            out += int(np.sum(bridge.min(axis=1) <= 0.5826 * math.sqrt(d)))
        p = out / n
        se = math.sqrt(p * (1 - p) / n)
        assert abs(p - math.exp(-2)) < 3 * se
