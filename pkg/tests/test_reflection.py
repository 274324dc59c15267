import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import stats

from tanakasim.paths import GridPath, TimeGrid, brownian_batch, streams_for
from tanakasim.reflection import bridge_step_minima, local_time_estimate, reflected_drifted_bm, skorokhod_map

values = arrays(float, st.integers(1, 60), elements=st.floats(-5, 5, allow_nan=False))


def path(v):
    v = np.asarray(v, dtype=float)
    return GridPath(TimeGrid(np.arange(v.size, dtype=float)), v)


class TestSkorokhod:
    def test_example(self):
        d = skorokhod_map(path([0.0, -1.0, -0.5]))
        assert d.l.values.tolist() == [0, 1, 1]
        assert d.z.values.tolist() == [0, 0, 0.5]

    def test_nonnegative_input_unchanged(self):
        v = np.array([0.0, 0.3, 2.0, 0.1])
        d = skorokhod_map(path(v))
        assert np.array_equal(d.z.values, v) and not d.l.values.any()

    @given(values)
    def test_decomposition(self, v):
        d = skorokhod_map(path(v))
        assert np.all(d.z.values >= 0)
        assert np.array_equal(d.z.values, v + d.l.values)
        assert np.all(np.diff(d.l.values) >= 0)
        assert d.l.values[0] == max(0.0, -v[0])
        assert np.array_equal(skorokhod_map(d.z).z.values, d.z.values)

    @given(values, st.floats(0, 1), st.integers(0, 2**32))
    def test_minimal(self, v, scale, seed):
        l = skorokhod_map(path(v)).l.values
        g = np.cumsum(np.random.default_rng(seed).exponential(scale, v.size))
        g += max(0.0, float(np.max(-v - g)))
        assert np.all(l <= g + 1e-12)
        if l.max() > 0:
            assert np.min(v + np.maximum(l - 0.5 * l.max(), 0)) < 0

    @given(values, st.integers(0, 2**32))
    def test_monotone_for_ordered_increments(self, v, seed):
        lift = np.cumsum(np.random.default_rng(seed).exponential(1.0, v.size))
        assert np.all(skorokhod_map(path(v)).z.values <= skorokhod_map(path(v + lift)).z.values + 1e-12)

    def test_pointwise_order_alone_is_not_enough(self):
        z1 = skorokhod_map(path([0.0, -1.0, 0.0])).z.values
        z2 = skorokhod_map(path([0.0, 0.0, 0.0])).z.values
        assert z1[2] > z2[2]

    @given(values)
    def test_flat_off_zero(self, v):
        d = skorokhod_map(path(v))
        grew = np.diff(d.l.values) > 0
        assert np.all(d.z.values[1:][grew] == 0.0)

    def test_step_minima_shape_checked(self):
        with pytest.raises(ValueError):
            skorokhod_map(path([0.0, 1.0, 2.0]), np.zeros(3))


class TestReflectedDriftedBM:
    def test_deterministic(self):
        grid = TimeGrid.uniform(3.0, 0.5)
        d = reflected_drifted_bm(1.0, 1.0, GridPath(grid, np.zeros(len(grid))))
        assert np.allclose(d.z.values, np.maximum(1.0 - grid.t, 0.0))

    @pytest.mark.parametrize("x0,lam", [(1.0, 0.0), (1.0, -1.0), (-0.5, 1.0)])
    def test_errors(self, x0, lam):
        grid = TimeGrid.uniform(1.0, 0.5)
        with pytest.raises(ValueError):
            reflected_drifted_bm(x0, lam, GridPath(grid, np.zeros(len(grid))))

    def test_bridge_minima_below_endpoints(self):
        grid = TimeGrid.uniform(1.0, 1e-2)
        streams = streams_for(1, range(5))
        w = brownian_batch(grid, streams)
        m = bridge_step_minima(w, streams)
        assert np.all(m <= np.minimum(w.values[:, 1:], w.values[:, :-1]))

    def test_exponential_law(self):
        # short horizon version of the invariant-law scenario
        grid = TimeGrid.uniform(10.0, 1e-2)
        streams = streams_for(5, range(4000))
        z = reflected_drifted_bm(0.0, 1.0, brownian_batch(grid, streams), streams).z.values[:, -1]
        assert stats.kstest(z, lambda x: 1 - np.exp(-2 * x)).pvalue > 1e-4


class TestLocalTime:
    def test_away_from_zero(self):
        grid = TimeGrid.uniform(1.0, 0.1)
        lt = local_time_estimate(GridPath(grid, np.full(len(grid), 0.5)), grid.dt, 0.1)
        assert not lt.values.any()

    def test_at_zero(self):
        grid = TimeGrid.uniform(1.0, 0.01)
        lt = local_time_estimate(GridPath(grid, np.zeros(len(grid))), grid.dt, 0.2)
        assert lt.values[-1] == pytest.approx(1 / 0.8)

    def test_epsilon_positive(self):
        grid = TimeGrid.uniform(1.0, 0.5)
        with pytest.raises(ValueError):
            local_time_estimate(GridPath(grid, np.zeros(3)), grid.dt, 0.0)

    def test_mean_matches_half_normal(self):
        grid = TimeGrid.uniform(1.0, 1e-4)
        w = brownian_batch(grid, streams_for(2, range(2000)))
        lt = local_time_estimate(w, grid.dt, 0.02).values[:, -1]
        se = lt.std() / math.sqrt(lt.size)
        assert abs(lt.mean() - 0.5 * math.sqrt(2 / math.pi)) < 4 * se + 0.01
