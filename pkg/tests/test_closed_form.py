import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from tanakasim.closed_form import NOT_CROSSED, first_passage, hitting_probability, solve_stopped
from tanakasim.paths import GridPath, RngStream, TimeGrid, brownian_batch, sample_brownian, streams_for


def drifted_hit_prob(x0, lam, horizon):
    s = math.sqrt(horizon)
    return stats.norm.cdf((-x0 - lam * horizon) / s) + math.exp(-2 * lam * x0) * stats.norm.cdf((-x0 + lam * horizon) / s)


class TestSolveStopped:
    def test_start_nonpositive(self):
        grid = TimeGrid.uniform(1.0, 0.01)
        sol = solve_stopped(-0.3, -1.0, sample_brownian(grid, RngStream(1)))
        assert sol.tau == 0.0 and sol.tau_index == 0
        assert np.array_equal(sol.x.values, -0.3 - grid.t)

    def test_zero_noise(self):
        grid = TimeGrid.uniform(2.0, 0.01)
        sol = solve_stopped(1.0, -1.0, GridPath(grid, np.zeros(len(grid))))
        assert sol.tau == pytest.approx(1.0)
        assert np.allclose(sol.x.values, 1.0 - grid.t, atol=1e-12)

    def test_positive_drift_rejected(self):
        grid = TimeGrid.uniform(1.0, 0.1)
        with pytest.raises(ValueError):
            solve_stopped(1.0, 0.5, GridPath(grid, np.zeros(len(grid))))

    def test_bridge_needs_stream(self):
        grid = TimeGrid.uniform(1.0, 0.1)
        with pytest.raises(ValueError):
            solve_stopped(1.0, -1.0, GridPath(grid, np.zeros(len(grid))), use_bridge_correction=True)

    def test_not_crossed_sentinel(self):
        grid = TimeGrid.uniform(1.0, 0.1)
        sol = solve_stopped(5.0, 0.0, GridPath(grid, np.zeros(len(grid))))
        assert sol.tau_index == NOT_CROSSED and math.isinf(sol.tau) and not sol.crossed

    def test_negative_start_is_stopped_at_once(self):
        grid = TimeGrid.uniform(1.0, 0.1)
        w = brownian_batch(grid, streams_for(1, range(3)))
        sol = solve_stopped(-0.5, -1.0, w)
        assert np.all(sol.tau == 0.0)
        assert np.allclose(sol.x.values, -0.5 - grid.t)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0, 2), st.floats(-3, 0), st.integers(0, 2**32), st.booleans())
    def test_construction_identity(self, zeta, lam, seed, bridge):
        grid = TimeGrid.uniform(1.0, 1e-3)
        streams = streams_for(seed, range(4))
        w = brownian_batch(grid, streams)
        sol = solve_stopped(zeta, lam, w, bridge, streams)
        t = grid.t
        for k in range(4):
            tau = sol.tau[k]
            stopped = t >= tau
            expect = zeta + lam * t + np.where(stopped, sol.w_tau[k], w.values[k])
            assert np.array_equal(sol.x.values[k], expect)
            if np.isfinite(tau):
                # leaves (0, inf) through 0, then moves with the drift only
                assert np.allclose(sol.x.values[k][stopped], lam * (t[stopped] - tau), atol=1e-12)
                assert np.all(sol.x.values[k][~stopped] > 0)

    @settings(max_examples=20, deadline=None)
    @given(st.floats(-3, -0.01), st.integers(0, 2**32))
    def test_never_return(self, lam, seed):
        grid = TimeGrid.uniform(2.0, 1e-3)
        streams = streams_for(seed, range(8))
        x = solve_stopped(0.5, lam, brownian_batch(grid, streams), True, streams).x.values
        for row in x:
            below = np.nonzero(row <= -1e-2)[0]
            if below.size:
                assert np.all(row[below[0]:] < 0)

    def test_zero_drift_absorbs(self):
        grid = TimeGrid.uniform(4.0, 1e-3)
        streams = streams_for(8, range(200))
        sol = solve_stopped(1.0, 0.0, brownian_batch(grid, streams), True, streams)
        for k in np.nonzero(sol.crossed)[0]:
            assert np.all(sol.x.values[k, sol.tau_index[k]:] == 0.0)

    def test_batch_matches_single(self):
        grid = TimeGrid.uniform(1.0, 1e-2)
        streams = streams_for(3, range(5))
        w = brownian_batch(grid, streams)
        batch = solve_stopped(0.3, -0.5, w, True, streams)
        for k in range(5):
            one = solve_stopped(0.3, -0.5, w[k], True, streams[k])
            assert np.array_equal(one.x.values, batch.x.values[k])
            assert one.tau == batch.tau[k]

    def test_hitting_law(self):
        # with the bridge correction the per-step crossing law is exact, so the
        # first-passage probability matches the drifted-Brownian formula
        zeta, lam, horizon, n = 1.0, -1.0, 4.0, 20_000
        grid = TimeGrid.uniform(horizon, 1e-3)
        hits = []
        for a in range(0, n, 2000):
            streams = streams_for(11, range(a, a + 2000))
            hits.append(solve_stopped(zeta, lam, brownian_batch(grid, streams), True, streams).crossed)
        h = np.concatenate(hits)
        p, se = h.mean(), h.std() / math.sqrt(n)
        assert abs(p - drifted_hit_prob(zeta, lam, horizon)) < 3 * se


class TestFirstPassage:
    def test_agrees_with_stopped_solution(self):
        grid = TimeGrid.uniform(2.0, 1e-3)
        streams = streams_for(21, range(50))
        crossed, tau = first_passage(0.4, -0.2, grid, streams, bridge=True, block=300)
        sol = solve_stopped(0.4, -0.2, brownian_batch(grid, streams), True, streams)
        assert np.array_equal(crossed, sol.crossed)
        assert np.allclose(tau[crossed], sol.tau[crossed], rtol=0, atol=1e-12)

    def test_start_at_zero(self):
        crossed, tau = first_passage(0.0, 1.0, TimeGrid.uniform(1.0, 0.1), streams_for(0, range(3)))
        assert crossed.all() and np.all(tau == 0)

    def test_retire_level_bias_bound(self):
        grid = TimeGrid.uniform(5.0, 1e-3)
        streams = streams_for(4, range(2000))
        full, _ = first_passage(0.5, 1.0, grid, streams, block=500)
        cut, _ = first_passage(0.5, 1.0, grid, streams, block=500, retire_level=3.0)
        # retiring only removes crossings, and rarely
        assert np.all(cut <= full)
        assert full.sum() - cut.sum() <= 10

    def test_hitting_probability_mc(self):
        lam, x0, n = 2.0, 1.0, 100_000
        grid = TimeGrid.uniform(20.0, 1e-4)
        level = -math.log(1e-5) / (2 * lam)
        hits = 0
        for a in range(0, n, 5000):
            c, _ = first_passage(x0, lam, grid, streams_for(31, range(a, a + 5000)), block=1024,
                                 retire_level=level)
            hits += int(c.sum())
        p = hits / n
        se = math.sqrt(p * (1 - p) / n)
        assert abs(p - math.exp(-4)) < 3 * se + 1e-3


class TestHittingProbability:
    def test_values(self):
        assert hitting_probability(1.0, 0.0) == 1.0
        assert hitting_probability(1.0, 0.5) == pytest.approx(0.367879, abs=1e-6)
        assert hitting_probability(2.0, 1.0) == pytest.approx(0.018316, abs=1e-6)

    @pytest.mark.parametrize("lam,x0", [(0.0, 1.0), (-1.0, 1.0), (1.0, -0.1)])
    def test_errors(self, lam, x0):
        with pytest.raises(ValueError):
            hitting_probability(lam, x0)
