"""The ``properties`` scenario: structural invariants of every module, each
checked on random inputs or a modest simulation."""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import stats

from ..closed_form import solve_stopped
from ..girsanov import effective_sample_size, girsanov_weight, weighted_mean
from ..lawcheck import EmpiricalLaw, TestVerdict, ks_statistic, ks_test, occupation_positivity, warren_check
from ..parallel import map_chunks
from ..paths import GridPath, RngStream, TimeGrid, brownian_batch, running_max
from ..reflection import skorokhod_map
from ..schemes import SdeSpec, driver_batch, euler_step_path
from ..sticky import reflect_levy, sticky_batch

_PART = 1 << 32


def _streams(seed, start, stop, part):
    return [RngStream(seed, part * _PART + k) for k in range(start, stop)]


def _verdict(name, failures, checked, **detail) -> TestVerdict:
    return TestVerdict(float(failures), 0.0, None, failures == 0, name, {"checked": checked, **detail})


def _random_walks(rng, n, m):
    v = np.cumsum(rng.standard_normal((n, m)) * 0.1, axis=1)
    return np.concatenate([rng.normal(0.0, 0.3, (n, 1)), rng.normal(0.0, 0.3, (n, 1)) + v], axis=1)


def _skorokhod(rng, out):
    grid = TimeGrid.uniform(1.0, 1 / 200)
    psis = _random_walks(rng, 20, grid.n_steps)
    bad_min = bad_tight = bad_mono = bad_flat = 0
    for v in psis:
        psi = GridPath(grid, v)
        d = skorokhod_map(psi)
        l = d.l.values
        for _ in range(100):
            # a random nondecreasing regulator, shifted just enough to be feasible
            g = np.cumsum(rng.exponential(rng.uniform(0, 0.05), v.size))
            g += max(0.0, float(np.max(-v - g)))
            bad_min += bool(np.any(l > g + 1e-12))
        if l.max() > 0:
            lowered = np.maximum(l - rng.uniform(1e-9, l.max()), 0.0)
            bad_tight += bool(np.min(v + lowered) >= 0)
        # comparison holds when psi2 - psi1 is nondecreasing (pointwise order alone is not enough)
        lift = np.cumsum(np.abs(rng.standard_normal(v.size))) * rng.uniform(0, 0.05)
        other = GridPath(grid, v + lift)
        bad_mono += bool(np.any(d.z.values > skorokhod_map(other).z.values + 1e-12))
        grew = np.diff(l) > 0
        bad_flat += bool(np.any(d.z.values[1:][grew] != 0.0))
    out.verdicts.append(_verdict("skorokhod-minimality", bad_min + bad_tight, 20 * 101))
    out.verdicts.append(_verdict("skorokhod-monotonicity", bad_mono, 20))
    out.verdicts.append(_verdict("skorokhod-flatness", bad_flat, 20))
    bad_rm = sum(
        bool(np.any(running_max(running_max(GridPath(grid, v))).values != running_max(GridPath(grid, v)).values))
        for v in psis
    )
    out.verdicts.append(_verdict("running-max-idempotence", bad_rm, len(psis)))


def _brownian(seed, out):
    grid = TimeGrid.uniform(1000.0, 0.01)
    w = brownian_batch(grid, _streams(seed, 0, 10, 1))
    inc = np.diff(w.values, axis=1)
    var = float(np.var(inc[0], ddof=1))
    out.add("increment_variance dt=0.01", var)
    out.verdicts.append(TestVerdict(var, 0.0103, None, 0.0097 <= var <= 0.0103, "brownian-variance"))
    ks = ks_test(EmpiricalLaw(inc.ravel() / 0.1), stats.norm.cdf)
    out.verdicts.append(TestVerdict(ks.statistic, ks.threshold, ks.p_value, ks.passed, "brownian-normality"))
    again = brownian_batch(grid, _streams(seed, 0, 1, 1))
    out.verdicts.append(_verdict("stream-reproducibility", int(np.any(again.values[0] != w.values[0])), 1))

    g = TimeGrid.uniform(1.0, 1e-4)
    ell = reflect_levy(brownian_batch(g, _streams(seed, 0, 10_000, 2))).ell.values[:, -1]
    ks = ks_test(EmpiricalLaw(ell), stats.halfnorm.cdf)
    out.verdicts.append(TestVerdict(ks.statistic, ks.threshold, ks.p_value, ks.passed, "levy-running-max-ks"))


def _girsanov(seed, lam, out):
    n = 100_000
    grid = TimeGrid.uniform(1.0, 1.0)
    b = brownian_batch(grid, _streams(seed, 0, n, 3)).values[:, -1]
    w = girsanov_weight(b, lam, 1.0)
    m = float(np.mean(w))
    se = float(np.std(w, ddof=1) / math.sqrt(n))
    out.add("mean_weight", m, se)
    out.verdicts.append(TestVerdict(abs(m - 1) / se, 3.0, None, abs(m - 1) <= 3 * se, "girsanov-mean-weight"))

    # reweighted hitting of x0 + lam t + W(t), W Brownian after reweighting
    x0, horizon = 0.5, 2.0
    g = TimeGrid.uniform(horizon, 1e-3)
    streams = _streams(seed, 0, 10_000, 4)
    bq = brownian_batch(g, streams)
    sol = solve_stopped(x0, 0.0, bq, True, streams)
    wts = girsanov_weight(bq.values[:, -1], lam, horizon)
    p, se, ess = weighted_mean(values=np.asarray(sol.crossed, dtype=float), weights=wts)
    s = math.sqrt(horizon)
    exact = stats.norm.cdf((-x0 - lam * horizon) / s) + math.exp(-2 * lam * x0) * stats.norm.cdf(
        (-x0 + lam * horizon) / s
    )
    out.add("reweighted_hit_probability", p, se, ess)
    out.verdicts.append(TestVerdict(abs(p - exact) / se, 4.0, None, abs(p - exact) <= 4 * se, "girsanov-hitting",
                                    {"value": p, "target": exact}))


def _ess_and_reductions(rng, out):
    bad = 0
    for _ in range(200):
        n = int(rng.integers(1, 500))
        w = rng.lognormal(0.0, rng.uniform(0, 3), n)
        bad += effective_sample_size(w) > n * (1 + 1e-12)
        c = np.full(n, rng.uniform(0.1, 10))
        bad += not math.isclose(effective_sample_size(c), n, rel_tol=1e-12)
    out.verdicts.append(_verdict("ess-bounds", int(bad), 400))

    bad = 0
    for _ in range(50):
        n = int(rng.integers(2, 5000))
        v = rng.standard_normal(n) * 10.0 ** rng.integers(-3, 6)
        w = rng.lognormal(0.0, 2.0, n)
        ref = weighted_mean(values=v, weights=w)
        p = rng.permutation(n)
        alt = weighted_mean(values=v[p], weights=w[p])
        bad += any(not math.isclose(a, b, rel_tol=1e-12, abs_tol=0.0) for a, b in zip(ref, alt))
    out.verdicts.append(_verdict("reduction-order", int(bad), 50))


def _ks_calibration(seed, out):
    rej = 0
    for r in range(200):
        x = RngStream(seed, 5 * _PART + r).generator().exponential(size=10_000)
        rej += ks_test(EmpiricalLaw(x), lambda s: 1 - np.exp(-s), alpha=0.05).passed is False
    out.add("ks_null_rejections_of_200", rej)
    out.verdicts.append(TestVerdict(float(rej), 18.0, None, 2 <= rej <= 18, "ks-null-calibration"))


def _determinism(seed, out):
    grid = TimeGrid.uniform(1.0, 1e-2)

    def work(a, b):
        tr = sticky_batch(0.0, 1.0, grid, _streams(seed, a, b, 6))
        return np.stack([tr.x.values[:, -1], tr.b.values[:, -1], tr.occ0.values[:, -1]])

    runs = [np.concatenate(map_chunks(work, 200, 25, threads=k), axis=1) for k in (1, 2, 4)]
    diff = sum(int(np.any(r != runs[0])) for r in runs[1:])
    out.verdicts.append(_verdict("thread-determinism", diff, 3))


def _sticky(seed, lam, out):
    grid = TimeGrid.uniform(1.0, 1e-3)
    xs, bs, occ, minx = [], [], [], np.inf
    for a in range(0, 10_000, 500):
        tr = sticky_batch(0.0, lam, grid, _streams(seed, a, a + 500, 7))
        xs.append(tr.x.values[:, -1])
        bs.append(tr.b.values[:, -1])
        occ.append(tr.occ0.values[:, -1])
        minx = min(minx, float(tr.x.values.min()))
    b_t, occ = np.concatenate(bs), np.concatenate(occ)
    out.verdicts.append(TestVerdict(minx, 0.0, None, minx >= 0.0, "sticky-nonnegative"))
    ks = ks_test(EmpiricalLaw(b_t), stats.norm.cdf)
    out.verdicts.append(TestVerdict(ks.statistic, ks.threshold, ks.p_value, ks.passed, "sticky-driver-ks"))
    # realised quadratic variation carries an O(sqrt(dt)) bias; use a finer grid
    fine = sticky_batch(0.0, lam, TimeGrid.uniform(1.0, 1e-4), _streams(seed, 0, 1000, 11)).b.values
    q = float(np.mean(np.sum(np.diff(fine, axis=1) ** 2, axis=1)))
    out.add("driver_quadratic_variation", q)
    out.verdicts.append(TestVerdict(abs(q - 1), 0.02, None, abs(q - 1) <= 0.02, "sticky-driver-qv"))
    pos = occupation_positivity(EmpiricalLaw(occ))
    out.verdicts.append(TestVerdict(pos.statistic, pos.threshold, None, pos.passed, "sticky-occupation-positive"))
    return np.concatenate(xs), b_t, occ


def _lawcheck(rng, x_t, b_t, occ, lam, out):
    s_guess = np.abs(rng.standard_normal(x_t.size))
    big = float(np.max(b_t + s_guess)) + 1.0
    sat = warren_check((x_t, b_t, s_guess), lam, 1.0, big)
    out.verdicts.append(_verdict("warren-saturation", sum(v.statistic != 0.0 for v in sat), len(sat)))

    p = rng.permutation(x_t.size)
    cdf = stats.norm.cdf
    pairs = [
        (ks_statistic(EmpiricalLaw(b_t), cdf), ks_statistic(EmpiricalLaw(b_t[p]), cdf)),
        (ks_statistic(EmpiricalLaw(occ, np.exp(b_t)), cdf), ks_statistic(EmpiricalLaw(occ[p], np.exp(b_t[p])), cdf)),
        (occupation_positivity(EmpiricalLaw(occ)).statistic, occupation_positivity(EmpiricalLaw(occ[p])).statistic),
    ]
    pairs += [
        (u.statistic, v.statistic)
        for u, v in zip(warren_check((x_t, b_t, s_guess), lam, 1.0, 0.3),
                        warren_check((x_t[p], b_t[p], s_guess[p]), lam, 1.0, 0.3))
    ]
    bad = sum(not math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-12) for a, b in pairs)
    out.verdicts.append(_verdict("permutation-invariance", bad, len(pairs)))


def _schemes(seed, out):
    grid = TimeGrid.uniform(1.0, 1e-4)
    pair = driver_batch(-2.0, "correlated", grid, _streams(seed, 0, 100, 8))
    dw, dv = np.diff(pair.w.values, axis=1).ravel(), np.diff(pair.v.values, axis=1).ravel()
    n = dw.size
    corr = float(np.corrcoef(dw, dv)[0, 1])
    out.add("driver_correlation eta=-2", corr)
    out.verdicts.append(TestVerdict(abs(corr - 0.5), 0.01, None, abs(corr - 0.5) <= 0.01, "driver-correlation"))
    bad = 0
    for d in (dw, dv):
        rate = float(np.sum(d * d) / (n * 1e-4))
        bad += abs(rate - 1.0) > 3 * math.sqrt(2.0 / n)
    out.verdicts.append(_verdict("driver-marginals", int(bad), 2))

    # band occupation near 0: stays positive for lam > 0, tracks the closed form for lam < 0
    delta, n_paths = 0.05, 200
    occ_pos = []
    for dt in (1e-2, 1e-3, 1e-4):
        g = TimeGrid.uniform(1.0, dt)
        w = brownian_batch(g, _streams(seed, 0, n_paths, 9))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            x = euler_step_path(SdeSpec.tanaka(1.0), 0.0, w).values
        occ_pos.append(float(np.mean(np.sum((np.abs(x[:, :-1]) <= delta) * dt, axis=1))))
    out.add("euler_band_occupation lam=1", min(occ_pos))
    out.verdicts.append(TestVerdict(min(occ_pos), 0.05, None, min(occ_pos) > 0.05, "euler-sticky-signature",
                                    {"by_dt": occ_pos}))
    g = TimeGrid.uniform(1.0, 1e-4)
    streams = _streams(seed, 0, n_paths, 10)
    w = brownian_batch(g, streams)
    xe = euler_step_path(SdeSpec.tanaka(-1.0), 0.2, w).values
    xc = solve_stopped(0.2, -1.0, w).x.values
    band = [float(np.mean(np.sum((np.abs(v[:, :-1]) <= delta) * 1e-4, axis=1))) for v in (xe, xc)]
    diff = abs(band[0] - band[1])
    out.verdicts.append(TestVerdict(diff, 0.01, None, diff <= 0.01, "euler-band-negative-drift"))


def run_properties(cfg, threads):
    from .scenarios import Outcome

    out = Outcome()
    seed = cfg.seed
    rng = RngStream(seed, 0, (99,)).generator()
    _skorokhod(rng, out)
    _brownian(seed, out)
    _girsanov(seed, cfg.lam, out)
    _ess_and_reductions(rng, out)
    _ks_calibration(seed, out)
    _determinism(seed, out)
    x_t, b_t, occ = _sticky(seed, cfg.lam, out)
    _lawcheck(rng, x_t, b_t, occ, cfg.lam, out)
    _schemes(seed, out)
    return out
