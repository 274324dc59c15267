"""Named verification experiments.

Each scenario has defaults, a parameter check that runs before any
simulation, and a runner returning estimates, verdicts and optional per-path
columns.  Sub-experiments inside a scenario draw from disjoint stream-index
blocks, so every number is a function of the config alone.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import stats

from ..closed_form import first_passage, hitting_probability, solve_stopped
from ..girsanov import check_ess, girsanov_weight, weighted_mean
from ..lawcheck import (
    EmpiricalLaw,
    TestVerdict,
    bump,
    dynkin_terms,
    dynkin_verdict,
    ks_test,
    occupation_positivity,
    warren_check,
)
from ..parallel import default_threads, map_chunks
from ..paths import GridPath, RngStream, TimeGrid, brownian_batch
from ..reflection import local_time_estimate, reflected_drifted_bm
from ..schemes import (
    SdeSpec,
    driver_batch,
    euler_step_path,
    martingale_transform,
    pathwise_gap,
    prokaj_weak_solution,
    sgn,
)
from ..sticky import sticky_batch
from .config import ConfigError, ScenarioConfig, load_config
from .report import Estimate, Report

# Mean time at 0 up to t = 1 of sticky paths (lam = 1, started at 0).
# Analytic values from the conditional law of X given B integrated over the
# law of (B(t), S(t)); the reweighted one uses the drifted law of B.
OCC_Q_ANALYTIC = 0.4659866
OCC_P_ANALYTIC = 0.333369
# Fine-grid oracle for the reweighted mean (internal step 1e-5, 1e5 paths,
# seed 20240917), produced by scripts/oracle_occupation.py.
OCC_P_ORACLE = (0.334477, 0.001158)
# Three times the mean Euler sup-gap at dt = 1e-4 over 200 paths against a
# step-1e-5 reference (lam = -1, zeta = 1, T = 1), seed 777: 3 * 0.0242.
EULER_GAP_STAR = 0.0726
# The discrete representation identity is exact; this only absorbs roundoff.
PROKAJ_BOUND = 1e-9

_PART = 1 << 32


class UnknownScenarioError(KeyError):
    pass


@dataclass
class Outcome:
    estimates: list[Estimate] = field(default_factory=list)
    verdicts: list[TestVerdict] = field(default_factory=list)
    per_path: dict | None = None

    def add(self, name, value, stderr=None, ess=None):
        self.estimates.append(Estimate(name, float(value), None if stderr is None else float(stderr),
                                       None if ess is None else float(ess)))


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    claim: str
    defaults: dict
    check: Callable[[ScenarioConfig], None]
    run: Callable[[ScenarioConfig, int], Outcome]


def _streams(cfg: ScenarioConfig, start: int, stop: int, part: int = 0) -> list[RngStream]:
    return [RngStream(cfg.seed, part * _PART + k) for k in range(start, stop)]


def _grid(cfg: ScenarioConfig, horizon: float | None = None, dt: float | None = None) -> TimeGrid:
    try:
        return TimeGrid.uniform(cfg.horizon if horizon is None else horizon, cfg.dt if dt is None else dt)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _within(name: str, value: float, target: float, tol: float, **detail) -> TestVerdict:
    dev = abs(value - target)
    return TestVerdict(dev, tol, None, bool(dev <= tol), name, {"value": value, "target": target, **detail})


def _require(cond: bool, msg: str):
    if not cond:
        raise ConfigError(msg)


def _chunk(cfg: ScenarioConfig, default: int) -> int:
    c = int(cfg.param("chunk", float(default)))
    _require(c >= 1, "chunk must be positive")
    return c


# ----------------------------------------------------------------- hitting


def _check_hitting(cfg):
    _require(cfg.lam > 0, "remark1-hitting needs lambda > 0")
    _require(cfg.x0 >= 0, "remark1-hitting needs x0 >= 0")
    _grid(cfg)


def _run_hitting(cfg, threads):
    grid = _grid(cfg)
    # paths this high cross later with probability <= retire
    retire = cfg.tolerance("retire", 1e-4)
    level = max(cfg.x0, -math.log(retire) / (2.0 * cfg.lam))

    def work(a, b):
        crossed, _ = first_passage(cfg.x0, cfg.lam, grid, _streams(cfg, a, b), bridge=True,
                                   block=2048, retire_level=level)
        return crossed

    crossed = np.concatenate(map_chunks(work, cfg.n_paths, _chunk(cfg, 1000), threads))
    p, se, _ = weighted_mean(values=crossed.astype(float))
    exact = hitting_probability(cfg.lam, cfg.x0)
    allowance = cfg.tolerance("truncation", 1e-3)
    out = Outcome()
    out.add("hit_probability", p, se)
    out.add("hit_probability_exact", exact)
    out.verdicts.append(_within("hitting-probability", p, exact, 3.0 * se + allowance,
                                stderr=se, retire_level=level))
    return out


# ----------------------------------------------------- closed form (lam <= 0)


def _gap_study(cfg, lam: float, out: Outcome, part: int):
    """Euler vs the closed form on the same noise, reference grid dt / 10."""
    dts = [1e-2, 1e-3, 1e-4]
    n = int(cfg.param("gap_paths", 200.0))
    horizon = 1.0
    ref_dt = min(dts) / 10.0
    fine = _grid(cfg, horizon, ref_dt)
    streams = _streams(cfg, 0, n, part)
    w = brownian_batch(fine, streams)
    ref = solve_stopped(cfg.x0, lam, w, True, streams)
    gaps = []
    never = 0
    eps = cfg.tolerance("never_return_eps", 1e-2)
    for dt in dts:
        every = int(round(dt / ref_dt))
        g = fine.subsample(every)
        xe = euler_step_path(SdeSpec.tanaka(lam), cfg.x0, GridPath(g, w.values[:, ::every]))
        gaps.append(pathwise_gap(xe, GridPath(g, ref.x.values[:, ::every])))
        never += _never_return_violations(xe.values, eps) if lam < 0 else 0
        out.add(f"euler_gap_dt={dt:g}", np.mean(gaps[-1]), np.std(gaps[-1], ddof=1) / math.sqrt(n))
    ok = True
    worst = -math.inf
    for g0, g1 in zip(gaps, gaps[1:]):
        d = g1 - g0
        se = np.std(d, ddof=1) / math.sqrt(n)
        worst = max(worst, float(np.mean(d) - se))
        ok &= bool(np.mean(d) <= se)
    out.verdicts.append(TestVerdict(worst, 0.0, None, ok, "euler-gap-monotone",
                                    {"mean_gaps": [float(np.mean(g)) for g in gaps], "dts": dts}))
    return gaps, never


def _never_return_violations(x: np.ndarray, eps: float) -> int:
    """Paths that get back to 0 after first sitting at or below ``-eps``."""
    x = np.atleast_2d(x)
    below = x <= -eps
    has = below.any(axis=1)
    first = np.where(has, below.argmax(axis=1), x.shape[1])
    after = np.arange(x.shape[1]) > first[:, None]
    return int(np.any(after & (x >= 0.0), axis=1).sum())


def _identity_residuals(zeta, lam, w: GridPath, sol) -> tuple[float, float, int]:
    t = w.grid.t
    wv = np.atleast_2d(w.values)
    x = np.atleast_2d(sol.x.values)
    tau = np.atleast_1d(sol.tau)
    stopped = t[None, :] >= tau[:, None]
    w_stop = np.where(stopped, np.atleast_1d(sol.w_tau)[:, None], wv)
    r1 = float(np.max(np.abs(x - (zeta + lam * t + w_stop))))
    post = np.where(stopped, np.abs(x - lam * (t[None, :] - tau[:, None])), 0.0)
    r2 = float(np.max(post))
    pre_bad = int(np.sum(~stopped & (x <= 0.0)))
    return r1, r2, pre_bad


def _check_thm1(cfg):
    _require(cfg.lam < 0, "thm1-closed-form needs lambda < 0")
    _grid(cfg)


def _run_thm1(cfg, threads):
    out = Outcome()
    grid = _grid(cfg)
    streams = _streams(cfg, 0, cfg.n_paths)
    w = brownian_batch(grid, streams)
    sol = solve_stopped(cfg.x0, cfg.lam, w, True, streams)
    r1, r2, pre_bad = _identity_residuals(cfg.x0, cfg.lam, w, sol)
    out.verdicts.append(TestVerdict(max(r1, r2), 1e-12, None, r1 == 0.0 and r2 <= 1e-12 and pre_bad == 0,
                                    "construction-identity",
                                    {"stopped_form": r1, "after_tau": r2, "nonpositive_before_tau": pre_bad}))
    crossed = np.asarray(sol.crossed, dtype=float)
    out.add("crossed_fraction", crossed.mean(), crossed.std(ddof=1) / math.sqrt(crossed.size))

    gaps, euler_viol = _gap_study(cfg, cfg.lam, out, part=1)
    eps = cfg.tolerance("never_return_eps", 1e-2)
    viol = _never_return_violations(sol.x.values, eps) + euler_viol
    out.verdicts.append(TestVerdict(float(viol), 0.0, None, viol == 0, "never-return", {"epsilon": eps}))
    if math.isfinite(EULER_GAP_STAR):
        g = float(np.mean(gaps[-1]))
        out.verdicts.append(TestVerdict(g, EULER_GAP_STAR, None, g < EULER_GAP_STAR, "euler-gap-calibrated"))
    out.per_path = {"terminal_value": sol.x.values[:, -1]}
    return out


def _check_thm2(cfg):
    _require(cfg.lam == 0, "thm2-absorption needs lambda = 0")
    _require(cfg.x0 >= 0, "thm2-absorption needs x0 >= 0")
    _grid(cfg)


def _run_thm2(cfg, threads):
    grid = _grid(cfg)

    def work(a, b):
        streams = _streams(cfg, a, b)
        w = brownian_batch(grid, streams)
        sol = solve_stopped(cfg.x0, 0.0, w, True, streams)
        x = sol.x.values
        after = np.arange(len(grid)) >= np.where(sol.crossed, sol.tau_index, len(grid))[:, None]
        bad = np.max(np.where(after, np.abs(x), 0.0), axis=1)
        return sol.crossed, bad, x[:, -1].copy()

    parts = map_chunks(work, cfg.n_paths, _chunk(cfg, 250), threads)
    crossed = np.concatenate([p[0] for p in parts]).astype(float)
    bad = np.concatenate([p[1] for p in parts])
    out = Outcome()
    out.verdicts.append(TestVerdict(float(bad.max()), 0.0, None, bool(bad.max() == 0.0), "absorption",
                                    {"absorbed_paths": int(crossed.sum())}))
    p, se, _ = weighted_mean(values=crossed)
    exact = 2.0 * stats.norm.cdf(-cfg.x0 / math.sqrt(cfg.horizon))
    out.add("absorbed_by_horizon", p, se)
    out.verdicts.append(_within("absorption-probability", p, exact, 4.0 * se, stderr=se))
    _gap_study(cfg, 0.0, out, part=1)
    out.per_path = {"terminal_value": np.concatenate([p[2] for p in parts])}
    return out


# ----------------------------------------------------------------- sticky


def _check_sticky(cfg):
    _require(cfg.lam > 0, f"{cfg.scenario} needs lambda > 0")
    _require(cfg.x0 == 0, f"{cfg.scenario} starts at the origin (x0 = 0)")
    _grid(cfg)


DYNKIN_BUMPS = ((0.3, 0.6), (0.5, 1.0))
# O(dt) allowance: at dt = 1e-3 (1e5 paths) both residuals were below 0.01
# and within 2.3 stderr of 0; scaled to dt = 1e-4 that is 1e-3, doubled.
DYNKIN_ALLOWANCE = 2e-3


def _run_thm3(cfg, threads):
    grid = _grid(cfg)
    lam = cfg.lam
    fs = [bump(c, r) for c, r in DYNKIN_BUMPS]

    def drift(x):
        return lam * (x == 0.0)

    def diff2(x):
        return (x > 0.0).astype(float)

    def work(a, b):
        tr = sticky_batch(0.0, lam, grid, _streams(cfg, a, b))
        bv = tr.b.values
        cols = [tr.x.values[:, -1], bv[:, -1], np.max(-bv, axis=1), tr.occ0.values[:, -1]]
        cols += [dynkin_terms(tr.x, drift, diff2, f) for f in fs]
        return np.stack(cols)

    data = np.concatenate(map_chunks(work, cfg.n_paths, _chunk(cfg, 250), threads), axis=1)
    x_t, b_t, s_t, occ = data[:4]
    out = Outcome()
    for x in (0.1, 0.3, 1.0):
        out.verdicts.extend(warren_check((x_t, b_t, s_t), lam, cfg.horizon, x, cfg.tolerance("z", 4.0)))
    allowance = cfg.tolerance("dynkin_allowance", DYNKIN_ALLOWANCE)
    for (c, r), terms in zip(DYNKIN_BUMPS, data[4:]):
        v = dynkin_verdict(terms, cfg.tolerance("z", 4.0), allowance, f"dynkin bump({c},{r})")
        out.verdicts.append(v)
        out.add(f"dynkin_residual bump({c},{r})", v.detail["residual"], v.detail["stderr"])
    m, se, _ = weighted_mean(values=occ)
    out.add("occupation_at_zero", m, se)
    if lam == 1.0 and cfg.horizon == 1.0:
        out.verdicts.append(_within("occupation-analytic", m, OCC_Q_ANALYTIC, 4.0 * se, stderr=se))
    out.per_path = {"terminal_value": x_t, "occupation_at_zero": occ, "weight": np.ones_like(occ)}
    return out


def _run_thm4_occupation(cfg, threads):
    grid = _grid(cfg)

    def work(a, b):
        tr = sticky_batch(0.0, cfg.lam, grid, _streams(cfg, a, b))
        return np.stack([tr.x.values[:, -1], tr.b.values[:, -1], tr.occ0.values[:, -1]])

    x_t, b_t, occ = np.concatenate(map_chunks(work, cfg.n_paths, _chunk(cfg, 250), threads), axis=1)
    w = girsanov_weight(b_t, cfg.lam, cfg.horizon)
    ess = check_ess(w, cfg.tolerance("ess_collapse", 0.01))
    out = Outcome()
    pos = occupation_positivity(EmpiricalLaw(occ, w), cfg.tolerance("z_positive", 5.0))
    out.verdicts.append(pos)
    m, se = pos.detail["mean"], pos.detail["stderr"]
    out.add("occupation_at_zero_P", m, se, ess)
    q = weighted_mean(values=occ)
    out.add("occupation_at_zero_Q", q[0], q[1], q[2])
    frac = cfg.tolerance("ess_fraction", 0.05)
    out.verdicts.append(TestVerdict(ess, frac * cfg.n_paths, None, ess > frac * cfg.n_paths, "ess"))
    if cfg.lam == 1.0 and cfg.horizon == 1.0:
        m_star, se_star = OCC_P_ORACLE
        if math.isfinite(m_star):
            tol = 4.0 * math.hypot(se, se_star)
            out.verdicts.append(_within("occupation-oracle", m, m_star, tol, stderr=se, oracle_stderr=se_star))
        out.verdicts.append(_within("occupation-analytic", m, OCC_P_ANALYTIC, 4.0 * se, stderr=se))
    out.per_path = {"terminal_value": x_t, "occupation_at_zero": occ, "weight": w}
    return out


# ------------------------------------------------------------- reflection


def _check_invariant(cfg):
    _require(cfg.lam > 0, "thm4-invariant needs lambda > 0")
    _require(cfg.x0 >= 0, "thm4-invariant needs x0 >= 0")
    _grid(cfg)


def _run_invariant(cfg, threads):
    grid = _grid(cfg)
    t = grid.t
    window = t >= cfg.param("burn_in", cfg.horizon / 2.0)
    tw = t[window]

    def work(a, b):
        streams = _streams(cfg, a, b)
        z = reflected_drifted_bm(cfg.x0, cfg.lam, brownian_batch(grid, streams), streams).z.values
        zw = z[:, window]
        avg = np.sum(0.5 * (zw[:, 1:] + zw[:, :-1]) * np.diff(tw), axis=1) / (tw[-1] - tw[0])
        return np.stack([z[:, -1], avg])

    z_t, avg = np.concatenate(map_chunks(work, cfg.n_paths, _chunk(cfg, 100), threads), axis=1)
    lam = cfg.lam
    out = Outcome()
    ks = ks_test(EmpiricalLaw(z_t), lambda x: 1.0 - np.exp(-2.0 * lam * np.maximum(x, 0.0)),
                 cfg.tolerance("alpha", 1e-4))
    out.verdicts.append(TestVerdict(ks.statistic, ks.threshold, ks.p_value, ks.passed, "invariant-ks"))
    m, se, _ = weighted_mean(values=avg)
    out.add("time_average", m, se)
    out.add("terminal_mean", float(np.mean(z_t)), float(np.std(z_t, ddof=1) / math.sqrt(z_t.size)))
    out.verdicts.append(_within("stationary-mean", m, 0.5 / lam, cfg.tolerance("stationary_mean", 0.02), stderr=se))
    out.per_path = {"terminal_value": z_t}
    return out


def _check_localtime(cfg):
    _require(cfg.param("epsilon", 1e-2) > 0, "epsilon must be positive")
    _grid(cfg)


def _run_localtime(cfg, threads):
    grid = _grid(cfg)
    eps = cfg.param("epsilon", 1e-2)

    def work(a, b):
        w = brownian_batch(grid, _streams(cfg, a, b))
        return local_time_estimate(w, grid.dt, eps).values[:, -1].copy()

    lt = np.concatenate(map_chunks(work, cfg.n_paths, _chunk(cfg, 10), threads))
    scale = 0.5 * math.sqrt(cfg.horizon)
    out = Outcome()
    ks = ks_test(EmpiricalLaw(lt), lambda x: stats.halfnorm.cdf(x, scale=scale), cfg.tolerance("alpha", 1e-4))
    out.verdicts.append(TestVerdict(ks.statistic, ks.threshold, ks.p_value, ks.passed, "localtime-ks"))
    m, se, _ = weighted_mean(values=lt)
    out.add("local_time_mean", m, se)
    out.add("local_time_mean_exact", scale * math.sqrt(2.0 / math.pi))
    out.per_path = {"terminal_value": lt}
    return out


# ---------------------------------------------------------------- drivers


def _rates(a: np.ndarray, b: np.ndarray, span: float) -> float:
    """Realised cross-variation per unit time of two batches of paths."""
    da, db = np.diff(a, axis=1), np.diff(b, axis=1)
    return math.fsum(np.sum(da * db, axis=1).tolist()) / (a.shape[0] * span)


def _driver_checks(cfg, mode: str, out: Outcome, part: int):
    n_inc = int(cfg.param("increments", 1e6))
    grid = _grid(cfg)
    paths = max(1, n_inc // grid.n_steps)
    pair = driver_batch(cfg.eta, mode, grid, _streams(cfg, 0, paths, part))
    tol = cfg.tolerance("rate", 0.01)
    w, v = pair.w.values, pair.v.values
    span = grid.horizon
    for name, val, target in (
        ("cross-variation", _rates(w, v, span), pair.cross_variation_rate),
        ("w-variance-rate", _rates(w, w, span), 1.0),
        ("v-variance-rate", _rates(v, v, span), 1.0),
    ):
        out.add(name, val)
        out.verdicts.append(_within(name, val, target, tol, increments=paths * grid.n_steps))
    return pair


def _check_corr(cfg):
    _require(cfg.eta is not None and abs(cfg.eta) > 1, "thm5-corr needs eta outside [-1, 1]")
    _grid(cfg)


def _check_indep(cfg):
    _require(cfg.eta is not None and cfg.eta != 0, "thm5-indep needs eta != 0")
    _grid(cfg)


def _run_corr(cfg, threads):
    out = Outcome()
    eta = cfg.eta
    tol = cfg.tolerance("rate", 0.01)
    pair = _driver_checks(cfg, "correlated", out, part=0)
    m, n = martingale_transform(pair.w, pair.v, eta)
    span = pair.w.grid.horizon
    for name, a, b, target in (
        ("m-variance-rate", m, m, 0.25),
        ("n-variance-rate", n, n, (eta * eta - 1.0) / 4.0),
        ("mn-cross-variation", m, n, 0.0),
    ):
        val = _rates(a.values, b.values, span)
        out.add(name, val)
        out.verdicts.append(_within(name, val, target, tol))

    grid = _grid(cfg)
    n_rep = int(cfg.param("prokaj_paths", 1000.0))
    rep = driver_batch(eta, "correlated", grid, _streams(cfg, 0, n_rep, part=1))
    u, nn = martingale_transform(rep.w, rep.v, eta)
    x, mm = prokaj_weak_solution(cfg.x0, u, nn)
    recovered = np.zeros_like(x.values)
    np.cumsum(sgn(x.values[:, :-1]) * np.diff(mm.values, axis=1), axis=1, out=recovered[:, 1:])
    resid = np.abs(x.values[:, -1] - cfg.x0 - nn.values[:, -1] - recovered[:, -1])
    r = float(np.mean(resid))
    out.add("prokaj_residual", r)
    out.verdicts.append(TestVerdict(r, PROKAJ_BOUND, None, r < PROKAJ_BOUND, "prokaj-representation"))

    pairs = int(cfg.param("gap_pairs", float(cfg.n_paths)))
    drivers = driver_batch(eta, "correlated", grid, _streams(cfg, 0, pairs, part=2))
    spec = SdeSpec.perturbed(cfg.lam, eta)
    # Started exactly at 0 the pair gets different indicators on the first
    # step, so Euler separates them by O(sqrt(dt)) whatever the initial gap;
    # those medians are reported but the verdict uses a base point off 0.
    start = cfg.param("gap_base", 0.5)
    medians = []
    for x_base, tag in ((cfg.x0, "at_x0"), (start, "")):
        base = euler_step_path(spec, x_base, drivers)
        row = []
        for g0 in (1e-1, 1e-2, 1e-3):
            other = euler_step_path(spec, x_base + g0, drivers)
            row.append(float(np.median(np.abs(other.values[:, -1] - base.values[:, -1]))))
            out.add(f"median_terminal_gap initial={g0:g} {tag}".rstrip(), row[-1])
        medians = row
    ok = all(b < a for a, b in zip(medians, medians[1:]))
    out.verdicts.append(TestVerdict(max(b / a for a, b in zip(medians, medians[1:])), 1.0, None, ok,
                                    "gap-contraction", {"medians": medians, "base": start}))
    out.per_path = {"terminal_value": base.values[:, -1]}
    return out


def _run_indep(cfg, threads):
    out = Outcome()
    _driver_checks(cfg, "independent", out, part=0)
    return out


# -------------------------------------------------------------- registry


def _run_properties(cfg, threads):
    from .properties import run_properties

    return run_properties(cfg, threads)


SCENARIOS: dict[str, Scenario] = {
    s.name: s
    for s in (
        Scenario(
            "remark1-hitting",
            "Monte Carlo probability that a positively drifted Brownian motion from x0 ever reaches 0",
            "exact hitting probability exp(-2 lambda x0)",
            dict(lam=1.0, x0=0.5, horizon=20.0, dt=1e-4, n_paths=100_000),
            _check_hitting,
            _run_hitting,
        ),
        Scenario(
            "thm1-closed-form",
            "stopped closed-form solution for negative drift: identities, Euler convergence, never-return",
            "strong existence and pathwise uniqueness for lambda < 0",
            dict(lam=-1.0, x0=1.0, horizon=1.0, dt=1e-4, n_paths=200),
            _check_thm1,
            _run_thm1,
        ),
        Scenario(
            "thm2-absorption",
            "zero drift: absorption at 0 after the first hitting time and Euler convergence",
            "strong solution for lambda = 0, absorbed at the origin",
            dict(lam=0.0, x0=1.0, horizon=4.0, dt=1e-4, n_paths=10_000),
            _check_thm2,
            _run_thm2,
        ),
        Scenario(
            "thm3-warren",
            "sticky solution from the origin: conditional law given the driver and weak generator identity",
            "weak solution via sticky Brownian motion",
            dict(lam=1.0, x0=0.0, horizon=1.0, dt=1e-4, n_paths=100_000),
            _check_sticky,
            _run_thm3,
        ),
        Scenario(
            "thm4-occupation",
            "reweighted sticky paths: positive time at 0 under the drifted measure",
            "no solution satisfies the non-stickiness condition",
            dict(lam=1.0, x0=0.0, horizon=1.0, dt=1e-4, n_paths=10_000),
            _check_sticky,
            _run_thm4_occupation,
        ),
        Scenario(
            "thm4-invariant",
            "reflected Brownian motion with drift -lambda: exponential invariant law",
            "invariant density 2 lambda exp(-2 lambda x)",
            dict(lam=1.0, x0=0.0, horizon=50.0, dt=1e-3, n_paths=10_000),
            _check_invariant,
            _run_invariant,
        ),
        Scenario(
            "localtime-levy",
            "occupation-density local-time estimator against the half-normal law",
            "local time at 0 as a limit of occupation densities",
            dict(lam=0.0, x0=0.0, horizon=1.0, dt=1e-6, n_paths=1000),
            _check_localtime,
            _run_localtime,
        ),
        Scenario(
            "thm5-corr",
            "perturbed equation with correlated drivers: covariations, weak-solution identity, gap contraction",
            "strong solution of the perturbed equation, correlated case",
            dict(lam=1.0, eta=2.0, x0=0.0, horizon=1.0, dt=1e-4, n_paths=500),
            _check_corr,
            _run_corr,
        ),
        Scenario(
            "thm5-indep",
            "perturbed equation with independent drivers: driver covariations",
            "strong solution of the perturbed equation, independent case",
            dict(lam=1.0, eta=0.5, x0=0.0, horizon=1.0, dt=1e-4, n_paths=100),
            _check_indep,
            _run_indep,
        ),
        Scenario(
            "properties",
            "invariant and property checks across all modules",
            "structural properties of the constructions and statistics",
            dict(lam=1.0, x0=0.0, horizon=1.0, dt=1e-3, n_paths=10_000),
            lambda cfg: None,
            _run_properties,
        ),
    )
}


def list_scenarios() -> list[tuple[str, str, str]]:
    return [(s.name, s.description, s.claim) for s in SCENARIOS.values()]


def get_scenario(name: str) -> Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        raise UnknownScenarioError(name) from None


def resolve_config(name: str, path=None, **overrides) -> ScenarioConfig:
    """Defaults, then the config file, then ``overrides`` (``None`` values skipped)."""
    sc = get_scenario(name)
    cfg = ScenarioConfig(scenario=name, **sc.defaults)
    if path is not None:
        cfg = cfg.updated(**load_config(path, name))
    flags = {k: v for k, v in overrides.items() if v is not None}
    if flags:
        cfg = cfg.updated(**flags)
    sc.check(cfg)
    return cfg


def run_scenario(config: ScenarioConfig | str, threads: int | None = None) -> Report:
    """Validate ``config``, run its scenario and assemble the report."""
    if isinstance(config, str):
        config = resolve_config(config)
    sc = get_scenario(config.scenario)
    sc.check(config)
    threads = default_threads() if threads is None else threads
    t0 = time.perf_counter()
    out = sc.run(config, threads)
    return Report(
        scenario=sc.name,
        config=config.to_dict(),
        estimates=out.estimates,
        verdicts=out.verdicts,
        duration_s=time.perf_counter() - t0,
        per_path=out.per_path,
    )
