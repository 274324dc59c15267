"""Stopped-Brownian strong solutions for nonpositive drift, and the exact
hitting probability of a Brownian motion with positive drift.

For ``lam <= 0`` the solution started at ``zeta`` is

    X(t) = zeta + lam * t + W(min(t, tau)),   tau = inf{t : zeta + lam t + W(t) <= 0}.

On a grid ``tau`` is located inside the step where the crossing is detected
(linear interpolation of the drifted path for a grid crossing, the
reflection point ``a / (a + b)`` for a crossing found by the Brownian-bridge
correction) and ``W(tau)`` is set to ``-zeta - lam * tau``, so that the
stopped path leaves ``(0, inf)`` through exactly 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numba
import numpy as np

from .paths import GridPath, RngStream, TimeGrid

__all__ = [
    "StoppedSolution",
    "NOT_CROSSED",
    "solve_stopped",
    "first_passage",
    "hitting_probability",
]

NOT_CROSSED = -1

# exp(-745) underflows to 0; steps beyond this exponent never need a uniform.
_EXP_CUTOFF = 745.0


@dataclass(frozen=True)
class StoppedSolution:
    """Solution ``x`` together with its stopping data.

    ``tau`` is ``inf`` and ``tau_index`` is :data:`NOT_CROSSED` when no
    crossing happens within the grid.  ``tau_index`` is the first grid index
    with ``t >= tau``.  ``w_tau`` is the Brownian value used after stopping.
    For batches all three are arrays over paths.
    """

    x: GridPath
    tau: np.ndarray | float
    tau_index: np.ndarray | int
    w_tau: np.ndarray | float

    @property
    def crossed(self):
        return np.asarray(self.tau_index) != NOT_CROSSED


def _scan(y, dt, ugens, bridge):
    """First crossing of level 0 along the rows of ``y``.

    ``y[:, 0]`` must be positive.  Returns ``(step, frac)``: the crossing
    lies in step ``step`` (between columns ``step`` and ``step + 1``) at
    fraction ``frac`` of its length; ``step == -1`` means no crossing.
    """
    n, m1 = y.shape
    below = y[:, 1:] <= 0.0
    has = below.any(axis=1)
    gstep = np.where(has, below.argmax(axis=1), m1 - 1)
    step = np.where(has, gstep, -1)
    frac = np.zeros(n)
    rows = np.nonzero(has)[0]
    if rows.size:
        a = y[rows, gstep[rows]]
        b = y[rows, gstep[rows] + 1]
        frac[rows] = a / (a - b)
    if not bridge:
        return step, frac
    a = y[:, :-1]
    b = y[:, 1:]
    q = 2.0 * a * b / dt
    cols = np.arange(m1 - 1)
    cand = (a > 0) & (b > 0) & (q < _EXP_CUTOFF) & (cols < gstep[:, None])
    r_idx, c_idx = np.nonzero(cand)
    if r_idx.size == 0:
        return step, frac
    bounds = np.searchsorted(r_idx, np.arange(n + 1))
    for row in np.unique(r_idx):
        lo, hi = bounds[row], bounds[row + 1]
        ks = c_idx[lo:hi]
        u = 1.0 - ugens[row].random(hi - lo)
        hit = np.nonzero(u < np.exp(-q[row, ks]))[0]
        if hit.size:
            k = ks[hit[0]]
            step[row] = k
            frac[row] = a[row, k] / (a[row, k] + b[row, k])
    return step, frac


def _uniform_gens(streams, n):
    if streams is None:
        raise ValueError("bridge correction needs a random stream")
    if isinstance(streams, RngStream):
        streams = [streams]
    if len(streams) != n:
        raise ValueError(f"need one stream per path ({n}), got {len(streams)}")
    return [s.substream(1).generator() for s in streams]


def solve_stopped(
    zeta,
    lam: float,
    w: GridPath,
    use_bridge_correction: bool = False,
    stream: RngStream | Sequence[RngStream] | None = None,
) -> StoppedSolution:
    """Closed-form solution of ``dX = lam dt + 1{X > 0} dW`` for ``lam <= 0``.

    ``w`` may be a single path or a batch; ``zeta`` is a scalar or one value
    per path.  With ``use_bridge_correction`` each step whose endpoints are
    both positive also crosses with the Brownian-bridge probability, using
    uniforms from ``stream.substream(1)`` (one stream per path for batches).
    """
    if lam > 0:
        raise ValueError("the stopped construction requires lam <= 0")
    single = w.values.ndim == 1
    wv = np.atleast_2d(w.values)
    n = wv.shape[0]
    t = w.grid.t
    z = np.broadcast_to(np.asarray(zeta, dtype=float), (n,)).copy()
    y = z[:, None] + lam * t + wv

    tau = np.full(n, np.inf)
    tau_index = np.full(n, NOT_CROSSED)
    w_tau = np.full(n, np.nan)

    at_start = y[:, 0] <= 0.0
    tau[at_start] = 0.0
    tau_index[at_start] = 0
    w_tau[at_start] = wv[at_start, 0]

    live = np.nonzero(~at_start)[0]
    if live.size and w.grid.n_steps:
        gens = None
        if use_bridge_correction:
            all_gens = _uniform_gens(stream, n)
            gens = [all_gens[i] for i in live]
        step, frac = _scan(y[live], w.grid.dt, gens, use_bridge_correction)
        hit = step >= 0
        rows = live[hit]
        k = step[hit]
        tau[rows] = t[k] + frac[hit] * (t[k + 1] - t[k])
        tau[rows] = np.minimum(tau[rows], t[k + 1])
        tau_index[rows] = np.searchsorted(t, tau[rows], side="left")
        w_tau[rows] = -z[rows] - lam * tau[rows]

    stopped = tau_index[:, None] != NOT_CROSSED
    after = stopped & (np.arange(t.size) >= tau_index[:, None])
    x = z[:, None] + lam * t + np.where(after, w_tau[:, None], wv)
    if single:
        return StoppedSolution(GridPath(w.grid, x[0]), float(tau[0]), int(tau_index[0]), float(w_tau[0]))
    return StoppedSolution(GridPath(w.grid, x), tau, tau_index, w_tau)


@numba.njit(cache=True, nogil=True)
def _walk_block(last, z, sq, ddt, dt):
    """Fused walk and crossing scan for one block of :func:`first_passage`.

    Row ``i`` starts at ``last[i]`` and adds ``z * sq + ddt`` per step.
    Returns the end values, the first grid step ending at or below 0 (``-1``
    if none) with its linear crossing fraction, and the bridge candidates
    before it as flat ``(row, col, q, a, b)`` arrays in row-major order.
    """
    n, m = z.shape
    end = np.empty(n)
    gstep = np.full(n, -1)
    gfrac = np.zeros(n)
    rows = np.empty(n * m, dtype=np.int64)
    cols = np.empty(n * m, dtype=np.int64)
    qs = np.empty(n * m)
    av = np.empty(n * m)
    bv = np.empty(n * m)
    nc = 0
    for i in range(n):
        y0 = last[i]
        c = 0.0
        a = y0
        for j in range(m):
            c += z[i, j] * sq[j] + ddt[j]
            b = c + y0
            if b <= 0.0:
                gstep[i] = j
                gfrac[i] = a / (a - b)
                break
            q = 2.0 * a * b / dt[j]
            if q < _EXP_CUTOFF:
                rows[nc] = i
                cols[nc] = j
                qs[nc] = q
                av[nc] = a
                bv[nc] = b
                nc += 1
            a = b
        end[i] = a
    return end, gstep, gfrac, rows[:nc], cols[:nc], qs[:nc], av[:nc], bv[:nc]


def first_passage(
    x0: float,
    drift: float,
    grid: TimeGrid,
    streams: Sequence[RngStream],
    bridge: bool = True,
    block: int = 8192,
    retire_level: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """First time ``x0 + drift t + W(t)`` reaches 0, without storing paths.

    Path ``i`` draws its Gaussian increments from ``streams[i].substream(0)``
    and its bridge uniforms from ``streams[i].substream(1)``, the same
    sources :func:`~tanakasim.paths.brownian_batch` and :func:`solve_stopped`
    use, so both routes agree path by path.  The grid is scanned in blocks
    and paths leave the active set as soon as they cross.

    ``retire_level`` also drops paths sitting at or above that level at the
    end of a block; they count as not crossed.  For positive drift this
    undercounts crossings by at most ``exp(-2 drift retire_level)``.

    Returns ``(crossed, tau)``; ``tau`` is ``inf`` for paths that stay
    positive up to the horizon.
    """
    n = len(streams)
    t = grid.t
    tau = np.full(n, np.inf)
    if x0 <= 0:
        tau[:] = 0.0
        return np.ones(n, dtype=bool), tau
    ngens = [s.substream(0).generator() for s in streams]
    ugens = [s.substream(1).generator() for s in streams] if bridge else None
    sq = np.sqrt(grid.dt)
    active = np.arange(n)
    last = np.full(n, float(x0))
    for start in range(0, grid.n_steps, block):
        stop = min(start + block, grid.n_steps)
        m = stop - start
        z = np.empty((active.size, m))
        for row, i in zip(z, active):
            ngens[i].standard_normal(out=row)
        dt = grid.dt[start:stop]
        end, step, frac, r_idx, c_idx, q, a, b = _walk_block(last[active], z, sq[start:stop], drift * dt, dt)
        if bridge and r_idx.size:
            bounds = np.searchsorted(r_idx, np.arange(active.size + 1))
            for row in np.unique(r_idx):
                lo, hi = bounds[row], bounds[row + 1]
                u = 1.0 - ugens[active[row]].random(hi - lo)
                hit = np.nonzero(u < np.exp(-q[lo:hi]))[0]
                if hit.size:
                    k = lo + hit[0]
                    step[row] = c_idx[k]
                    frac[row] = a[k] / (a[k] + b[k])
        hit = step >= 0
        k = step[hit] + start
        tau[active[hit]] = np.minimum(t[k] + frac[hit] * (t[k + 1] - t[k]), t[k + 1])
        last[active] = end
        keep = ~hit
        if retire_level is not None:
            keep &= end < retire_level
        active = active[keep]
        if active.size == 0:
            break
    return np.isfinite(tau), tau


def hitting_probability(lam: float, x0: float) -> float:
    """``P(lam t + W(t) < -x0 for some t >= 0) = exp(-2 lam x0)`` for ``lam > 0``."""
    if lam <= 0:
        raise ValueError("formula holds for positive drift only")
    if x0 < 0:
        raise ValueError("x0 must be nonnegative")
    return float(np.exp(-2.0 * lam * x0))
