"""Sticky Brownian motion at 0 by time change of reflected Brownian motion.

The weak solution of

    dX = lam 1{X = 0} dt + 1{X > 0} dB,     X >= 0,

is ``X(t) = rho(T(t))`` where ``rho = x0 - w + ell`` is Brownian motion
reflected at 0 with regulator ``ell`` (the Levy running maximum for
``x0 = 0``), ``A(s) = s + ell(s) / lam`` and ``T = A^{-1}``.  The time spent
at 0 up to ``t`` is ``t - T(t) = ell(T(t)) / lam``.  The driving motion is
``B(t) = -w(T(t)) + F(t - T(t))`` with ``F`` an independent Brownian motion
running on the clock of time spent at 0.

Discretisation: ``w`` lives on an internal grid of step ``ds``.  Inside a step
where ``ell`` increases, the whole increment is placed at the step's
(sampled) maximum of ``w``, where ``rho`` touches 0; the clock ``A`` gets a
flat stretch of length ``d ell / lam`` there, during which ``X`` is exactly 0.
Elsewhere ``X`` is interpolated linearly in internal time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numba
import numpy as np

from .paths import GridPath, RngStream, TimeGrid, bridge_extremum, running_max

__all__ = [
    "ReflectedPair",
    "StickyTriple",
    "reflect_levy",
    "time_change",
    "sticky_solution",
    "sticky_batch",
    "occupation_time",
]


@dataclass(frozen=True)
class ReflectedPair:
    rho: GridPath
    ell: GridPath


@dataclass(frozen=True)
class StickyTriple:
    """Sticky solution ``x``, its driving Brownian motion ``b`` and the
    cumulative time ``occ0`` spent at 0.  Batched when values are 2-d."""

    x: GridPath
    b: GridPath
    occ0: GridPath

    def __getitem__(self, idx) -> "StickyTriple":
        return StickyTriple(self.x[idx], self.b[idx], self.occ0[idx])

    @property
    def n_paths(self) -> int:
        return self.x.n_paths


def reflect_levy(w: GridPath) -> ReflectedPair:
    """``rho = max(w) - w`` and ``ell = max(w)`` (running maxima)."""
    if np.any(w.values[..., 0] != 0.0):
        raise ValueError("Brownian path must start at 0")
    ell = running_max(w)
    return ReflectedPair(GridPath(w.grid, ell.values - w.values), ell)


def time_change(ell: GridPath, lam: float) -> GridPath:
    """Additive clock ``A(s) = s + ell(s) / lam``."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    return GridPath(ell.grid, ell.grid.t + ell.values / lam)


def occupation_time(x: GridPath, tol_zero: float = 0.0) -> GridPath:
    """Cumulative left-point time with ``|x| <= tol_zero``."""
    if tol_zero < 0:
        raise ValueError("tol_zero must be nonnegative")
    v = x.values
    out = np.zeros_like(v)
    np.cumsum((np.abs(v[..., :-1]) <= tol_zero) * x.grid.dt, axis=-1, out=out[..., 1:])
    return GridPath(x.grid, out)


def _normals(streams, sub, n):
    out = np.empty((len(streams), n))
    for row, s in zip(out, streams):
        s.substream(sub).generator().standard_normal(out=row)
    return out


@numba.njit(cache=True, nogil=True)
def _evaluate(x0, lam, ds, q, w, m, ell, z):
    """Read the time-changed path off the internal grid at clock times ``q``.

    Per row, the step containing each ``q`` is found by walking the clock.
    A step where the reflection pushes splits into a descent to 0, a hold of
    length ``d ell / lam`` and a rise; the driving motion is a Brownian bridge
    between the grid value and the sampled step maximum on each piece.
    """
    n, nq = z.shape
    n_steps = w.shape[1] - 1
    x = np.empty((n, nq))
    w_at = np.empty((n, nq))
    t_at = np.empty((n, nq))
    for i in range(n):
        k = 0
        for j in range(nq):
            qj = q[j]
            while k + 1 <= n_steps and (k + 1) * ds + ell[i, k + 1] / lam <= qj:
                k += 1
            kk = min(k, n_steps - 1)
            u = qj - (kk * ds + ell[i, kk] / lam)
            s_k = kk * ds
            a, b, mk = w[i, kk], w[i, kk + 1], m[i, kk]
            rho0 = x0 - a + ell[i, kk]
            rho1 = x0 - b + ell[i, kk + 1]
            dl = ell[i, kk + 1] - ell[i, kk]
            if dl > 0:
                denom = 2.0 * mk - a - b
                d1 = ((mk - a) / denom if denom > 0 else 0.5) * ds
                hold = dl / lam
                d2 = ds - d1
                if u < d1:
                    t = s_k + u
                    xv = rho0 * (1.0 - u / d1)
                    lo, hi, g, seg = a, mk, u / d1, d1
                elif u < d1 + hold:
                    t = s_k + d1
                    xv = 0.0
                    lo, hi, g, seg = mk, b, 0.0, 0.0
                else:
                    v = min(max(u - d1 - hold, 0.0), d2)
                    t = s_k + d1 + v
                    sd2 = d2 if d2 > 0 else 1.0
                    xv = rho1 * v / sd2 if d2 > 0 else rho1
                    lo, hi, g, seg = mk, b, v / sd2, d2
            else:
                uu = min(u, ds)
                t = s_k + uu
                xv = rho0 + (rho1 - rho0) * (uu / ds)
                lo, hi, g, seg = a, b, uu / ds, ds
            g = min(max(g, 0.0), 1.0)
            x[i, j] = max(xv, 0.0)
            w_at[i, j] = lo + g * (hi - lo) + math.sqrt(g * (1.0 - g) * seg) * z[i, j]
            t_at[i, j] = t
    return x, w_at, t_at


def _sticky_from_origin(x0, lam, q, ds, n_steps, streams, bridge):
    """Sticky paths started at ``x0 >= 0`` evaluated at sorted times ``q``.

    Returns ``(x, minus_w_at_T, occ)`` arrays of shape ``(n, len(q))``.
    Substreams: 0 internal increments, 1 bridge uniforms, 2 bridge noise for
    the driving motion, 3 the holding-time filler.
    """
    n = len(streams)
    w = np.zeros((n, n_steps + 1))
    np.cumsum(_normals(streams, 0, n_steps) * math.sqrt(ds), axis=1, out=w[:, 1:])
    a, b = w[:, :-1], w[:, 1:]
    if bridge:
        u = np.empty((n, n_steps))
        for row, s in zip(u, streams):
            s.substream(1).generator().random(out=row)
        m = bridge_extremum(a, b, ds, 1.0 - u, upper=True)
    else:
        m = np.maximum(a, b)
    ell = np.zeros_like(w)
    ell[:, 1:] = np.maximum(np.maximum.accumulate(m, axis=1) - x0, 0.0)
    x, w_at, T = _evaluate(x0, lam, ds, q, w, m, ell, _normals(streams, 2, q.size))
    occ = np.maximum(q - T, 0.0)
    docc = np.diff(occ, axis=1, prepend=0.0)
    filler = np.cumsum(np.sqrt(np.maximum(docc, 0.0)) * _normals(streams, 3, q.size), axis=1)
    return x, -w_at + filler, occ


def sticky_batch(
    x0: float,
    lam: float,
    grid: TimeGrid,
    streams: Sequence[RngStream],
    bridge: bool = True,
    substeps: int = 1,
) -> StickyTriple:
    """Sticky solutions for a batch of streams on ``grid``.

    For ``x0 < 0`` the path first moves linearly, ``X(t) = x0 + lam t``, until
    it reaches 0 at ``-x0 / lam``; ``B`` is an independent Brownian motion on
    that stretch.  ``bridge`` samples the internal running maximum inside
    each step from the Brownian-bridge law instead of reading it off the
    grid.  The internal step is ``min(dt) / substeps``.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    if substeps < 1:
        raise ValueError("substeps must be >= 1")
    if grid.n_steps == 0:
        raise ValueError("grid needs at least one step")
    n = len(streams)
    t = grid.t
    ds = float(np.min(grid.dt)) / substeps
    t0 = max(0.0, -x0 / lam)
    start = max(x0, 0.0)

    x = np.empty((n, t.size))
    b = np.zeros((n, t.size))
    occ = np.zeros((n, t.size))
    npre = int(np.searchsorted(t, t0, side="right")) if x0 < 0 else 0  # grid times up to t0
    b_t0 = np.zeros(n)
    if npre:
        x[:, :npre] = x0 + lam * t[:npre]
        times = np.append(t[:npre], t0)
        steps = np.diff(times, prepend=0.0)
        walk = np.cumsum(np.sqrt(steps) * _normals(streams, 4, times.size), axis=1)
        b[:, :npre] = walk[:, :-1]
        b_t0 = walk[:, -1]
    if npre < t.size:
        q = t[npre:] - t0
        span = float(q[-1])
        n_steps = max(1, int(math.ceil(span / ds - 1e-9)))
        xs, bs, os_ = _sticky_from_origin(start, lam, q, ds, n_steps, streams, bridge)
        x[:, npre:] = xs
        b[:, npre:] = b_t0[:, None] + bs
        occ[:, npre:] = os_
    return StickyTriple(GridPath(grid, x), GridPath(grid, b), GridPath(grid, occ))


def sticky_solution(
    x0: float,
    lam: float,
    stream: RngStream,
    horizon: float,
    dt: float,
    bridge: bool = True,
) -> StickyTriple:
    """One sticky path on the uniform grid of step ``dt`` up to ``horizon``."""
    if dt <= 0 or horizon <= 0:
        raise ValueError("dt and horizon must be positive")
    return sticky_batch(x0, lam, TimeGrid.uniform(horizon, dt), [stream], bridge)[0]
