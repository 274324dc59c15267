"""One-sided Skorokhod reflection at 0 and a discrete local-time estimator."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .paths import GridPath, RngStream, bridge_extremum

__all__ = [
    "SkorokhodDecomposition",
    "skorokhod_map",
    "bridge_step_minima",
    "reflected_drifted_bm",
    "local_time_estimate",
]


@dataclass(frozen=True)
class SkorokhodDecomposition:
    """``z = psi + l`` with ``z >= 0`` and ``l`` the minimal nondecreasing regulator."""

    z: GridPath
    l: GridPath


def skorokhod_map(psi: GridPath, step_minima: np.ndarray | None = None) -> SkorokhodDecomposition:
    """Reflect ``psi`` at 0: ``l(t) = max(0, max_{s <= t} -psi(s))``, ``z = psi + l``.

    By default the running maximum is taken over grid points.  ``step_minima``
    (one entry per step, same leading shape as ``psi``) replaces the grid
    minimum of each step by a sampled continuous-time minimum, e.g. from
    :func:`bridge_step_minima`; the reflected values at grid points are then
    exact in law for a Brownian ``psi``.
    """
    v = psi.values
    neg = -v
    if step_minima is not None:
        step_minima = np.asarray(step_minima, dtype=float)
        if step_minima.shape != v[..., 1:].shape:
            raise ValueError("need one minimum per step")
        neg = neg.copy()
        neg[..., 1:] = np.maximum(neg[..., 1:], -step_minima)
    l = np.maximum(np.maximum.accumulate(neg, axis=-1), 0.0)
    return SkorokhodDecomposition(GridPath(psi.grid, v + l), GridPath(psi.grid, l))


def bridge_step_minima(psi: GridPath, streams: RngStream | Sequence[RngStream]) -> np.ndarray:
    """Sample the minimum of ``psi`` inside every step given its endpoints,
    treating ``psi`` as Brownian (unit rate, any constant drift) between
    grid points.  Uniforms come from ``substream(1)`` of each path's stream.
    """
    if isinstance(streams, RngStream):
        streams = [streams]
    v = np.atleast_2d(psi.values)
    if len(streams) != v.shape[0]:
        raise ValueError("need one stream per path")
    u = np.empty((v.shape[0], v.shape[1] - 1))
    for row, s in zip(u, streams):
        s.substream(1).generator().random(out=row)
    u = 1.0 - u
    mins = bridge_extremum(v[:, :-1], v[:, 1:], psi.grid.dt, u, upper=False)
    return mins.reshape(psi.values[..., 1:].shape)


def reflected_drifted_bm(
    x0: float,
    lam: float,
    w: GridPath,
    streams: RngStream | Sequence[RngStream] | None = None,
) -> SkorokhodDecomposition:
    """Brownian motion with drift ``-lam`` started at ``x0``, reflected at 0.

    Passing ``streams`` switches on bridge-sampled step minima (see
    :func:`skorokhod_map`); without them the grid running minimum is used.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    if x0 < 0:
        raise ValueError("x0 must be nonnegative")
    psi = GridPath(w.grid, x0 - lam * w.grid.t + w.values)
    minima = None if streams is None else bridge_step_minima(psi, streams)
    return skorokhod_map(psi, minima)


def local_time_estimate(theta: GridPath, qv_increments, epsilon: float) -> GridPath:
    """Occupation-density estimate of the local time at 0,

        L(t) ~ (1 / (4 eps)) * sum 1{|theta| < eps} d<theta>,

    with the indicator read at the left end of each step.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    v = theta.values
    qv = np.broadcast_to(np.asarray(qv_increments, dtype=float), v[..., 1:].shape)
    if np.any(qv < 0):
        raise ValueError("quadratic-variation increments must be nonnegative")
    near = np.abs(v[..., :-1]) < epsilon
    out = np.zeros_like(v)
    np.cumsum(near * qv / (4.0 * epsilon), axis=-1, out=out[..., 1:])
    return GridPath(theta.grid, out)
