"""Euler-Maruyama for indicator-coefficient equations and the correlated
drivers of the perturbed equation

    dX = lam dt + 1{X > 0} dW + (eta / 2) dV.

Indicators and the sign function are read at the left end of each step;
``sgn(0) = -1``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .paths import GridPath, RngStream, TimeGrid

__all__ = [
    "SdeSpec",
    "DriverPair",
    "euler_step_path",
    "correlated_drivers",
    "driver_batch",
    "martingale_transform",
    "prokaj_weak_solution",
    "pathwise_gap",
    "sgn",
]

DRIVER_MODES = ("single", "correlated", "independent")


def sgn(x):
    """Sign with ``sgn(0) = -1``."""
    return np.where(np.asarray(x) > 0, 1.0, -1.0)


@dataclass(frozen=True)
class SdeSpec:
    """Drift ``kappa`` on ``{x > 0}``, ``lam`` on ``{x <= 0}``, unit diffusion on
    ``{x > 0}`` and an optional ``(eta / 2) dV`` perturbation."""

    kappa: float
    lam: float
    eta: float | None = None
    driver_mode: str = "single"
    diffusion_indicator: str = "x>0"

    def __post_init__(self):
        if self.driver_mode not in DRIVER_MODES:
            raise ValueError(f"driver_mode must be one of {DRIVER_MODES}")
        if self.diffusion_indicator != "x>0":
            raise ValueError("only the 'x>0' diffusion region is supported")
        if self.driver_mode == "correlated":
            if self.eta is None or -1.0 <= self.eta <= 1.0:
                raise ValueError("correlated drivers need eta outside [-1, 1]")
        if self.driver_mode == "independent" and not self.eta:
            raise ValueError("independent drivers need eta != 0")
        if self.driver_mode == "single" and self.eta is not None:
            raise ValueError("eta is only used with a second driver")

    @classmethod
    def tanaka(cls, lam: float) -> "SdeSpec":
        return cls(kappa=lam, lam=lam)

    @classmethod
    def perturbed(cls, lam: float, eta: float, mode: str = "correlated") -> "SdeSpec":
        return cls(kappa=lam, lam=lam, eta=eta, driver_mode=mode)


@dataclass(frozen=True)
class DriverPair:
    w: GridPath
    v: GridPath
    cross_variation_rate: float

    def __post_init__(self):
        if not self.w.same_grid(self.v):
            raise ValueError("drivers must share a grid")


def _check_grids(*paths):
    g = paths[0].grid
    for p in paths[1:]:
        if p.grid != g:
            raise ValueError("paths live on different grids")
    return g


def euler_step_path(spec: SdeSpec, x0, drivers) -> GridPath:
    """Euler-Maruyama path(s) of ``spec`` driven by ``drivers``.

    ``drivers`` is a :class:`DriverPair` or a single Brownian
    :class:`GridPath`; batches are handled along the leading axis.

    With ``lam > 0`` and no perturbation the equation has no strong
    solution and its Euler limit as ``dt -> 0`` is delicate; such paths are
    for diagnostics only, the time-change construction in
    :mod:`tanakasim.sticky` samples the weak solution.
    """
    if isinstance(drivers, DriverPair):
        w, v = drivers.w, drivers.v
        _check_grids(w, v)
        if spec.eta is None:
            raise ValueError("a driver pair needs eta in the spec")
    else:
        w, v = drivers, None
        if spec.eta is not None:
            raise ValueError("spec expects a second driver")
    if spec.eta is None and spec.lam > 0:
        warnings.warn(
            "Euler on the unperturbed equation with positive drift on {x <= 0} "
            "has no strong limit; use the sticky construction for its law",
            RuntimeWarning,
            stacklevel=2,
        )
    dt = w.grid.dt
    dw = np.diff(w.values, axis=-1)
    dv = np.diff(v.values, axis=-1) if v is not None else None
    shape = w.values.shape
    x = np.empty(shape)
    x[..., 0] = x0
    half_eta = 0.0 if spec.eta is None else 0.5 * spec.eta
    for i in range(shape[-1] - 1):
        xi = x[..., i]
        pos = xi > 0
        step = np.where(pos, spec.kappa, spec.lam) * dt[i] + pos * dw[..., i]
        if dv is not None:
            step = step + half_eta * dv[..., i]
        x[..., i + 1] = xi + step
    return GridPath(w.grid, x)


def driver_batch(eta: float, mode: str, grid: TimeGrid, streams) -> DriverPair:
    """Batch version of :func:`correlated_drivers`, one stream per path."""
    if mode == "correlated":
        if -1.0 <= eta <= 1.0:
            raise ValueError("correlated mode needs eta outside [-1, 1]")
        rho = -1.0 / eta
    elif mode == "independent":
        if eta == 0:
            raise ValueError("independent mode needs eta != 0")
        rho = 0.0
    else:
        raise ValueError("mode must be 'correlated' or 'independent'")
    n, m = len(streams), grid.n_steps
    z1 = np.empty((n, m))
    z2 = np.empty((n, m))
    for r1, r2, s in zip(z1, z2, streams):
        s.substream(0).generator().standard_normal(out=r1)
        s.substream(1).generator().standard_normal(out=r2)
    sq = np.sqrt(grid.dt)
    # lower-triangular factor of [[1, rho], [rho, 1]]
    dw = z1 * sq
    dv = (rho * z1 + np.sqrt(1.0 - rho * rho) * z2) * sq
    w = np.zeros((n, m + 1))
    v = np.zeros((n, m + 1))
    np.cumsum(dw, axis=1, out=w[:, 1:])
    np.cumsum(dv, axis=1, out=v[:, 1:])
    return DriverPair(GridPath(grid, w), GridPath(grid, v), rho)


def correlated_drivers(eta: float, mode: str, grid: TimeGrid, stream: RngStream) -> DriverPair:
    """Brownian pair with ``d<W, V> = -dt / eta`` (correlated) or 0 (independent)."""
    pair = driver_batch(eta, mode, grid, [stream])
    return DriverPair(pair.w[0], pair.v[0], pair.cross_variation_rate)


def martingale_transform(w: GridPath, v: GridPath, eta: float) -> tuple[GridPath, GridPath]:
    """``M = W / 2`` and ``N = (W + eta V) / 2``."""
    g = _check_grids(w, v)
    return GridPath(g, 0.5 * w.values), GridPath(g, 0.5 * (w.values + eta * v.values))


def prokaj_weak_solution(zeta, u: GridPath, n: GridPath) -> tuple[GridPath, GridPath]:
    """``X = zeta + U + N`` and ``M = sum sgn(X_left) dU`` for independent
    Brownian ``U``, ``N`` (rates 1/4 and (eta^2 - 1)/4)."""
    g = _check_grids(u, n)
    zeta = np.asarray(zeta, dtype=float)
    if zeta.ndim:
        zeta = zeta[..., None]
    x = zeta + u.values + n.values
    m = np.zeros_like(x)
    np.cumsum(sgn(x[..., :-1]) * np.diff(u.values, axis=-1), axis=-1, out=m[..., 1:])
    return GridPath(g, x), GridPath(g, m)


def pathwise_gap(x1: GridPath, x2: GridPath):
    """Sup-distance over the grid (per path for batches)."""
    _check_grids(x1, x2)
    gap = np.max(np.abs(x1.values - x2.values), axis=-1)
    return gap if np.ndim(gap) else float(gap)
