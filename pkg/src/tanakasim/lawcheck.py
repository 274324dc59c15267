"""Statistical checks on simulated laws.

Every check returns a :class:`TestVerdict`.  Checks that aggregate over
many paths also have a form taking pre-computed per-path values, so large
runs can stream paths in chunks and keep only what the check needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numba
import numpy as np
from scipy import stats

from .girsanov import weighted_mean
from .paths import GridPath
from .sticky import StickyTriple

__all__ = [
    "EmpiricalLaw",
    "TestFunction",
    "TestVerdict",
    "ks_statistic",
    "ks_test",
    "bump",
    "warren_terms",
    "warren_check",
    "dynkin_terms",
    "dynkin_verdict",
    "dynkin_residual",
    "occupation_positivity",
    "Z_CAP",
]

Z_CAP = 1e6


@dataclass(frozen=True)
class EmpiricalLaw:
    samples: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float).ravel()
        if s.size == 0:
            raise ValueError("empty sample")
        object.__setattr__(self, "samples", s)
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float).ravel()
            if w.shape != s.shape:
                raise ValueError("weights must match samples")
            if np.any(w <= 0):
                raise ValueError("weights must be positive")
            object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class TestFunction:
    """A test function with its first two derivatives, zero beyond ``support``
    (``|x| >= support`` measured from ``center``)."""

    f: Callable
    df: Callable
    d2f: Callable
    support: float
    center: float = 0.0
    derivatives: Callable | None = None  # optional fused (df, d2f)

    def df_d2f(self, x):
        if self.derivatives is not None:
            return self.derivatives(x)
        return self.df(x), self.d2f(x)


@dataclass(frozen=True)
class TestVerdict:
    statistic: float
    threshold: float
    p_value: float | None = None
    passed: bool = field(default=False)
    name: str = ""
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "statistic": self.statistic,
            "threshold": self.threshold,
            "p_value": self.p_value,
            "pass": self.passed,
            **({"detail": self.detail} if self.detail else {}),
        }


def ks_statistic(law: EmpiricalLaw, cdf: Callable) -> float:
    """``sup |F_n - F|`` over the sample points, weighted ECDF if weights given."""
    order = np.argsort(law.samples, kind="stable")
    x = law.samples[order]
    w = np.ones_like(x) if law.weights is None else law.weights[order]
    cw = np.cumsum(w)
    total = cw[-1]
    # collapse ties so the ECDF jumps once per distinct value
    last = np.r_[x[1:] != x[:-1], True]
    xs = x[last]
    upper = cw[last] / total
    lower = np.r_[0.0, upper[:-1]]
    f = np.asarray(cdf(xs), dtype=float)
    return float(max(np.max(upper - f), np.max(f - lower), 0.0))


def ks_test(law: EmpiricalLaw, cdf: Callable, alpha: float = 1e-4, threshold: float | None = None) -> TestVerdict:
    """One-sample Kolmogorov-Smirnov test.

    Unweighted: p-value from the asymptotic Kolmogorov distribution, pass if
    ``p > alpha``.  Weighted: statistic only, pass if below ``threshold``.
    """
    d = ks_statistic(law, cdf)
    n = law.samples.size
    if law.weights is None:
        p = float(stats.kstwobign.sf(math.sqrt(n) * d))
        crit = float(stats.kstwobign.isf(alpha) / math.sqrt(n))
        return TestVerdict(d, crit, p, p > alpha, "ks")
    if threshold is None:
        raise ValueError("weighted KS needs an explicit threshold")
    return TestVerdict(d, threshold, None, d < threshold, "ks-weighted")


@numba.njit(cache=True, nogil=True)
def _bump_derivatives(x, center, radius):
    d1 = np.zeros_like(x)
    d2 = np.zeros_like(x)
    for i in range(x.size):
        y = (x[i] - center) / radius
        if abs(y) < 1:
            inv_q = 1.0 / (1.0 - y * y)
            g = math.exp(1.0 - inv_q)
            h1 = -2.0 * y * inv_q * inv_q
            h2 = -2.0 * inv_q * inv_q - 8.0 * y * y * inv_q**3
            d1[i] = g * h1 / radius
            d2[i] = g * (h1 * h1 + h2) / radius**2
    return d1, d2


def bump(center: float, radius: float) -> TestFunction:
    """Smooth bump ``exp(1 - 1 / (1 - y^2))``, ``y = (x - center) / radius``."""

    def _parts(x):
        y = (np.asarray(x, dtype=float) - center) / radius
        inside = np.abs(y) < 1
        ys = np.where(inside, y, 0.0)
        q = 1.0 - ys * ys
        g = np.where(inside, np.exp(1.0 - 1.0 / q), 0.0)
        return y, ys, q, inside, g

    def f(x):
        return _parts(x)[4]

    def derivatives(x):
        x = np.asarray(x, dtype=float)
        d1, d2 = _bump_derivatives(x.ravel(), center, radius)
        return d1.reshape(x.shape), d2.reshape(x.shape)

    def df(x):
        return derivatives(x)[0]

    def d2f(x):
        return derivatives(x)[1]

    return TestFunction(f, df, d2f, radius, center, derivatives)


def _z(d: np.ndarray) -> tuple[float, float, float]:
    n = d.size
    mean = math.fsum(d.tolist()) / n
    sd = float(np.std(d, ddof=1)) if n > 1 else 0.0
    se = sd / math.sqrt(n)
    if se == 0.0:
        return mean, 0.0, (0.0 if mean == 0.0 else Z_CAP)
    return mean, se, min(abs(mean) / se, Z_CAP)


def warren_terms(x_t, b_t, s_t, lam: float, x: float):
    """Per-path ``1{X(t) <= x}`` and ``min(1, exp(-2 lam (B(t) + S(t) - x)))``."""
    if x < 0:
        raise ValueError("x must be nonnegative")
    lhs = (np.asarray(x_t) <= x).astype(float)
    rhs = np.minimum(1.0, np.exp(-2.0 * lam * (np.asarray(b_t) + np.asarray(s_t) - x)))
    return lhs, rhs


def warren_check(
    triples: StickyTriple | tuple,
    lam: float,
    t: float,
    x: float,
    threshold: float = 4.0,
    moments: Sequence[int] = (0, 1, 2),
) -> list[TestVerdict]:
    """Compare ``Q(X(t) <= x)`` with the conditional law given the driver.

    ``triples`` is a batched :class:`StickyTriple` (``S`` is then the grid
    running maximum of ``-B``) or a tuple ``(x_t, b_t, s_t)`` of per-path
    values.  For each ``g(B) = B^k`` in ``moments`` the statistic is
    ``|mean((lhs - rhs) g(B))| / stderr``; ``k = 0`` is the plain check.
    """
    if x < 0:
        raise ValueError("x must be nonnegative")
    if isinstance(triples, StickyTriple):
        grid = triples.x.grid
        j = int(np.searchsorted(grid.t, t - 1e-12))
        if j >= len(grid) or not math.isclose(grid.t[j], t, abs_tol=1e-9):
            raise ValueError("t is not a grid time")
        bv = np.atleast_2d(triples.b.values)
        x_t = np.atleast_2d(triples.x.values)[:, j]
        b_t = bv[:, j]
        s_t = np.max(-bv[:, : j + 1], axis=1)
    else:
        x_t, b_t, s_t = (np.asarray(a, dtype=float) for a in triples)
    lhs, rhs = warren_terms(x_t, b_t, s_t, lam, x)
    out = []
    for k in moments:
        d = (lhs - rhs) * b_t**k
        mean, se, z = _z(d)
        out.append(
            TestVerdict(z, threshold, None, z < threshold, f"warren x={x} g=B^{k}",
                        {"lhs": float(np.mean(lhs * b_t**k)), "rhs": float(np.mean(rhs * b_t**k)), "stderr": se})
        )
    return out


def dynkin_terms(paths: GridPath, drift: Callable, diff2: Callable, f: TestFunction) -> np.ndarray:
    """Per-path ``f(X_T) - f(X_0) - sum (drift f' + diff2 f'' / 2)(X_left) dt``."""
    v = np.atleast_2d(paths.values)
    lo, hi = f.center - f.support, f.center + f.support
    if np.any(np.abs(np.asarray(f.f(np.array([lo, hi])))) > 1e-12):
        raise ValueError("test function does not vanish at its support bound")
    left = v[:, :-1]
    d1, d2 = f.df_d2f(left)
    gen = drift(left) * d1 + 0.5 * diff2(left) * d2
    integral = gen @ paths.grid.dt
    return f.f(v[:, -1]) - f.f(v[:, 0]) - integral


def dynkin_verdict(terms, threshold: float = 4.0, allowance: float = 0.0, name: str = "dynkin") -> TestVerdict:
    """Pass if ``|mean residual| < threshold * stderr + allowance``."""
    mean, se, z = _z(np.asarray(terms, dtype=float))
    stat = abs(mean) / se if se > 0 else (0.0 if mean == 0 else Z_CAP)
    bound = threshold * se + allowance
    return TestVerdict(stat, threshold, None, abs(mean) <= bound, name,
                       {"residual": mean, "stderr": se, "allowance": allowance})


def dynkin_residual(paths, drift, diff2, f, horizon=None, threshold=4.0, allowance=0.0) -> TestVerdict:
    """Weak-form (Dynkin) identity ``E f(X_T) - f(X_0) - E int L f(X) dt = 0``."""
    if isinstance(paths, (list, tuple)):
        g = paths[0].grid
        paths = GridPath(g, np.stack([p.values for p in paths]))
    if horizon is not None and not math.isclose(paths.grid.horizon, horizon, rel_tol=1e-12):
        raise ValueError("paths do not end at the requested horizon")
    return dynkin_verdict(dynkin_terms(paths, drift, diff2, f), threshold, allowance)


def occupation_positivity(occ_samples: EmpiricalLaw, threshold: float = 5.0) -> TestVerdict:
    """One-sided z-test that the (weighted) mean occupation at 0 is positive."""
    est, se, ess = weighted_mean(values=occ_samples.samples, weights=occ_samples.weights)
    if not se > 0:
        z = Z_CAP if est > 0 else 0.0
    else:
        z = min(est / se, Z_CAP)
    return TestVerdict(z, threshold, None, z > threshold, "occupation-positivity",
                       {"mean": est, "stderr": se, "ess": ess})
