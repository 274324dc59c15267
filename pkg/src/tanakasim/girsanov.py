"""Likelihood-ratio reweighting between the sticky measure and the drifted one.

Under the sampling measure the driving process ``B`` is a standard Brownian
motion.  Reweighting by ``exp(lam B(T) - lam^2 T / 2)`` makes ``B(t) - lam t``
a Brownian motion on ``[0, T]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

__all__ = [
    "WeightedSample",
    "EssCollapseError",
    "girsanov_weight",
    "weighted_mean",
    "effective_sample_size",
    "check_ess",
]


class EssCollapseError(RuntimeError):
    """Importance weights have degenerated below the allowed effective sample size."""


@dataclass(frozen=True)
class WeightedSample:
    value: float
    weight: float

    def __post_init__(self):
        if not (self.weight > 0 and math.isfinite(self.weight)):
            raise ValueError("weight must be positive and finite")


def girsanov_weight(b_terminal, lam: float, horizon: float):
    """Density ``dP/dQ`` on ``F_horizon``: ``exp(lam B(T) - lam^2 T / 2)``."""
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    w = np.exp(lam * np.asarray(b_terminal, dtype=float) - 0.5 * lam * lam * horizon)
    return w if w.ndim else float(w)


def _fsum(x) -> float:
    return math.fsum(np.asarray(x, dtype=float).ravel().tolist())


def effective_sample_size(weights) -> float:
    w = np.asarray(weights, dtype=float)
    return _fsum(w) ** 2 / _fsum(w * w)


def weighted_mean(samples: Iterable[WeightedSample] | None = None, *, values=None, weights=None):
    """Self-normalised estimate ``sum(w v) / sum(w)``.

    Accepts a sequence of :class:`WeightedSample` or parallel ``values`` /
    ``weights`` arrays.  Returns ``(estimate, stderr, ess)``; ``stderr`` is
    the delta-method standard error of the ratio estimator (``nan`` for a
    single sample).  Sums are exactly rounded, so the result does not depend
    on the order of the samples.
    """
    if samples is not None:
        samples = list(samples)
        values = [s.value for s in samples]
        weights = [s.weight for s in samples]
    v = np.asarray(values, dtype=float)
    w = np.ones_like(v) if weights is None else np.asarray(weights, dtype=float)
    if v.size == 0:
        raise ValueError("no samples")
    if w.shape != v.shape:
        raise ValueError("values and weights differ in length")
    if np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be positive and finite")
    sw = _fsum(w)
    est = _fsum(w * v) / sw
    ess = sw * sw / _fsum(w * w)
    n = v.size
    if n == 1:
        return est, float("nan"), ess
    var = n / (n - 1) * _fsum((w * (v - est)) ** 2) / (sw * sw)
    return est, math.sqrt(var), ess


def check_ess(weights, min_fraction: float = 0.01) -> float:
    """Return the ESS, raising :class:`EssCollapseError` below ``min_fraction * n``."""
    ess = effective_sample_size(weights)
    n = np.asarray(weights).size
    if ess < min_fraction * n:
        raise EssCollapseError(f"effective sample size {ess:.1f} < {min_fraction} * {n}")
    return ess
