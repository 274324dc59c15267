"""Time grids, seeded random streams and Brownian path primitives.

Every path in the package lives on a :class:`TimeGrid`.  A :class:`GridPath`
holds one value per grid point along its last axis; leading axes index
independent paths, so a batch of ``n`` paths is a single ``GridPath`` whose
``values`` has shape ``(n, len(grid))``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "TimeGrid",
    "GridPath",
    "RngStream",
    "streams_for",
    "sample_brownian",
    "brownian_batch",
    "running_max",
    "bridge_lower_crossing_prob",
    "bridge_extremum",
]

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Strictly increasing sample times starting at exactly 0."""

    t: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        if t.ndim != 1 or t.size == 0:
            raise ValueError("time grid must be a nonempty 1-d sequence")
        if t[0] != 0.0:
            raise ValueError("time grid must start at 0")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("time grid must be strictly increasing")
        t.setflags(write=False)
        object.__setattr__(self, "t", t)

    @classmethod
    def uniform(cls, horizon: float, dt: float) -> "TimeGrid":
        """Grid ``0, dt, 2dt, ..., horizon``; ``horizon/dt`` is rounded to an integer."""
        if dt <= 0 or horizon < 0:
            raise ValueError("need dt > 0 and horizon >= 0")
        n = int(round(horizon / dt))
        if n > 0 and not np.isclose(n * dt, horizon, rtol=1e-9, atol=0.0):
            raise ValueError(f"horizon {horizon} is not a multiple of dt {dt}")
        return cls(np.arange(n + 1) * dt)

    @property
    def dt(self) -> np.ndarray:
        return np.diff(self.t)

    @property
    def horizon(self) -> float:
        return float(self.t[-1])

    @property
    def n_steps(self) -> int:
        return self.t.size - 1

    def __len__(self) -> int:
        return self.t.size

    def __eq__(self, other) -> bool:
        return isinstance(other, TimeGrid) and np.array_equal(self.t, other.t)

    __hash__ = None

    def subsample(self, every: int) -> "TimeGrid":
        if (len(self) - 1) % every:
            raise ValueError("step count is not divisible by the subsampling factor")
        return TimeGrid(self.t[::every])


@dataclass(frozen=True, eq=False)
class GridPath:
    """Values of a process (or a batch of processes) on a time grid."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 0 or v.shape[-1] != len(self.grid):
            raise ValueError(
                f"values have {v.shape[-1] if v.ndim else 0} points, grid has {len(self.grid)}"
            )
        object.__setattr__(self, "values", v)

    @property
    def n_paths(self) -> int:
        return 1 if self.values.ndim == 1 else int(np.prod(self.values.shape[:-1]))

    @property
    def terminal(self) -> np.ndarray | float:
        return self.values[..., -1]

    def __getitem__(self, idx) -> "GridPath":
        """Select paths from a batch (``idx`` indexes the leading axis)."""
        if self.values.ndim == 1:
            raise IndexError("single path has no batch axis")
        return GridPath(self.grid, self.values[idx])

    def same_grid(self, other: "GridPath") -> bool:
        return self.grid == other.grid


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream addressed by ``(seed, stream_index)``.

    Streams are derived through :class:`numpy.random.SeedSequence` spawn keys,
    so distinct indices are statistically independent and no state is shared.
    Path ``k`` of a Monte Carlo run uses ``stream_index = k``.
    """

    seed: int
    stream_index: int = 0
    sub: tuple[int, ...] = ()

    def __post_init__(self):
        if self.stream_index < 0:
            raise ValueError("stream_index must be nonnegative")

    def substream(self, j: int) -> "RngStream":
        return RngStream(self.seed, self.stream_index, self.sub + (int(j),))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(
            entropy=int(self.seed) & _SEED_MASK,
            spawn_key=(int(self.stream_index),) + self.sub,
        )
        return np.random.Generator(np.random.PCG64(ss))


def streams_for(seed: int, indices: Iterable[int]) -> list[RngStream]:
    return [RngStream(seed, int(k)) for k in indices]


def _fill_normals(streams: Sequence[RngStream], n: int, sub: int = 0) -> np.ndarray:
    out = np.empty((len(streams), n))
    for row, s in zip(out, streams):
        s.substream(sub).generator().standard_normal(out=row)
    return out


def sample_brownian(grid: TimeGrid, stream: RngStream) -> GridPath:
    """Standard Brownian motion sampled exactly on ``grid``."""
    if grid is None or len(grid) == 0:
        raise ValueError("empty grid")
    return brownian_batch(grid, [stream])[0]


def brownian_batch(grid: TimeGrid, streams: Sequence[RngStream]) -> GridPath:
    """One Brownian path per stream; row ``i`` depends only on ``streams[i]``."""
    z = _fill_normals(streams, grid.n_steps)
    values = np.zeros((len(streams), len(grid)))
    np.cumsum(z * np.sqrt(grid.dt), axis=1, out=values[:, 1:])
    return GridPath(grid, values)


def running_max(path: GridPath) -> GridPath:
    return GridPath(path.grid, np.maximum.accumulate(path.values, axis=-1))


def bridge_lower_crossing_prob(x0, x1, barrier, dt):
    """Probability that a Brownian bridge from ``x0`` to ``x1`` over ``dt``
    reaches ``barrier`` from above.

    Both endpoints must lie strictly above the barrier; a step ending at or
    below it has already crossed and should be treated as probability 1.
    Works elementwise on arrays.
    """
    x0 = np.asarray(x0, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    if np.any(x0 <= barrier) or np.any(x1 <= barrier):
        raise ValueError("endpoints must lie strictly above the barrier")
    if np.any(np.asarray(dt) <= 0):
        raise ValueError("dt must be positive")
    p = np.exp(-2.0 * (x0 - barrier) * (x1 - barrier) / dt)
    return p if p.ndim else float(p)


def bridge_extremum(a, b, dt, u, *, upper: bool = True):
    """Sample the maximum (or minimum) of a Brownian bridge by inversion.

    ``u`` are uniforms in (0, 1]; the result solves
    ``exp(-2 (m - a)(m - b) / dt) = u``, i.e. it inverts
    :func:`bridge_lower_crossing_prob` (mirrored for the maximum).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    root = np.sqrt((a - b) ** 2 - 2.0 * dt * np.log(u))
    return 0.5 * (a + b + root) if upper else 0.5 * (a + b - root)
