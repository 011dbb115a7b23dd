"""Discretized Brownian paths, hull functionals at fixed times, and grid passage times.

A path on the grid ``t_k = k * dt`` is built from the stream of its key:
increment k is row k of the Gaussian stream scaled by ``sqrt(dt)``, and
positions are accumulated sequentially from the origin.  Every routine here
walks the path in blocks with the same arithmetic, so a lazily simulated
passage sees bitwise the same points as :func:`sample_path`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, TextIO

import numpy as np

from . import _walk
from .bounds import Quantity, theorem_bounds
from .errors import Censored, Unsupported
from .geometry import (
    DegenerateInput,
    build_hull,
    diameter,
    hull_surface_area,
    hull_volume,
    min_enclosing_ball,
)
from .geometry._kernel import CROSSED
from .geometry.hull import DEFAULT_TOL, HullState, initial_simplex
from .kinds import FunctionalKind, inverse_exponent
from .rng import StreamKey, gaussian_stream

BLOCK = 4096

_PASSAGE_QUANTITY = {
    FunctionalKind.VOLUME: Quantity.THETA_V,
    FunctionalKind.SURFACE_AREA: Quantity.THETA_S,
    FunctionalKind.DIAMETER: Quantity.THETA_D,
    FunctionalKind.CIRCUMRADIUS: Quantity.THETA_R,
}


@dataclass(frozen=True)
class PathConfig:
    dim: int
    steps: int
    horizon: float
    key: StreamKey = StreamKey()

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError(f"steps must be a positive integer, got {self.steps}")
        if not (self.horizon > 0 and math.isfinite(self.horizon)):
            raise ValueError(f"horizon must be positive and finite, got {self.horizon}")

    @property
    def dt(self) -> float:
        return self.horizon / self.steps


@dataclass(frozen=True)
class BrownianPath:
    config: PathConfig
    samples: np.ndarray  # (steps + 1, dim), samples[0] == 0

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.config.steps + 1) * self.config.dt

    def index_at(self, t: float) -> int:
        """Last grid index with time <= t (with a little slack for rounding)."""
        return min(self.config.steps, int(math.floor(t / self.config.dt + 1e-9)))


@dataclass(frozen=True)
class PassageSample:
    kind: FunctionalKind
    level: float
    time: float
    censored: bool = False
    index: int = -1


def _blocks(config: PathConfig, block: int = BLOCK) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(first_index, positions)`` covering grid indices 1..steps."""
    stream = gaussian_stream(config.key)
    scale = math.sqrt(config.dt)
    last = np.zeros((1, config.dim))
    k = 1
    while k <= config.steps:
        rows = min(block, config.steps - k + 1)
        incr = stream.take_matrix(rows, config.dim) * scale
        pos = np.cumsum(np.concatenate([last, incr]), axis=0)[1:]
        yield k, pos
        last = pos[-1:]
        k += rows


def sample_path(config: PathConfig) -> BrownianPath:
    out = np.zeros((config.steps + 1, config.dim))
    for k, pos in _blocks(config):
        out[k:k + len(pos)] = pos
    return BrownianPath(config, out)


def dump_path(path: BrownianPath, fh: TextIO) -> None:
    """Debug text format: one grid point per line."""
    for row in path.samples:
        fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def _functionals(points: np.ndarray, kinds) -> dict[FunctionalKind, float]:
    n = points.shape[1]
    kinds = [FunctionalKind.parse(k) for k in kinds]
    if n == 1:
        span = float(points.max() - points.min())
        out = {}
        for kind in kinds:
            if kind is FunctionalKind.SURFACE_AREA:
                raise Unsupported("surface area is undefined for n = 1")
            out[kind] = span / 2 if kind is FunctionalKind.CIRCUMRADIUS else span
        return out

    hull = None
    if FunctionalKind.VOLUME in kinds or FunctionalKind.SURFACE_AREA in kinds:
        try:
            hull = build_hull(points)
        except DegenerateInput:
            hull = None
    support = hull.vertices if hull is not None else points
    out = {}
    for kind in kinds:
        if kind is FunctionalKind.VOLUME:
            out[kind] = hull_volume(hull) if hull is not None else 0.0
        elif kind is FunctionalKind.SURFACE_AREA:
            out[kind] = hull_surface_area(hull) if hull is not None else 0.0
        elif kind is FunctionalKind.DIAMETER:
            out[kind] = diameter(support)
        else:
            out[kind] = min_enclosing_ball(support).radius
    return out


def functionals_at(path: BrownianPath, kinds, t: float = 1.0) -> dict[FunctionalKind, float]:
    """Several functionals of the hull of the grid points up to time ``t``.

    One hull serves all kinds.  For n = 1, V and D are the range and R is
    half of it.  Degenerate hulls give V = S = 0.
    """
    if path.config.horizon < t * (1 - 1e-12):
        raise ValueError(f"path horizon {path.config.horizon} is shorter than t = {t}")
    return _functionals(path.samples[: path.index_at(t) + 1], kinds)


def functional_at_one(path: BrownianPath, kind) -> float:
    kind = FunctionalKind.parse(kind)
    return functionals_at(path, [kind])[kind]


class _Buffer:
    """Grid points generated on demand; ``pts[0]`` is the origin."""

    def __init__(self, config: PathConfig):
        self.config = config
        self.pts = np.zeros((min(config.steps, BLOCK) + 1, config.dim))
        self.filled = 1
        self._gen = _blocks(config)

    @property
    def exhausted(self) -> bool:
        return self.filled > self.config.steps

    def extend(self) -> bool:
        """Append the next block; False once the horizon is reached."""
        try:
            k, pos = next(self._gen)
        except StopIteration:
            return False
        need = k + len(pos)
        if need > len(self.pts):
            grown = np.zeros((max(need, 2 * len(self.pts)), self.config.dim))
            grown[: self.filled] = self.pts[: self.filled]
            self.pts = grown
        self.pts[k:need] = pos
        self.filled = need
        return True


def _require_level(level: float) -> None:
    if not level > 0:
        raise ValueError(f"level must be positive, got {level}")


def _sample(config, kind, level, k) -> PassageSample:
    if k < 0:
        return PassageSample(kind, level, config.horizon, censored=True)
    return PassageSample(kind, level, k * config.dt, index=k)


def _diameter_crossing(buf: _Buffer, level: float) -> int:
    lo = np.zeros(buf.config.dim)
    hi = np.zeros(buf.config.dim)
    start = 1
    while buf.extend():
        k = _walk.diameter_scan(buf.pts, start, buf.filled, level * level, lo, hi)
        if k >= 0:
            return k
        start = buf.filled
    return -1


def _radius_crossing(config: PathConfig, level: float) -> int:
    """First index whose prefix has circumradius above ``level``.

    The diameter brackets the circumradius, ``D/2 <= R <= D * sqrt(n / (2n + 2))``,
    so the crossing lies between two diameter crossings; bisection on the
    prefix circumradius finishes the job.
    """
    n = config.dim
    jung = math.sqrt(2 * (n + 1) / n)
    early = _diameter_crossing(_Buffer(config), level * jung)
    if early < 0:
        return -1
    buf = _Buffer(config)
    late = _diameter_crossing(buf, 2 * level)
    if n == 1:
        return late
    if late < 0:
        while buf.extend():
            pass
        if min_enclosing_ball(buf.pts[: buf.filled]).radius <= level:
            return -1
        late = buf.filled - 1
    a, b = early - 1, late  # R(prefix a) <= level < R(prefix b)
    while b - a > 1:
        mid = (a + b) // 2
        if min_enclosing_ball(buf.pts[: mid + 1]).radius > level:
            b = mid
        else:
            a = mid
    return b


def _hull_crossing(buf: _Buffer, level: float, which: int, tol: float = DEFAULT_TOL,
                   block: int = 512) -> int:
    """First index whose prefix hull has volume (which=0) or surface (which=1)
    above ``level``.

    Inserting points in path order is exact but creates many short-lived
    facets.  Instead each block of points is added to a copy of the hull in
    farthest-first order; only the block where the level is crossed is
    replayed point by point.
    """
    d = buf.config.dim
    while buf.filled < d + 1:
        if not buf.extend():
            return -1
    # smallest prefix that spans d dimensions gives the starting simplex
    top = d
    while True:
        while top >= buf.filled:
            if not buf.extend():
                return -1
        prefix = buf.pts[: top + 1]
        lo, hi = prefix.min(axis=0), prefix.max(axis=0)
        eps = tol * float(np.linalg.norm(hi - lo))
        try:
            simplex = initial_simplex(prefix, eps)
            break
        except DegenerateInput:
            top += 1
    state = HullState(buf.pts, simplex, eps)
    for i in sorted(set(range(top + 1)) - set(simplex)):
        state.scan(i, i + 1, math.inf, which, tol, lo, hi)
    if _hull_value(state, which) > level:
        return top
    start = top + 1
    while True:
        while start >= buf.filled:
            if not buf.extend():
                return -1
        state.set_points(buf.pts)
        stop = min(start + block, buf.filled)
        chunk = buf.pts[start:stop]
        lo_b = np.minimum(lo, chunk.min(axis=0))
        hi_b = np.maximum(hi, chunk.max(axis=0))
        trial = state.copy()
        trial.set_eps(tol * float(np.linalg.norm(hi_b - lo_b)))
        trial.file_outside(np.arange(start, stop))
        trial.run_bulk(np.zeros(buf.filled, dtype=np.bool_))
        if _hull_value(trial, which) > level:
            status, k = state.scan(start, stop, level, which, tol, lo, hi)
            if status == CROSSED:
                return k
        state, lo, hi = trial, lo_b, hi_b
        start = stop


def _hull_value(state: HullState, which: int) -> float:
    return state.volume if which == 0 else state.surface


def first_passage(config: PathConfig, kind, level: float) -> PassageSample:
    """First grid time at which the functional of the running hull exceeds ``level``.

    The hull (or diameter / circumradius) is updated point by point in path
    order, so the reported time is the exact grid passage time.  Returns a
    censored sample when the horizon is reached first.
    """
    kind = FunctionalKind.parse(kind)
    _require_level(level)
    n = config.dim
    if kind is FunctionalKind.SURFACE_AREA and n < 2:
        raise Unsupported("surface area is undefined for n = 1")
    if kind is FunctionalKind.DIAMETER or (kind is FunctionalKind.VOLUME and n == 1):
        k = _diameter_crossing(_Buffer(config), level)
    elif kind is FunctionalKind.CIRCUMRADIUS:
        k = _radius_crossing(config, level)
    else:
        which = 0 if kind is FunctionalKind.VOLUME else 1
        k = _hull_crossing(_Buffer(config), level, which)
    return _sample(config, kind, level, k)


def exit_time(config: PathConfig, radius: float = 1.0) -> float:
    """First grid time with ``|W_t| >= radius``; raises :class:`Censored` if none."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    r2 = radius * radius
    for k, pos in _blocks(config):
        hit = np.flatnonzero(np.einsum("ij,ij->i", pos, pos) >= r2)
        if len(hit):
            return (k + int(hit[0])) * config.dt
    raise Censored(config.horizon)


def exit_time_unit_ball(config: PathConfig) -> float:
    return exit_time(config, 1.0)


def passage_config(kind, dim: int, level: float, key: StreamKey,
                   resolution: int = 2000, horizon_factor: float = 16.0) -> PathConfig:
    """Grid for a direct passage experiment.

    The horizon is ``horizon_factor`` times the upper bound on the mean
    passage time at this level, and ``dt`` is the lower bound divided by
    ``resolution``, so a typical passage spans thousands of steps.
    """
    kind = FunctionalKind.parse(kind)
    _require_level(level)
    row = theorem_bounds(_PASSAGE_QUANTITY[kind], dim)
    scale = level ** inverse_exponent(kind, dim)
    dt = row.lower * scale / resolution
    horizon = horizon_factor * row.upper * scale
    return PathConfig(dim, int(math.ceil(horizon / dt)), horizon, key)
