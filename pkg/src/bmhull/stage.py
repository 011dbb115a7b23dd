"""Stop-and-restart construction that forces the hull to contain a large simplex.

Stage j runs the walk from ``x_{j-1}`` until its displacement, projected onto
the orthogonal complement ``X_{j-1}`` of the earlier stage points, reaches
radius ``r_j``.  The stage points ``x_1..x_n`` span a simplex with the
origin whose volume is at least ``prod(r) / n!``, and the expected total
time is ``sum_j r_j**2 / (n - j + 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import DegenerateInput, build_hull, hull_volume
from .optimize import OptProblem, closed_form
from .rng import StreamKey, gaussian_stream

BLOCK = 4096


@dataclass(frozen=True)
class StageRadii:
    r: tuple[float, ...]

    def __post_init__(self):
        if len(self.r) == 0 or any(not (v > 0 and math.isfinite(v)) for v in self.r):
            raise ValueError("radii must be positive and finite")

    @property
    def dim(self) -> int:
        return len(self.r)


class Subspace:
    """Orthonormal basis (rows) of a linear subspace of R^n."""

    def __init__(self, basis):
        self.basis = np.atleast_2d(np.asarray(basis, dtype=float))

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(np.eye(n))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def coords(self, v) -> np.ndarray:
        return np.asarray(v, dtype=float) @ self.basis.T

    def project(self, v) -> np.ndarray:
        return self.coords(v) @ self.basis

    def without(self, x) -> "Subspace":
        """Complement of ``x`` inside this subspace (one dimension less)."""
        w = self.project(x)
        norm = np.linalg.norm(w)
        if norm == 0:
            raise ValueError("vector has no component in the subspace")
        w /= norm
        # drop the basis row most aligned with w, then Gram-Schmidt the rest
        drop = int(np.argmax(np.abs(self.basis @ w)))
        out = []
        for row in np.delete(self.basis, drop, axis=0):
            v = row.copy()
            for _ in range(2):
                v -= (v @ w) * w
                for q in out:
                    v -= (v @ q) * q
            out.append(v / np.linalg.norm(v))
        return Subspace(np.array(out).reshape(len(out), len(w)))


@dataclass
class StageResult:
    times: np.ndarray  # T_1..T_n
    points: np.ndarray  # x_1..x_n as rows
    hull_volume: float
    simplex_volume: float
    total_time: float
    censored: bool = False
    stage_dt: np.ndarray = field(default_factory=lambda: np.zeros(0))
    complements: list = field(default_factory=list)  # bases of X_1..X_n


def optimal_radii(n: int) -> StageRadii:
    return StageRadii(tuple(float(v) for v in closed_form(OptProblem(n)).x))


def expected_total_time(n: int, radii) -> float:
    r = np.asarray(radii.r if isinstance(radii, StageRadii) else radii, dtype=float)
    if len(r) != n or np.any(r <= 0):
        raise ValueError(f"need {n} positive radii")
    return float(np.sum(r * r / np.arange(n, 0, -1)))


def gram_simplex_volume(vectors) -> float:
    """Volume of the simplex with vertices 0, v_1..v_n: sqrt(det G) / n!."""
    m = np.atleast_2d(np.asarray(vectors, dtype=float))
    n = len(m)
    if m.shape != (n, n):
        raise ValueError("need n vectors in R^n")
    eig = np.linalg.eigvalsh(m @ m.T)
    if eig[0] <= 1e-12 * max(eig[-1], 1e-300):
        return 0.0
    return float(math.exp(0.5 * np.sum(np.log(eig)) - math.lgamma(n + 1)))


def run_construction(n: int, radii: StageRadii, dt: float | None, key: StreamKey,
                     max_points: int = 20_000, horizon_factor: float = 64.0,
                     with_hull: bool = True) -> StageResult:
    """Simulate the construction on a grid.

    ``dt=None`` uses ``1e-4`` times each stage's expected duration.  The walk
    is stopped at ``horizon_factor`` times the expected total time, in which
    case the result is flagged ``censored``.  The hull is taken over a
    uniform stride of the visited grid points (at most ``max_points``) plus
    the origin and the stage points.
    """
    r = np.asarray(radii.r, dtype=float)
    if len(r) != n:
        raise ValueError(f"need {n} radii, got {len(r)}")
    if dt is not None and not dt > 0:
        raise ValueError("dt must be positive")
    stage_mean = r * r / np.arange(n, 0, -1)
    dts = stage_mean * 1e-4 if dt is None else np.full(n, float(dt))
    limit = horizon_factor * float(stage_mean.sum())

    stream = gaussian_stream(key)
    space = Subspace.full(n)
    here = np.zeros(n)
    t = 0.0
    times = np.full(n, np.nan)
    points = np.zeros((n, n))
    visited = [here[None, :]]
    complements = []
    censored = False
    for j in range(n):
        base = here.copy()
        scale = math.sqrt(dts[j])
        steps_done = 0
        done = False
        while not done:
            rows = BLOCK
            pos = np.cumsum(np.concatenate([here[None, :], stream.take_matrix(rows, n) * scale]),
                            axis=0)[1:]
            reach = np.linalg.norm(space.coords(pos - base), axis=1)
            hit = np.flatnonzero(reach >= r[j])
            if len(hit):
                k = int(hit[0])
                pos = pos[: k + 1]
                done = True
            if t + (steps_done + len(pos)) * dts[j] > limit:
                keep = max(0, int((limit - t) / dts[j]) - steps_done)
                visited.append(pos[:keep])
                censored = True
                break
            visited.append(pos)
            steps_done += len(pos)
            here = pos[-1]
        if censored:
            break
        t += steps_done * dts[j]
        times[j] = t
        points[j] = here
        space = space.without(here) if j < n - 1 else Subspace(np.zeros((0, n)))
        complements.append(space.basis.copy())

    if censored:
        return StageResult(times, points, float("nan"), float("nan"), limit, True, dts, complements)

    simplex = gram_simplex_volume(points)
    hv = float("nan")
    if with_hull:
        walk = np.concatenate(visited)
        stride = max(1, -(-len(walk) // max_points))
        cloud = np.concatenate([walk[::stride], np.zeros((1, n)), points])
        if n == 1:
            hv = float(cloud.max() - cloud.min())
        else:
            try:
                hv = hull_volume(build_hull(cloud))
            except DegenerateInput:
                hv = 0.0
    return StageResult(times, points, hv, simplex, float(times[-1]), False, dts, complements)
