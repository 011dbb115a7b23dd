"""Minimum enclosing ball.

Move-to-front Welzl recursion on a small core set, wrapped in a loop that
adds the farthest violators of the current ball until every input point is
covered.  The final ball is the minimum ball of the core, and it covers the
whole input, so it is the minimum ball of the input as well.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._ball_kernel import enclose

DEFAULT_TOL = 1e-10


@dataclass
class Ball:
    center: np.ndarray
    radius: float
    support: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    def contains(self, points, tol: float = DEFAULT_TOL) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.linalg.norm(pts - self.center, axis=1) <= self.radius * (1 + tol) + 1e-300


def circumball(points: np.ndarray) -> tuple[np.ndarray, float]:
    """Smallest ball having every point of ``points`` on its boundary.

    The center is sought in the affine hull of the points, which reduces to
    the k x k normal-equation system ``2 A A^T lam = |a_i|^2``.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    base = pts[0]
    if len(pts) == 1:
        return base.copy(), 0.0
    a = pts[1:] - base
    gram = a @ a.T
    rhs = 0.5 * np.diag(gram)
    try:
        lam = np.linalg.solve(gram, rhs)
        if not np.all(np.isfinite(lam)) or np.linalg.cond(gram) > 1e12:
            raise np.linalg.LinAlgError
    except np.linalg.LinAlgError:
        lam = np.linalg.lstsq(gram, rhs, rcond=None)[0]
    center = base + lam @ a
    radius = float(np.max(np.linalg.norm(pts - center, axis=1)))
    return center, radius


def min_enclosing_ball(points, tol: float = DEFAULT_TOL) -> Ball:
    """Smallest ball containing all ``points`` (shape ``(m, d)``).

    ``support`` holds the indices of at most d+1 boundary points whose
    circumball is the result.
    """
    pts = np.ascontiguousarray(np.atleast_2d(np.asarray(points, dtype=float)))
    m, d = pts.shape
    if m == 0:
        raise ValueError("need at least one point")
    if m <= 48:
        seed = np.arange(m)
    else:
        seed = np.unique(np.concatenate([pts.argmin(axis=0), pts.argmax(axis=0)]))
    center, r2, support = enclose(pts, seed.astype(np.int64), (1.0 + tol) ** 2)
    return Ball(center=center, radius=float(np.sqrt(r2)), support=support.astype(int))
