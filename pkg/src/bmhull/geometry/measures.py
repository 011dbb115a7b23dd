"""Diameter and axis-aligned boxes."""

from __future__ import annotations

import itertools

import numpy as np

from ._ball_kernel import sorted_diameter
from .ball import min_enclosing_ball

_BRUTE_LIMIT = 64


def pairwise_max_distance(points) -> float:
    """Largest pairwise distance by exhaustive scan, in row blocks."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    best = 0.0
    for lo in range(0, len(pts), 256):
        diff = pts[lo:lo + 256, None, :] - pts[None, :, :]
        best = max(best, float(np.max(np.sum(diff * diff, axis=2))))
    return float(np.sqrt(best))


def diameter(points) -> float:
    """Maximum pairwise Euclidean distance.

    Large inputs are pruned first: with ``c, r`` the minimum enclosing ball,
    a point at distance ``s`` from ``c`` is at most ``s + r`` from any other
    point, so it can only belong to a diametral pair if ``s + r`` exceeds a
    known lower bound.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if len(pts) == 1:
        return 0.0
    if len(pts) <= _BRUTE_LIMIT:
        return pairwise_max_distance(pts)
    ball = min_enclosing_ball(pts)
    s = np.linalg.norm(pts - ball.center, axis=1)
    order = np.argsort(s)[::-1]
    diff = pts - pts[order[0]]
    best2 = float(np.max(np.sum(diff * diff, axis=1)))
    keep = order[s[order] + ball.radius > np.sqrt(best2)]
    return float(np.sqrt(sorted_diameter(np.ascontiguousarray(pts[keep]), s[keep], best2)))


def hyperrectangle_corners(halfwidths) -> np.ndarray:
    """The 2^d corners of the origin-centered box with the given half-widths."""
    w = np.asarray(halfwidths, dtype=float)
    if w.ndim != 1 or len(w) == 0:
        raise ValueError("need at least one half-width")
    if np.any(w < 0):
        raise ValueError("half-widths must be nonnegative")
    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=len(w))))
    return signs * w


def circumscribed_box(points) -> tuple[np.ndarray, np.ndarray]:
    """Per-coordinate envelope as ``(halfwidths, center)``."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    return (hi - lo) / 2.0, (hi + lo) / 2.0
