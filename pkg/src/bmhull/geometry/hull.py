"""Incremental (beneath-beyond) convex hull in dimension d with simplicial facets.

The hull is grown one point at a time.  For a new point ``p`` the visible
facets are those whose hyperplane has ``p`` strictly on the positive side
(beyond a tolerance); they are deleted and every horizon ridge is coned to
``p``.  Bulk construction keeps Quickhull-style outside sets so interior
points are discarded early; the inner loops live in ``_kernel`` (numba).

All side-of-hyperplane tests use an absolute epsilon equal to ``tol`` times
the diagonal of the bounding box of the input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from . import _kernel as K

DEFAULT_TOL = 1e-9


class DegenerateInput(ValueError):
    """Points do not span a full-dimensional simplex within tolerance."""

    def __init__(self, rank: int, dim: int):
        self.rank = rank
        self.dim = dim
        super().__init__(f"points are affinely dependent: achieved affine rank {rank}, need {dim}")


class HullTopologyError(RuntimeError):
    pass


@dataclass(frozen=True)
class Facet:
    vertex_ids: tuple
    normal: np.ndarray
    offset: float


@dataclass
class ConvexHull:
    """Simplicial convex hull.

    ``facet_vertices`` index into ``vertices``; ``input_index`` maps each
    vertex back to the row of the point array the hull was built from.
    Every facet satisfies ``normals[f] @ x <= offsets[f]`` for points of
    the hull.
    """

    dim: int
    vertices: np.ndarray
    facet_vertices: np.ndarray
    normals: np.ndarray
    offsets: np.ndarray
    interior_point: np.ndarray
    input_index: np.ndarray
    tol_abs: float = 0.0

    @property
    def facets(self) -> list[Facet]:
        return [
            Facet(tuple(int(i) for i in fv), n, float(o))
            for fv, n, o in zip(self.facet_vertices, self.normals, self.offsets)
        ]

    def signed_distances(self, points) -> np.ndarray:
        """``(m, F)`` matrix of ``<normal, p> - offset``."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return pts @ self.normals.T - self.offsets

    def contains(self, points, tol: float | None = None) -> np.ndarray:
        eps = self.tol_abs if tol is None else tol
        return np.all(self.signed_distances(points) <= eps, axis=1)

    def dump(self, fh: TextIO) -> None:
        """Debug text format: vertex lines (d floats) followed by facet lines (d indices)."""
        for v in self.vertices:
            fh.write(" ".join(repr(float(x)) for x in v) + "\n")
        for fv in self.facet_vertices:
            fh.write(" ".join(str(int(i)) for i in fv) + "\n")


def load_hull_dump(fh: TextIO) -> tuple[np.ndarray, np.ndarray]:
    """Parse :meth:`ConvexHull.dump` output back into ``(vertices, facets)``.

    Vertex lines hold float reprs (always containing '.' or 'e'); facet
    lines hold bare integers.
    """
    verts, facets = [], []
    for line in fh:
        fields = line.split()
        if not fields:
            continue
        if all(f.lstrip("-").isdigit() for f in fields):
            facets.append([int(f) for f in fields])
        else:
            verts.append([float(f) for f in fields])
    return np.array(verts, dtype=float), np.array(facets, dtype=np.int64)


def initial_simplex(points: np.ndarray, eps: float) -> list[int]:
    """Indices of d+1 affinely independent points, chosen greedily.

    Starts from the farthest pair among the per-axis extreme points and then
    repeatedly adds the point farthest from the current affine hull.
    """
    n, d = points.shape
    cand = np.unique(np.concatenate([points.argmin(axis=0), points.argmax(axis=0)]))
    sub = points[cand]
    gaps = np.linalg.norm(sub[:, None, :] - sub[None, :, :], axis=2)
    a, b = np.unravel_index(np.argmax(gaps), gaps.shape)
    if gaps[a, b] <= eps:
        raise DegenerateInput(0, d)
    chosen = [int(cand[a]), int(cand[b])]
    rel = points - points[chosen[0]]
    basis = [rel[chosen[1]] / np.linalg.norm(rel[chosen[1]])]
    resid = rel - np.outer(rel @ basis[0], basis[0])
    for k in range(2, d + 1):
        dist = np.linalg.norm(resid, axis=1)
        j = int(np.argmax(dist))
        if dist[j] <= eps:
            raise DegenerateInput(k - 1, d)
        chosen.append(j)
        u = resid[j] / dist[j]
        # second Gram-Schmidt pass keeps the basis orthogonal
        u = u - sum((u @ q) * q for q in basis)
        u /= np.linalg.norm(u)
        basis.append(u)
        resid = resid - np.outer(resid @ u, u)
    return chosen


class HullState:
    """Array-backed simplicial hull, mutated by the numba kernels in ``_kernel``.

    ``volume`` and ``surface`` are running totals maintained locally on
    every insertion (pyramids over a fixed interior point).
    """

    def __init__(self, points: np.ndarray, simplex, eps: float, cap: int = 256):
        self.points = points
        n, d = points.shape
        self.dim = d
        sid = np.asarray(simplex, dtype=np.int64)
        self.center = points[sid].mean(axis=0)
        self.ic = np.zeros(7, dtype=np.int64)
        self.sc = np.zeros(3)
        self.sc[K.EPS] = eps
        self.fv = np.zeros((cap, d), dtype=np.int64)
        self.nbr = np.zeros((cap, d), dtype=np.int64)
        self.nrm = np.zeros((cap, d))
        self.off = np.full(cap, np.inf)
        self.area = np.zeros(cap)
        self.alive = np.zeros(cap, dtype=np.bool_)
        self.free = np.zeros(cap, dtype=np.int64)
        self.vmark = np.zeros(cap, dtype=np.int64)
        self.tmark = np.zeros(cap, dtype=np.int64)
        self.newid = np.zeros((cap, d), dtype=np.int64)
        self.orig = np.zeros((cap, 2), dtype=np.int64)
        self.buf_vis = np.zeros(cap, dtype=np.int64)
        self.buf_new = np.zeros(cap, dtype=np.int64)
        self.head = np.full(cap, -1, dtype=np.int64)
        self.todo = np.zeros(cap, dtype=np.int64)
        self.queued = np.zeros(cap, dtype=np.bool_)
        self.nxt = np.full(n, -1, dtype=np.int64)
        K.init_simplex(points, sid, self.center, self.fv, self.nbr, self.nrm, self.off,
                       self.area, self.alive, self.free, self.ic, self.sc)

    _GROW = {
        "fv": 0, "nbr": 0, "nrm": 0.0, "off": np.inf, "area": 0.0, "alive": False,
        "free": 0, "vmark": 0, "tmark": 0, "newid": 0, "orig": 0, "buf_vis": 0,
        "buf_new": 0, "head": -1, "todo": 0, "queued": False,
    }

    @property
    def capacity(self) -> int:
        return len(self.off)

    def grow(self) -> None:
        cap = self.capacity
        # unwrap the work ring so it stays contiguous after resizing
        self.todo = np.roll(self.todo, -int(self.ic[K.QHEAD]))
        self.ic[K.QHEAD] = 0
        need = self.dim * int(self.ic[K.ALIVE]) + 64 + int(self.ic[K.HW]) - int(self.ic[K.FREE])
        new_cap = max(2 * cap, 2 * need)
        for name, fill in self._GROW.items():
            arr = getattr(self, name)
            out = np.full((new_cap,) + arr.shape[1:], fill, dtype=arr.dtype)
            out[:cap] = arr
            setattr(self, name, out)

    def copy(self) -> "HullState":
        out = object.__new__(HullState)
        out.__dict__.update({k: (v.copy() if isinstance(v, np.ndarray) and k != "points" else v)
                             for k, v in self.__dict__.items()})
        return out

    def set_eps(self, eps: float) -> None:
        self.sc[K.EPS] = eps

    def set_points(self, points: np.ndarray) -> None:
        """Swap in a longer point array whose prefix is the current one."""
        self.points = points
        if len(self.nxt) < len(points):
            self.nxt = np.concatenate([self.nxt, np.full(len(points) - len(self.nxt), -1, np.int64)])

    @property
    def eps(self) -> float:
        return float(self.sc[K.EPS])

    @property
    def volume(self) -> float:
        return float(self.sc[K.VOL])

    @property
    def surface(self) -> float:
        return float(self.sc[K.SURF])

    def _args(self):
        return (self.center, self.fv, self.nbr, self.nrm, self.off, self.area, self.alive,
                self.free, self.ic, self.sc, self.vmark, self.tmark, self.newid, self.orig,
                self.buf_vis, self.buf_new, self.head, self.nxt, self.todo, self.queued)

    def file_outside(self, ids: np.ndarray) -> None:
        K.assign_outside(self.points, np.asarray(ids, dtype=np.int64), self.fv, self.nrm,
                         self.off, self.alive, self.ic, self.sc, self.head, self.nxt,
                         self.todo, self.queued)

    def run_bulk(self, inserted: np.ndarray) -> None:
        while True:
            status = K.bulk(self.points, *self._args(), inserted)
            if status == K.DONE:
                return
            if status == K.BROKEN:
                raise HullTopologyError("inconsistent facet adjacency during insertion")
            self.grow()

    def scan(self, start: int, stop: int, level: float, which: int, tol: float,
             lo: np.ndarray, hi: np.ndarray) -> tuple[int, int]:
        """Insert points ``start..stop-1`` in order; see ``_kernel.scan``."""
        while True:
            status, k = K.scan(self.points, start, stop, level, which, tol, lo, hi, *self._args())
            if status == K.NEED_ROOM:
                self.grow()
                start = k
                continue
            if status == K.BROKEN:
                raise HullTopologyError("inconsistent facet adjacency during insertion")
            return status, k

    def to_hull(self) -> ConvexHull:
        live = np.flatnonzero(self.alive[: self.ic[K.HW]])
        fv = self.fv[live]
        used, local = np.unique(fv, return_inverse=True)
        verts = self.points[used]
        return ConvexHull(
            dim=self.dim,
            vertices=verts.copy(),
            facet_vertices=local.reshape(fv.shape),
            normals=self.nrm[live].copy(),
            offsets=self.off[live].copy(),
            interior_point=verts.mean(axis=0),
            input_index=used,
            tol_abs=self.eps,
        )


def _interval_hull(pts: np.ndarray, eps: float) -> ConvexHull:
    lo, hi = int(np.argmin(pts[:, 0])), int(np.argmax(pts[:, 0]))
    if pts[hi, 0] - pts[lo, 0] <= eps:
        raise DegenerateInput(0, 1)
    verts = pts[[lo, hi]]
    return ConvexHull(
        dim=1,
        vertices=verts.copy(),
        facet_vertices=np.array([[0], [1]]),
        normals=np.array([[-1.0], [1.0]]),
        offsets=np.array([-verts[0, 0], verts[1, 0]]),
        interior_point=verts.mean(axis=0),
        input_index=np.array([lo, hi]),
        tol_abs=eps,
    )


def bbox_diagonal(points: np.ndarray) -> float:
    return float(np.linalg.norm(points.max(axis=0) - points.min(axis=0)))


def build_hull(points, tol: float = DEFAULT_TOL) -> ConvexHull:
    """Convex hull of ``points`` (shape ``(m, d)``).

    Raises :class:`DegenerateInput` if the points do not span d dimensions
    within ``tol`` times the bounding-box diagonal.
    """
    pts = np.ascontiguousarray(points, dtype=float)
    if pts.ndim != 2 or len(pts) == 0:
        raise ValueError("points must be a non-empty (m, d) array")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must be finite")
    m, d = pts.shape
    eps = tol * bbox_diagonal(pts)
    if d == 1:
        return _interval_hull(pts, eps)
    if m < d + 1:
        raise DegenerateInput(min(m - 1, d), d)
    start = initial_simplex(pts, eps)
    state = HullState(pts, start, eps)
    inserted = np.zeros(m, dtype=np.bool_)
    inserted[start] = True
    state.file_outside(np.flatnonzero(~inserted))
    state.run_bulk(inserted)
    return state.to_hull()


def hull_volume(hull: ConvexHull) -> float:
    """Sum of pyramid volumes from each facet to the interior point."""
    if hull.dim == 1:
        return float(hull.vertices[1, 0] - hull.vertices[0, 0])
    areas = facet_measures(hull)
    heights = hull.offsets - hull.normals @ hull.interior_point
    return float(np.sum(areas * heights) / hull.dim)


def facet_measures(hull: ConvexHull) -> np.ndarray:
    """(d-1)-measure of each facet, ``sqrt(det G) / (d-1)!`` from edge Gram matrices."""
    d = hull.dim
    if d == 1:
        return np.ones(len(hull.facet_vertices))
    corners = hull.vertices[hull.facet_vertices]
    edges = corners[:, 1:, :] - corners[:, :1, :]
    gram = edges @ edges.transpose(0, 2, 1)
    return np.sqrt(np.clip(np.linalg.det(gram), 0.0, None)) / math.factorial(d - 1)


def hull_surface_area(hull: ConvexHull) -> float:
    return float(np.sum(facet_measures(hull)))
