"""Numba kernels for the beneath-beyond hull.

State lives in plain arrays owned by :class:`HullState`:

fv[f, i]    vertex (point index) i of facet f
nbr[f, i]   facet across the ridge opposite fv[f, i]
nrm, off    unit outward normal and offset; dead slots have off = +inf
head, nxt   per-facet linked list of outside points (bulk mode only)
todo        FIFO ring of facets that may have outside points; ``queued``
            marks slots already in it

Integer scalars live in ``ic`` and float scalars in ``sc``.  Kernels return
``NEED_ROOM`` before starting an insertion that could overflow the facet
arrays, leaving the state consistent so the caller can grow and resume.
"""

import math

import numpy as np
from numba import njit

HW, FREE, STAMP, ALIVE, NTODO, LASTNEW, QHEAD = 0, 1, 2, 3, 4, 5, 6
VOL, SURF, EPS = 0, 1, 2

DONE, NEED_ROOM, CROSSED, BROKEN = 0, 1, 2, 3


@njit(cache=True, nogil=True)
def _dist(nrm, off, f, x):
    s = 0.0
    for k in range(x.shape[0]):
        s += nrm[f, k] * x[k]
    return s - off[f]


@njit(cache=True, nogil=True)
def _plane(pts, fv, f, center, nrm, off, area):
    """Fill normal/offset/area of facet ``f`` by Gram-Schmidt on its edges."""
    d = pts.shape[1]
    q = np.zeros((d, d))
    base = pts[fv[f, 0]]
    prod = 1.0
    for i in range(d - 1):
        v = pts[fv[f, i + 1]] - base
        for _ in range(2):
            for j in range(i):
                c = 0.0
                for k in range(d):
                    c += v[k] * q[j, k]
                for k in range(d):
                    v[k] -= c * q[j, k]
        nv = math.sqrt(np.sum(v * v))
        prod *= nv
        if nv > 0.0:
            q[i] = v / nv
    # normal: start from the coordinate axis least covered by the edge span
    best = 0
    best_r = -1.0
    for k in range(d):
        r = 1.0
        for j in range(d - 1):
            r -= q[j, k] * q[j, k]
        if r > best_r:
            best_r = r
            best = k
    n = np.zeros(d)
    n[best] = 1.0
    for _ in range(2):
        for j in range(d - 1):
            c = 0.0
            for k in range(d):
                c += n[k] * q[j, k]
            for k in range(d):
                n[k] -= c * q[j, k]
    n /= math.sqrt(np.sum(n * n))
    o = 0.0
    side = 0.0
    for k in range(d):
        o += n[k] * base[k]
        side += n[k] * center[k]
    if side - o > 0.0:
        n = -n
        o = -o
    fact = 1.0
    for k in range(2, d):
        fact *= k
    nrm[f] = n
    off[f] = o
    area[f] = prod / fact


@njit(cache=True, nogil=True)
def _alloc(free, ic):
    if ic[FREE] > 0:
        ic[FREE] -= 1
        return free[ic[FREE]]
    f = ic[HW]
    ic[HW] += 1
    return f


@njit(cache=True, nogil=True)
def _pyramid(nrm, off, area, f, center):
    d = center.shape[0]
    h = off[f]
    for k in range(d):
        h -= nrm[f, k] * center[k]
    return area[f] * h / d


@njit(cache=True, nogil=True)
def init_simplex(pts, sid, center, fv, nbr, nrm, off, area, alive, free, ic, sc):
    """Create the d+1 facets of the simplex on points ``sid``; facet k omits sid[k]."""
    d = pts.shape[1]
    for i in range(d + 1):
        f = _alloc(free, ic)
        m = 0
        for k in range(d + 1):
            if k != i:
                fv[f, m] = sid[k]
                nbr[f, m] = k
                m += 1
    for f in range(d + 1):
        alive[f] = True
        _plane(pts, fv, f, center, nrm, off, area)
        sc[VOL] += _pyramid(nrm, off, area, f, center)
        sc[SURF] += area[f]
    ic[ALIVE] = d + 1


@njit(cache=True, nogil=True)
def insert(pts, p, f0, center, fv, nbr, nrm, off, area, alive, free, ic, sc,
           vmark, tmark, newid, orig, buf_vis, buf_new, head, nxt, todo, queued, track):
    """Insert point ``pts[p]``.  ``f0`` is a facet known to see it, or -1 to scan.

    Returns the number of facets created (0 when the point is inside, -1 if
    the facet adjacency turned out inconsistent).
    With ``track`` set, outside points of deleted facets are re-filed
    under the new facets.
    """
    d = pts.shape[1]
    x = pts[p]
    eps = sc[EPS]
    ic[STAMP] += 1
    st = ic[STAMP]
    if f0 < 0:
        best = eps
        for f in range(ic[HW]):
            if alive[f]:
                dd = _dist(nrm, off, f, x)
                if dd > best:
                    best = dd
                    f0 = f
        if f0 < 0:
            return 0

    # visible region by BFS over facet adjacency
    nvis = 1
    buf_vis[0] = f0
    vmark[f0] = st
    at = 0
    while at < nvis:
        f = buf_vis[at]
        at += 1
        for i in range(d):
            g = nbr[f, i]
            if vmark[g] == st or tmark[g] == st:
                continue
            if _dist(nrm, off, g, x) > eps:
                vmark[g] = st
                buf_vis[nvis] = g
                nvis += 1
            else:
                tmark[g] = st

    # cone every horizon ridge to p
    nnew = 0
    for a in range(nvis):
        f = buf_vis[a]
        for i in range(d):
            g = nbr[f, i]
            if vmark[g] == st:
                continue
            h = _alloc(free, ic)
            m = 0
            for k in range(d):
                if k != i:
                    fv[h, m] = fv[f, k]
                    m += 1
            fv[h, d - 1] = p
            nbr[h, d - 1] = g
            for k in range(d):
                if nbr[g, k] == f:
                    nbr[g, k] = h
                    break
            newid[f, i] = h
            orig[h, 0] = f
            orig[h, 1] = i
            alive[h] = True
            head[h] = -1
            _plane(pts, fv, h, center, nrm, off, area)
            buf_new[nnew] = h
            nnew += 1

    # link new facets across ridges through p by pivoting around each (d-2)-face
    for b in range(nnew):
        h = buf_new[b]
        f0_ = orig[h, 0]
        i0 = orig[h, 1]
        for j in range(d - 1):
            u = fv[h, j]
            c = f0_
            e = u
            keep = fv[f0_, i0]
            for _guard in range(nvis + 2):
                se = 0
                for k in range(d):
                    if fv[c, k] == e:
                        se = k
                        break
                g = nbr[c, se]
                if vmark[g] != st:
                    nbr[h, j] = newid[c, se]
                    break
                y = -1
                for k in range(d):
                    v = fv[g, k]
                    found = False
                    for l in range(d):
                        if fv[c, l] == v:
                            found = True
                            break
                    if not found:
                        y = v
                        break
                c = g
                e = keep
                keep = y
            else:
                return -1

    for b in range(nnew):
        h = buf_new[b]
        sc[VOL] += _pyramid(nrm, off, area, h, center)
        sc[SURF] += area[h]

    # re-file outside points of the deleted facets
    if track:
        for a in range(nvis):
            f = buf_vis[a]
            q = head[f]
            while q != -1:
                nq = nxt[q]
                if q != p:
                    bestd = eps
                    besth = -1
                    for b in range(nnew):
                        h = buf_new[b]
                        dd = _dist(nrm, off, h, pts[q])
                        if dd > bestd:
                            bestd = dd
                            besth = h
                    if besth >= 0:
                        _file(besth, q, head, nxt, todo, queued, ic)
                q = nq
            head[f] = -1

    for a in range(nvis):
        f = buf_vis[a]
        sc[VOL] -= _pyramid(nrm, off, area, f, center)
        sc[SURF] -= area[f]
        alive[f] = False
        off[f] = np.inf
        free[ic[FREE]] = f
        ic[FREE] += 1
    ic[ALIVE] += nnew - nvis
    ic[LASTNEW] = nnew
    return nnew


@njit(cache=True, nogil=True)
def _file(f, q, head, nxt, todo, queued, ic):
    nxt[q] = head[f]
    head[f] = q
    if not queued[f]:
        queued[f] = True
        todo[(ic[QHEAD] + ic[NTODO]) % todo.shape[0]] = f
        ic[NTODO] += 1


@njit(cache=True, nogil=True)
def _room(ic, cap, d):
    return cap - ic[HW] + ic[FREE] >= d * ic[ALIVE] + 64


@njit(cache=True, nogil=True)
def assign_outside(pts, ids, fv, nrm, off, alive, ic, sc, head, nxt, todo, queued):
    """File each point of ``ids`` under the live facet it is farthest above."""
    eps = sc[EPS]
    for a in range(ids.shape[0]):
        q = ids[a]
        bestd = eps
        besth = -1
        for f in range(ic[HW]):
            if alive[f]:
                dd = _dist(nrm, off, f, pts[q])
                if dd > bestd:
                    bestd = dd
                    besth = f
        if besth >= 0:
            _file(besth, q, head, nxt, todo, queued, ic)


@njit(cache=True, nogil=True)
def bulk(pts, center, fv, nbr, nrm, off, area, alive, free, ic, sc,
         vmark, tmark, newid, orig, buf_vis, buf_new, head, nxt, todo, queued, inserted):
    """Quickhull-ordered insertion until no facet has outside points."""
    d = pts.shape[1]
    cap = fv.shape[0]
    while True:
        if not _room(ic, cap, d):
            return NEED_ROOM
        f = -1
        while ic[NTODO] > 0:
            g = todo[ic[QHEAD]]
            ic[QHEAD] = (ic[QHEAD] + 1) % todo.shape[0]
            ic[NTODO] -= 1
            queued[g] = False
            if alive[g] and head[g] != -1:
                f = g
                break
        if f < 0:
            return DONE
        q = head[f]
        far = q
        bestd = -np.inf
        while q != -1:
            dd = _dist(nrm, off, f, pts[q])
            if dd > bestd:
                bestd = dd
                far = q
            q = nxt[q]
        inserted[far] = True
        if insert(pts, far, f, center, fv, nbr, nrm, off, area, alive, free, ic, sc,
               vmark, tmark, newid, orig, buf_vis, buf_new, head, nxt, todo, queued,
               True) < 0:
            return BROKEN


@njit(cache=True, nogil=True)
def _seen_by(x, nrm, off, alive, ic, eps, buf_new):
    """Some facet that sees ``x``, or -1 if ``x`` is inside.

    Facets created by the previous insertion are tried first: consecutive
    path points are close, so one of them usually sees the next point.
    """
    for b in range(ic[LASTNEW]):
        f = buf_new[b]
        if alive[f] and _dist(nrm, off, f, x) > eps:
            return f
    for f in range(ic[HW]):
        if alive[f] and _dist(nrm, off, f, x) > eps:
            return f
    return -1


@njit(cache=True, nogil=True)
def scan(pts, start, stop, level, which, tol, lo, hi, center, fv, nbr, nrm, off,
         area, alive, free, ic, sc, vmark, tmark, newid, orig, buf_vis, buf_new,
         head, nxt, todo, queued):
    """Insert ``pts[start:stop]`` in order until volume (which=0) or surface
    (which=1) exceeds ``level``.  Returns (status, next index)."""
    d = pts.shape[1]
    cap = fv.shape[0]
    for k in range(start, stop):
        if not _room(ic, cap, d):
            return NEED_ROOM, k
        for j in range(d):
            if pts[k, j] < lo[j]:
                lo[j] = pts[k, j]
            if pts[k, j] > hi[j]:
                hi[j] = pts[k, j]
        sc[EPS] = tol * math.sqrt(np.sum((hi - lo) ** 2))
        f0 = _seen_by(pts[k], nrm, off, alive, ic, sc[EPS], buf_new)
        if f0 < 0:
            continue
        if insert(pts, k, f0, center, fv, nbr, nrm, off, area, alive, free, ic, sc,
                  vmark, tmark, newid, orig, buf_vis, buf_new, head, nxt, todo, queued,
                  False) < 0:
            return BROKEN, k
        val = sc[VOL] if which == 0 else sc[SURF]
        if val > level:
            return CROSSED, k
    return DONE, stop
