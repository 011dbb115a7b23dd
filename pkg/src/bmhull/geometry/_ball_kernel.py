"""Numba move-to-front recursion for the minimum enclosing ball."""

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _circum(pts, sup, ns, center):
    """Circumcenter of ``pts[sup[:ns]]`` within their affine hull; returns r^2."""
    d = pts.shape[1]
    base = pts[sup[0]]
    for k in range(d):
        center[k] = base[k]
    if ns == 1:
        return 0.0
    k = ns - 1
    a = np.empty((k, d))
    for i in range(k):
        for j in range(d):
            a[i, j] = pts[sup[i + 1], j] - base[j]
    g = a @ a.T
    rhs = np.empty(k)
    scale = 0.0
    for i in range(k):
        rhs[i] = 0.5 * g[i, i]
        scale = max(scale, g[i, i])
    # Gaussian elimination with partial pivoting; near-zero pivots drop
    # their variable (affinely dependent support)
    lam = np.zeros(k)
    piv = np.arange(k)
    m = g.copy()
    b = rhs.copy()
    usable = np.ones(k, dtype=np.bool_)
    for c in range(k):
        p = c
        for r in range(c + 1, k):
            if abs(m[r, c]) > abs(m[p, c]):
                p = r
        if abs(m[p, c]) <= 1e-14 * scale:
            usable[c] = False
            continue
        if p != c:
            for t in range(k):
                m[c, t], m[p, t] = m[p, t], m[c, t]
            b[c], b[p] = b[p], b[c]
            piv[c], piv[p] = piv[p], piv[c]
        for r in range(c + 1, k):
            f = m[r, c] / m[c, c]
            for t in range(c, k):
                m[r, t] -= f * m[c, t]
            b[r] -= f * b[c]
    for c in range(k - 1, -1, -1):
        if not usable[c]:
            continue
        s = b[c]
        for t in range(c + 1, k):
            s -= m[c, t] * lam[t]
        lam[c] = s / m[c, c]
    for i in range(k):
        for j in range(d):
            center[j] += lam[i] * a[i, j]
    r2 = 0.0
    for i in range(ns):
        s = 0.0
        for j in range(d):
            t = pts[sup[i], j] - center[j]
            s += t * t
        r2 = max(r2, s)
    return r2


@njit(cache=True, nogil=True)
def _dist2(x, c):
    s = 0.0
    for j in range(x.shape[0]):
        t = x[j] - c[j]
        s += t * t
    return s


@njit(cache=True, nogil=True)
def mtf(pts, order, end, slack):
    """Welzl's move-to-front recursion on ``order[:end]``, unrolled onto an
    explicit stack.  Level L has ``sup[:L]`` forced onto the boundary.
    Returns (center, r^2, support)."""
    d = pts.shape[1]
    cen = np.zeros((d + 2, d))
    r2 = np.full(d + 2, -1.0)
    pos = np.zeros(d + 2, dtype=np.int64)
    stop = np.zeros(d + 2, dtype=np.int64)
    sup = np.zeros(d + 1, dtype=np.int64)
    best = np.zeros((d + 2, d + 1), dtype=np.int64)
    nbest = np.zeros(d + 2, dtype=np.int64)
    stop[0] = end
    level = 0
    while True:
        if level == d + 1 or pos[level] >= stop[level]:
            if level == 0:
                return cen[0].copy(), r2[0], best[0, : nbest[0]].copy()
            up = level - 1
            cen[up] = cen[level]
            r2[up] = r2[level]
            best[up] = best[level]
            nbest[up] = nbest[level]
            i = pos[up]
            j = order[i]
            for t in range(i, 0, -1):
                order[t] = order[t - 1]
            order[0] = j
            pos[up] = i + 1
            level = up
            continue
        j = order[pos[level]]
        if r2[level] < 0.0 or _dist2(pts[j], cen[level]) > r2[level] * slack:
            sup[level] = j
            down = level + 1
            r2[down] = _circum(pts, sup, down, cen[down])
            best[down, :down] = sup[:down]
            nbest[down] = down
            stop[down] = pos[level]
            pos[down] = 0
            level = down
        else:
            pos[level] += 1


@njit(cache=True, nogil=True)
def enclose(pts, seed, slack):
    """Minimum ball of ``pts`` by core-set iteration starting from ``seed``:
    solve on the core, add the worst violators, repeat."""
    m, d = pts.shape
    order = np.empty(m, dtype=np.int64)
    inside = np.zeros(m, dtype=np.bool_)
    n = 0
    for i in seed:
        if not inside[i]:
            inside[i] = True
            order[n] = i
            n += 1
    dist = np.empty(m)
    while True:
        center, r2, best = mtf(pts, order, n, slack)
        bad = 0
        for i in range(m):
            dist[i] = _dist2(pts[i], center)
            if dist[i] > r2 * slack + 1e-300 and not inside[i]:
                bad += 1
        if bad == 0:
            return center, r2, best
        # prepend up to d+1 worst violators
        take = min(bad, d + 1)
        picks = np.empty(take, dtype=np.int64)
        for t in range(take):
            w = -1
            wd = -1.0
            for i in range(m):
                if not inside[i] and dist[i] > r2 * slack and dist[i] > wd:
                    wd = dist[i]
                    w = i
            picks[t] = w
            inside[w] = True
        for t in range(n - 1, -1, -1):
            order[t + take] = order[t]
        for t in range(take):
            order[t] = picks[t]
        n += take


@njit(cache=True, nogil=True)
def sorted_diameter(pts, s, best2):
    """Max pairwise squared distance of ``pts``, at least ``best2``, given
    their distances ``s`` (sorted descending) from a common center;
    ``|p_i - p_j| <= s_i + s_j`` prunes."""
    m, d = pts.shape
    best = math.sqrt(best2)
    for i in range(m):
        if 2.0 * s[i] <= best:
            break
        for j in range(i + 1, m):
            if s[i] + s[j] <= best:
                break
            t = 0.0
            for k in range(d):
                u = pts[i, k] - pts[j, k]
                t += u * u
            if t > best2:
                best2 = t
                best = math.sqrt(t)
    return best2
