"""Numba loops for exact grid passage of the diameter."""

from numba import njit


@njit(cache=True, nogil=True)
def diameter_scan(pts, start, stop, level_sq, lo, hi):
    """First k in [start, stop) whose distance to some earlier point exceeds
    the level, or -1.  ``lo``/``hi`` hold the bounding box of ``pts[:start]``
    and are updated in place."""
    d = pts.shape[1]
    for k in range(start, stop):
        # farthest corner of the box bounds the distance to every earlier point
        far = 0.0
        for j in range(d):
            a = pts[k, j] - lo[j]
            b = hi[j] - pts[k, j]
            far += max(a * a, b * b)
        if far > level_sq:
            for i in range(k):
                s = 0.0
                for j in range(d):
                    t = pts[k, j] - pts[i, j]
                    s += t * t
                if s > level_sq:
                    return k
        for j in range(d):
            lo[j] = min(lo[j], pts[k, j])
            hi[j] = max(hi[j], pts[k, j])
    return -1
