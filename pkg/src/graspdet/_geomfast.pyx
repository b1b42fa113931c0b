# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled convex quad intersection kernel.

Twin of `_geompure`; same algorithm and operation order, C doubles
throughout. Selected at import by `graspdet.geometry` when available.
"""

BACKEND = "cython"

DEF SLIVER_AREA = 1e-12


cdef double _shoelace(double* xs, double* ys, int n) nogil:
    cdef double acc = 0.0
    cdef int i, j
    for i in range(n):
        j = (i + 1) % n
        acc += xs[i] * ys[j] - xs[j] * ys[i]
    return 0.5 * acc


def quad_intersection_area(a, b):
    """Area of the intersection of two convex quads given as flat
    (x0,y0,...,x3,y3) corner sequences."""
    cdef double ax[4]
    cdef double ay[4]
    cdef double bx[4]
    cdef double by[4]
    cdef int i
    for i in range(4):
        ax[i] = a[2 * i]
        ay[i] = a[2 * i + 1]
        bx[i] = b[2 * i]
        by[i] = b[2 * i + 1]
    return _intersection_area(ax, ay, bx, by)


cdef double _intersection_area(double* ax, double* ay,
                               double* bx, double* by) nogil:
    cdef double in_x[16]
    cdef double in_y[16]
    cdef double out_x[16]
    cdef double out_y[16]
    cdef double t
    cdef int i, k, n, m
    cdef double cx1, cy1, cx2, cy2, ex, ey, sx, sy, px, py, denom, area
    cdef bint s_in, p_in

    if _shoelace(ax, ay, 4) < 0.0:
        t = ax[0]; ax[0] = ax[3]; ax[3] = t
        t = ax[1]; ax[1] = ax[2]; ax[2] = t
        t = ay[0]; ay[0] = ay[3]; ay[3] = t
        t = ay[1]; ay[1] = ay[2]; ay[2] = t
    if _shoelace(bx, by, 4) < 0.0:
        t = bx[0]; bx[0] = bx[3]; bx[3] = t
        t = bx[1]; bx[1] = bx[2]; bx[2] = t
        t = by[0]; by[0] = by[3]; by[3] = t
        t = by[1]; by[1] = by[2]; by[2] = t

    n = 4
    for i in range(4):
        out_x[i] = ax[i]
        out_y[i] = ay[i]

    for k in range(4):
        cx1 = bx[k]; cy1 = by[k]
        cx2 = bx[(k + 1) % 4]; cy2 = by[(k + 1) % 4]
        ex = cx2 - cx1; ey = cy2 - cy1
        for i in range(n):
            in_x[i] = out_x[i]
            in_y[i] = out_y[i]
        m = n
        n = 0
        if m == 0:
            return 0.0
        sx = in_x[m - 1]; sy = in_y[m - 1]
        s_in = ex * (sy - cy1) - ey * (sx - cx1) >= 0.0
        for i in range(m):
            px = in_x[i]; py = in_y[i]
            p_in = ex * (py - cy1) - ey * (px - cx1) >= 0.0
            if p_in != s_in:
                denom = ex * (py - sy) - ey * (px - sx)
                t = (ex * (cy1 - sy) - ey * (cx1 - sx)) / denom
                out_x[n] = sx + t * (px - sx)
                out_y[n] = sy + t * (py - sy)
                n += 1
            if p_in:
                out_x[n] = px
                out_y[n] = py
                n += 1
            sx = px; sy = py; s_in = p_in

    if n < 3:
        return 0.0
    area = _shoelace(out_x, out_y, n)
    if area < 0.0:
        area = -area
    return 0.0 if area < SLIVER_AREA else area
