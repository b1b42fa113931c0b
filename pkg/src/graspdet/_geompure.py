"""Pure-Python convex quad intersection kernel.

Fallback twin of the compiled `_geomfast` extension; both expose
`quad_intersection_area(a, b)` over flat (x0,y0,...,x3,y3) corner arrays
and must produce identical results.
"""

BACKEND = "pure"

_SLIVER_AREA = 1e-12  # intersection slivers below this are treated as empty


def _shoelace(xs, ys):
    n = len(xs)
    acc = 0.0
    for i in range(n):
        j = (i + 1) % n
        acc += xs[i] * ys[j] - xs[j] * ys[i]
    return 0.5 * acc


def quad_intersection_area(a, b):
    """Area of the intersection of two convex quads.

    Clips quad `a` against each half-plane of quad `b`
    (Sutherland-Hodgman); both quads are re-oriented counter-clockwise
    first so the inside test has a fixed sign.
    """
    ax = [a[0], a[2], a[4], a[6]]
    ay = [a[1], a[3], a[5], a[7]]
    bx = [b[0], b[2], b[4], b[6]]
    by = [b[1], b[3], b[5], b[7]]
    if _shoelace(ax, ay) < 0.0:
        ax.reverse()
        ay.reverse()
    if _shoelace(bx, by) < 0.0:
        bx.reverse()
        by.reverse()

    out_x = ax
    out_y = ay
    for k in range(4):
        cx1, cy1 = bx[k], by[k]
        cx2, cy2 = bx[(k + 1) % 4], by[(k + 1) % 4]
        ex, ey = cx2 - cx1, cy2 - cy1
        in_x, in_y = out_x, out_y
        out_x, out_y = [], []
        n = len(in_x)
        if n == 0:
            return 0.0
        sx, sy = in_x[-1], in_y[-1]
        s_in = ex * (sy - cy1) - ey * (sx - cx1) >= 0.0
        for i in range(n):
            px, py = in_x[i], in_y[i]
            p_in = ex * (py - cy1) - ey * (px - cx1) >= 0.0
            if p_in != s_in:
                # edge crosses the clip line; append the crossing point
                denom = ex * (py - sy) - ey * (px - sx)
                t = (ex * (cy1 - sy) - ey * (cx1 - sx)) / denom
                out_x.append(sx + t * (px - sx))
                out_y.append(sy + t * (py - sy))
            if p_in:
                out_x.append(px)
                out_y.append(py)
            sx, sy, s_in = px, py, p_in

    if len(out_x) < 3:
        return 0.0
    area = abs(_shoelace(out_x, out_y))
    return 0.0 if area < _SLIVER_AREA else area
