"""Independent brute-force oracles shared by the test modules."""

from fractions import Fraction
from itertools import combinations

import numpy as np


def exact_incircle(a, b, c, d):
    """Sign of the in-circle determinant in rational arithmetic (no filter)."""
    m = []
    for p in (a, b, c):
        x = Fraction(p[0]) - Fraction(d[0])
        y = Fraction(p[1]) - Fraction(d[1])
        m.append((x, y, x * x + y * y))
    det = (
        m[0][0] * (m[1][1] * m[2][2] - m[2][1] * m[1][2])
        - m[0][1] * (m[1][0] * m[2][2] - m[2][0] * m[1][2])
        + m[0][2] * (m[1][0] * m[2][1] - m[2][0] * m[1][1])
    )
    return (det > 0) - (det < 0)


def empty_circumcircle_violations(pts, tris):
    """Triangles whose circumcircle strictly contains another vertex (O(n*T))."""
    pts = np.asarray(pts, dtype=float)
    bad = []
    for t in tris:
        a, b, c = (pts[i] for i in t)
        ax, ay = a
        bx, by = b[0] - ax, b[1] - ay
        cx, cy = c[0] - ax, c[1] - ay
        d = 2.0 * (bx * cy - by * cx)
        ux = (cy * (bx * bx + by * by) - by * (cx * cx + cy * cy)) / d
        uy = (bx * (cx * cx + cy * cy) - cx * (bx * bx + by * by)) / d
        r2 = ux * ux + uy * uy
        dist2 = (pts[:, 0] - ax - ux) ** 2 + (pts[:, 1] - ay - uy) ** 2
        mask = np.ones(len(pts), dtype=bool)
        mask[list(t)] = False
        close = np.flatnonzero(mask & (dist2 < r2 * (1 + 1e-9)))
        for k in close:
            # confirm with exact arithmetic before reporting
            if exact_incircle(tuple(a), tuple(b), tuple(c), tuple(pts[k])) * _sign(d) > 0:
                bad.append((tuple(t), int(k)))
    return bad


def _sign(x):
    return int(x > 0) - int(x < 0)


def naive_dedup(xy, tol):
    keep = []
    for i, p in enumerate(xy):
        if all(np.hypot(*(p - xy[j])) > tol for j in keep):
            keep.append(i)
    return keep


def smallest_empty_circle_alpha(pts, i, j, others):
    """Alpha of edge (i, j) by definition: half length if the diametral circle
    holds no point strictly inside, else the smallest circumradius of a
    triangle (i, j, k) over the given candidate apexes."""
    pts = np.asarray(pts, dtype=float)
    mid = 0.5 * (pts[i] + pts[j])
    r = 0.5 * np.hypot(*(pts[j] - pts[i]))
    inside = [k for k in others if np.hypot(*(pts[k] - mid)) < r * (1 - 1e-12)]
    if not inside:
        return r
    radii = []
    for k in others:
        a, b, c = pts[i], pts[j], pts[k]
        la, lb, lc = np.hypot(*(b - c)), np.hypot(*(a - c)), np.hypot(*(a - b))
        area = abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])) / 2
        radii.append(la * lb * lc / (4 * area))
    return min(radii)


def brute_delaunay_edges(pts):
    """All Delaunay triangles by enumerating every triple (O(n^4))."""
    pts = np.asarray(pts, dtype=float)
    n = len(pts)
    tris = []
    for t in combinations(range(n), 3):
        a, b, c = pts[list(t)]
        if (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]) == 0:
            continue
        if not empty_circumcircle_violations(pts, [t]):
            tris.append(t)
    edges = set()
    for a, b, c in tris:
        edges |= {tuple(sorted(e)) for e in ((a, b), (b, c), (a, c))}
    return sorted(edges)


def fgn_davies_harte(H, n, rng):
    """Fractional Gaussian noise by circulant embedding of its autocovariance."""
    k = np.arange(n + 1, dtype=float)
    g = 0.5 * (np.abs(k - 1) ** (2 * H) - 2 * k ** (2 * H) + (k + 1) ** (2 * H))
    c = np.r_[g, g[-2:0:-1]]
    lam = np.fft.fft(c).real
    m = len(c)
    w = rng.normal(size=m) + 1j * rng.normal(size=m)
    z = np.fft.fft(np.sqrt(np.maximum(lam, 0) / m) * w)
    return z.real[:n]


def box_counting_dimension(points, region, levels):
    """Slope of log(occupied boxes) against log(1/box size) on base-m grids.

    ``levels`` is a list of grid resolutions (boxes per side).
    """
    x0, y0, x1, y1 = region
    pts = np.asarray(points, dtype=float)
    u = (pts - [x0, y0]) / [x1 - x0, y1 - y0]
    counts = []
    for k in levels:
        ij = np.clip(np.floor(u * k).astype(int), 0, k - 1)
        counts.append(len({(int(a), int(b)) for a, b in ij}))
    return float(np.polyfit(np.log(levels), np.log(counts), 1)[0])
