"""Orientation and in-circle predicates with exact fallback.

Each predicate first evaluates the determinant in double precision and
accepts the sign when it exceeds a forward error bound (Shewchuk's stage-A
bounds). Otherwise the determinant is recomputed exactly with rationals;
every finite double is an exact rational, so the fallback sign is exact.
"""

from fractions import Fraction

_EPS = 2.0 ** -53
_CCW_BOUND = (3.0 + 16.0 * _EPS) * _EPS
_ICC_BOUND = (10.0 + 96.0 * _EPS) * _EPS

INSIDE, ON, OUTSIDE = "inside", "on", "outside"


def orient2d(a, b, c) -> int:
    """Sign of the signed area of (a, b, c): +1 counter-clockwise, -1 clockwise, 0 collinear."""
    ax, ay = a
    bx, by = b
    cx, cy = c
    left = (ax - cx) * (by - cy)
    right = (ay - cy) * (bx - cx)
    det = left - right
    bound = _CCW_BOUND * (abs(left) + abs(right))
    if det > bound:
        return 1
    if det < -bound:
        return -1
    return orient2d_exact(a, b, c)


def orient2d_exact(a, b, c) -> int:
    ax, ay = map(Fraction, a)
    bx, by = map(Fraction, b)
    cx, cy = map(Fraction, c)
    det = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx)
    return (det > 0) - (det < 0)


def incircle(a, b, c, d) -> int:
    """+1 if d is inside the circle through counter-clockwise a, b, c; -1 outside; 0 on it."""
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]

    bdxcdy, cdxbdy = bdx * cdy, cdx * bdy
    alift = adx * adx + ady * ady
    cdxady, adxcdy = cdx * ady, adx * cdy
    blift = bdx * bdx + bdy * bdy
    adxbdy, bdxady = adx * bdy, bdx * ady
    clift = cdx * cdx + cdy * cdy

    det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady)
    permanent = (
        (abs(bdxcdy) + abs(cdxbdy)) * alift
        + (abs(cdxady) + abs(adxcdy)) * blift
        + (abs(adxbdy) + abs(bdxady)) * clift
    )
    bound = _ICC_BOUND * permanent
    if det > bound:
        return 1
    if det < -bound:
        return -1
    return incircle_exact(a, b, c, d)


def incircle_exact(a, b, c, d) -> int:
    dx, dy = Fraction(d[0]), Fraction(d[1])
    rows = []
    for p in (a, b, c):
        px, py = Fraction(p[0]) - dx, Fraction(p[1]) - dy
        rows.append((px, py, px * px + py * py))
    (ax, ay, al), (bx, by, bl), (cx, cy, cl) = rows
    det = al * (bx * cy - cx * by) + bl * (cx * ay - ax * cy) + cl * (ax * by - bx * ay)
    return (det > 0) - (det < 0)


def in_circle(a, b, c, d) -> str:
    """Classify d against the circumcircle of counter-clockwise (a, b, c)."""
    s = incircle(a, b, c, d)
    return INSIDE if s > 0 else OUTSIDE if s < 0 else ON
