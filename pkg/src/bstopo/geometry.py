"""Planar Delaunay triangulation and circumcircles.

Incremental Bowyer-Watson insertion in Hilbert order with ghost triangles
for the convex hull. All topological decisions go through the exact
predicates in :mod:`bstopo.predicates`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegeneracyError, InsufficientDataError
from .hilbert import hilbert_sort
from .predicates import incircle, orient2d

PERTURB_SCALE_M = 1e-6

_GHOST = -1


def circumcircle(a, b, c) -> tuple[tuple[float, float], float]:
    """Center and radius of the circle through a, b and c."""
    if orient2d(a, b, c) == 0:
        raise DegeneracyError("circumcircle of collinear points")
    ax, ay = float(a[0]), float(a[1])
    bx, by = b[0] - ax, b[1] - ay
    cx, cy = c[0] - ax, c[1] - ay
    d = 2.0 * (bx * cy - by * cx)
    b2 = bx * bx + by * by
    c2 = cx * cx + cy * cy
    ux = (cy * b2 - by * c2) / d
    uy = (bx * c2 - cx * b2) / d
    return (ax + ux, ay + uy), math.hypot(ux, uy)


def circumradii(pts: np.ndarray, tris: np.ndarray) -> np.ndarray:
    """Vectorized circumradius of every triangle row of ``tris``."""
    if len(tris) == 0:
        return np.zeros(0)
    a = pts[tris[:, 0]]
    b = pts[tris[:, 1]] - a
    c = pts[tris[:, 2]] - a
    d = 2.0 * (b[:, 0] * c[:, 1] - b[:, 1] * c[:, 0])
    b2 = (b ** 2).sum(axis=1)
    c2 = (c ** 2).sum(axis=1)
    ux = (c[:, 1] * b2 - b[:, 1] * c2) / d
    uy = (b[:, 0] * c2 - c[:, 0] * b2) / d
    return np.hypot(ux, uy)


@dataclass(frozen=True)
class Triangulation:
    """Immutable Delaunay triangulation.

    ``edge_triangles[e]`` lists the (one or two) triangle indices incident
    to ``edges[e]``. Triangles are counter-clockwise, edges have ``i < j``.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    edges: np.ndarray
    edge_triangles: tuple
    perturbed: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def edge_index(self) -> dict:
        return {(int(i), int(j)): k for k, (i, j) in enumerate(self.edges.tolist())}

    def dump(self, edge_path: str | Path, tri_path: str | Path) -> None:
        Path(edge_path).write_text(
            "i,j\n" + "".join(f"{i},{j}\n" for i, j in self.edges.tolist())
        )
        Path(tri_path).write_text(
            "i,j,k\n" + "".join(f"{i},{j},{k}\n" for i, j, k in self.triangles.tolist())
        )


class _Builder:
    """Mutable triangle soup keyed by directed edges."""

    def __init__(self, pts: list):
        self.p = pts
        self.tri: dict[int, tuple] = {}
        self.edge: dict[tuple, int] = {}
        self.next_id = 0
        self.last = 0

    def add(self, a, b, c) -> int:
        t = self.next_id
        self.next_id += 1
        self.tri[t] = (a, b, c)
        e = self.edge
        e[(a, b)] = t
        e[(b, c)] = t
        e[(c, a)] = t
        return t

    def remove(self, t) -> None:
        a, b, c = self.tri.pop(t)
        e = self.edge
        del e[(a, b)], e[(b, c)], e[(c, a)]

    def conflict(self, t, q) -> bool:
        a, b, c = self.tri[t]
        P = self.p
        if c == _GHOST:
            # ghost (a, b, ghost): the real side lies to the right of a->b
            o = orient2d(P[a], P[b], q)
            if o != 0:
                return o > 0
            return _strictly_between(P[a], P[b], q)
        return incircle(P[a], P[b], P[c], q) > 0

    def locate(self, q) -> int:
        P, tri, edge = self.p, self.tri, self.edge
        t = self.last if self.last in tri else next(iter(tri))
        for _ in range(4 * len(tri) + 10):
            a, b, c = tri[t]
            if c == _GHOST:
                if self.conflict(t, q):
                    return t
                t = edge[(b, a)]
                continue
            if orient2d(P[a], P[b], q) < 0:
                t = edge[(b, a)]
            elif orient2d(P[b], P[c], q) < 0:
                t = edge[(c, b)]
            elif orient2d(P[c], P[a], q) < 0:
                t = edge[(a, c)]
            else:
                return t
        raise RuntimeError("point location did not terminate")

    def insert(self, v: int) -> None:
        q = self.p[v]
        t0 = self.locate(q)
        if not self.conflict(t0, q):
            raise DegeneracyError(f"duplicate point {q}")
        tri, edge = self.tri, self.edge
        state = {t0: True}
        stack = [t0]
        while stack:
            a, b, c = tri[stack.pop()]
            for u, w in ((a, b), (b, c), (c, a)):
                n = edge[(w, u)]
                if n not in state:
                    hit = self.conflict(n, q)
                    state[n] = hit
                    if hit:
                        stack.append(n)
        cavity = [t for t, hit in state.items() if hit]
        boundary = []
        for t in cavity:
            a, b, c = tri[t]
            for u, w in ((a, b), (b, c), (c, a)):
                if not state.get(edge[(w, u)], False):
                    boundary.append((u, w))
        for t in cavity:
            self.remove(t)
        for u, w in boundary:
            if u == _GHOST:
                self.add(w, v, _GHOST)
            elif w == _GHOST:
                self.add(v, u, _GHOST)
            else:
                self.last = self.add(u, w, v)


def _strictly_between(a, b, q) -> bool:
    # q collinear with a, b
    if a[0] != b[0]:
        return min(a[0], b[0]) < q[0] < max(a[0], b[0])
    return min(a[1], b[1]) < q[1] < max(a[1], b[1])


def perturb(points: np.ndarray, seed: int = 0, scale: float = PERTURB_SCALE_M) -> np.ndarray:
    """Deterministic jitter of every coordinate, uniform in [-scale, scale]."""
    rng = np.random.default_rng(seed)
    return points + rng.uniform(-scale, scale, size=points.shape)


def _build(pts: np.ndarray) -> list:
    n = len(pts)
    order = hilbert_sort(pts).tolist()
    P = [tuple(p) for p in pts.tolist()]
    if len(set(P)) != n:
        raise DegeneracyError("duplicate points")
    a, b = order[0], order[1]
    third = None
    for k in range(2, n):
        o = orient2d(P[a], P[b], P[order[k]])
        if o != 0:
            third = k
            break
    if third is None:
        raise DegeneracyError("all points are collinear")
    c = order[third]
    if orient2d(P[a], P[b], P[c]) < 0:
        a, b = b, a
    bld = _Builder(P)
    bld.last = bld.add(a, b, c)
    bld.add(b, a, _GHOST)
    bld.add(c, b, _GHOST)
    bld.add(a, c, _GHOST)
    for k in order[2:third] + order[third + 1:]:
        bld.insert(k)
    return [t for t in bld.tri.values() if _GHOST not in t]


def _has_cocircular(P: list, tris: list) -> bool:
    edge = {}
    for t in tris:
        a, b, c = t
        edge[(a, b)] = c
        edge[(b, c)] = a
        edge[(c, a)] = b
    for (u, w), c in edge.items():
        if u < w and (w, u) in edge:
            if incircle(P[u], P[w], P[c], P[edge[(w, u)]]) == 0:
                return True
    return False


def delaunay(points, perturbation: str | bool = "auto", seed: int = 0) -> Triangulation:
    """Delaunay triangulation of a point set.

    Parameters
    ----------
    points : PointSet or array_like, shape (n, 2)
    perturbation : {"auto", True, False}
        ``"auto"`` jitters coordinates by at most 1e-6 only when the exact
        input has duplicates, is collinear or contains cocircular
        quadruples; ``True`` always jitters.
    seed : int
        Seed for the jitter.
    """
    pts = np.asarray(getattr(points, "points", points), dtype=float)
    if pts.ndim != 2 or len(pts) < 3:
        raise InsufficientDataError(f"need at least 3 points, got {len(pts)}")

    perturbed = perturbation is True
    work = perturb(pts, seed) if perturbed else pts
    tris = None
    try:
        tris = _build(work)
    except DegeneracyError:
        if perturbation != "auto":
            raise
    if perturbation == "auto" and (tris is None or _has_cocircular([tuple(p) for p in work.tolist()], tris)):
        perturbed = True
        work = perturb(pts, seed)
        tris = _build(work)
    return _finalize(work, tris, perturbed, seed)


def _finalize(pts: np.ndarray, tris: list, perturbed: bool, seed: int) -> Triangulation:
    canon = []
    for a, b, c in tris:
        m = min(a, b, c)
        while a != m:
            a, b, c = b, c, a
        canon.append((a, b, c))
    canon.sort()
    edge_tris: dict[tuple, list] = {}
    for t, (a, b, c) in enumerate(canon):
        for u, w in ((a, b), (b, c), (c, a)):
            edge_tris.setdefault((min(u, w), max(u, w)), []).append(t)
    keys = sorted(edge_tris)
    return Triangulation(
        vertices=pts.copy(),
        triangles=np.array(canon, dtype=np.int64).reshape(-1, 3),
        edges=np.array(keys, dtype=np.int64).reshape(-1, 2),
        edge_triangles=tuple(tuple(edge_tris[k]) for k in keys),
        perturbed=perturbed,
        meta={"perturbation_seed": seed, "perturbation_scale_m": PERTURB_SCALE_M} if perturbed else {},
    )
