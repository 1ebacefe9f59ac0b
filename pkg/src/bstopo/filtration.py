"""Alpha-complex filtration on top of a Delaunay triangulation.

Alpha is a length (circumradius), not radius squared. Square the values
before comparing with tools that use the squared convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import Triangulation, circumradii

ALPHA_CONVENTION = "radius"


@dataclass(frozen=True)
class Filtration:
    """Simplices of a Delaunay triangulation with their alpha entry values.

    The event order (``order``) sorts all simplices by entry value, then
    dimension, then sorted vertex indices. Each event is ``(dim, index)``
    into the per-dimension arrays.
    """

    n_vertices: int
    edges: np.ndarray
    edge_alpha: np.ndarray
    triangles: np.ndarray
    tri_alpha: np.ndarray
    event_dim: np.ndarray
    event_index: np.ndarray
    event_alpha: np.ndarray
    gabriel: np.ndarray

    def events(self):
        """Iterate ``(alpha, dim, vertex_tuple)`` in filtration order."""
        for a, d, k in zip(self.event_alpha.tolist(), self.event_dim.tolist(), self.event_index.tolist()):
            yield a, d, self.simplex(d, k)

    def simplex(self, dim: int, index: int) -> tuple:
        if dim == 0:
            return (index,)
        if dim == 1:
            return tuple(int(v) for v in self.edges[index])
        return tuple(int(v) for v in self.triangles[index])

    def to_csv(self) -> str:
        lines = [f"# alpha_convention={ALPHA_CONVENTION}", "dim,v0,v1,v2,alpha_entry"]
        for a, d, s in self.events():
            cells = [str(v) for v in s] + [""] * (3 - len(s))
            lines.append(f"{d},{','.join(cells)},{a!r}")
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv())


def _gabriel(pts: np.ndarray, tri: Triangulation) -> np.ndarray:
    """True for edges whose diametral circle holds no opposite vertex strictly inside.

    Inside a Delaunay triangulation only the apexes of the incident triangles
    can violate the test.
    """
    gab = np.ones(len(tri.edges), dtype=bool)
    tris = tri.triangles
    for e, (i, j) in enumerate(tri.edges.tolist()):
        pi, pj = pts[i], pts[j]
        for t in tri.edge_triangles[e]:
            k = next(v for v in tris[t].tolist() if v != i and v != j)
            pk = pts[k]
            if np.dot(pi - pk, pj - pk) < 0:
                gab[e] = False
                break
    return gab


def build_filtration(tri: Triangulation) -> Filtration:
    pts = tri.vertices
    V = tri.n_vertices
    edges, tris = tri.edges, tri.triangles

    radius = circumradii(pts, tris)
    half_len = 0.5 * np.hypot(*(pts[edges[:, 1]] - pts[edges[:, 0]]).T) if len(edges) else np.zeros(0)
    gab = _gabriel(pts, tri)
    edge_alpha = half_len.copy()
    for e in np.flatnonzero(~gab).tolist():
        edge_alpha[e] = min(radius[t] for t in tri.edge_triangles[e])

    # circumradius and half-length of a cocircular chord may disagree in the
    # last ulp; never let a triangle precede its own edges
    if len(tris):
        eidx = tri.edge_index()
        face_max = np.empty(len(tris))
        for t, (a, b, c) in enumerate(tris.tolist()):
            face_max[t] = max(
                edge_alpha[eidx[(min(a, b), max(a, b))]],
                edge_alpha[eidx[(min(b, c), max(b, c))]],
                edge_alpha[eidx[(min(c, a), max(c, a))]],
            )
        tri_alpha = np.maximum(radius, face_max)
    else:
        tri_alpha = radius

    E, T = len(edges), len(tris)
    dim = np.concatenate([np.zeros(V, np.int64), np.ones(E, np.int64), np.full(T, 2, np.int64)])
    idx = np.concatenate([np.arange(V), np.arange(E), np.arange(T)]).astype(np.int64)
    alpha = np.concatenate([np.zeros(V), edge_alpha, tri_alpha])
    sorted_tris = np.sort(tris, axis=1) if T else np.zeros((0, 3), np.int64)
    v0 = np.concatenate([np.arange(V), edges[:, 0], sorted_tris[:, 0]])
    v1 = np.concatenate([np.full(V, -1), edges[:, 1], sorted_tris[:, 1]])
    v2 = np.concatenate([np.full(V, -1), np.full(E, -1), sorted_tris[:, 2]])
    order = np.lexsort((v2, v1, v0, dim, alpha))

    return Filtration(
        n_vertices=V,
        edges=edges,
        edge_alpha=edge_alpha,
        triangles=tris,
        tri_alpha=tri_alpha,
        event_dim=dim[order],
        event_index=idx[order],
        event_alpha=alpha[order],
        gabriel=gab,
    )


def complex_at(f: Filtration, alpha: float) -> tuple[int, int, int]:
    """Counts (V, E, F) of simplices with entry value <= alpha."""
    return (
        f.n_vertices,
        int(np.count_nonzero(f.edge_alpha <= alpha)),
        int(np.count_nonzero(f.tri_alpha <= alpha)),
    )


def simplices_at(f: Filtration, alpha: float):
    """Vertex count, edge list and triangle list of the complex at ``alpha``."""
    edges = [tuple(e) for e in f.edges[f.edge_alpha <= alpha].tolist()]
    tris = [tuple(t) for t in f.triangles[f.tri_alpha <= alpha].tolist()]
    return f.n_vertices, edges, tris
