"""Betti and Euler-characteristic curves of an alpha filtration.

beta0 comes from union-find over edge insertions. For a planar 2-complex
beta2 = 0, so beta1 follows from the Euler-Poincare identity; the running
count V - E + F is kept separately and checked against beta0 - beta1 at
every event.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import InvariantError, OracleSizeError
from .filtration import ALPHA_CONVENTION, Filtration


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n
        self.components = n

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        """Merge the sets of a and b; False if they were already one set."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        self.components -= 1
        return True


@dataclass(frozen=True)
class BettiCurve:
    """Right-continuous step curve of (beta0, beta1, chi) against alpha.

    Row 0 is the state after all vertices are in (alpha = 0). In an event
    curve every later row follows one edge or triangle insertion; a
    resampled curve instead holds one row per grid point.
    """

    alpha: np.ndarray
    beta0: np.ndarray
    beta1: np.ndarray
    chi: np.ndarray
    n_vertices: int
    resampled: bool = False

    def __len__(self) -> int:
        return len(self.alpha)

    @property
    def events(self) -> list:
        return list(zip(self.alpha.tolist(), self.beta0.tolist(), self.beta1.tolist(), self.chi.tolist()))

    def state_at(self, alpha: float) -> tuple[int, int, int]:
        if self.resampled:
            raise ValueError("state_at needs an event curve")
        i = int(np.searchsorted(self.alpha, alpha, side="right")) - 1
        if i < 0:
            return self.n_vertices, 0, self.n_vertices
        return int(self.beta0[i]), int(self.beta1[i]), int(self.chi[i])

    def to_csv(self) -> str:
        kind = "resampled" if self.resampled else "events"
        lines = [f"# rows={kind} alpha_convention={ALPHA_CONVENTION}", "alpha,beta0,beta1,chi"]
        for a, b0, b1, c in self.events:
            lines.append(f"{a!r},{b0},{b1},{c}")
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv())


def betti_curve(f: Filtration) -> BettiCurve:
    V = f.n_vertices
    n_ev = len(f.event_dim) - V
    alpha = np.zeros(n_ev + 1)
    b0s = np.empty(n_ev + 1, np.int64)
    b1s = np.empty(n_ev + 1, np.int64)
    chis = np.empty(n_ev + 1, np.int64)

    uf = UnionFind(V)
    edges = f.edges.tolist()
    b0, b1 = 0, 0
    nv = ne = nf = 0
    row = 0
    for a, d, k in zip(f.event_alpha.tolist(), f.event_dim.tolist(), f.event_index.tolist()):
        if d == 0:
            nv += 1
            b0 += 1
            if nv < V:
                continue
        elif d == 1:
            ne += 1
            i, j = edges[k]
            if uf.union(i, j):
                b0 -= 1
            else:
                b1 += 1
        else:
            nf += 1
            b1 -= 1
        chi = nv - ne + nf
        if chi != b0 - b1 or b1 < 0:
            raise InvariantError(
                f"Euler identity broken at alpha={a}: V-E+F={chi}, beta0-beta1={b0 - b1}"
            )
        alpha[row] = a if d else 0.0
        b0s[row], b1s[row], chis[row] = b0, b1, chi
        row += 1
    if V and row != n_ev + 1:
        raise InvariantError("vertices must precede all edges and triangles")
    return BettiCurve(alpha, b0s, b1s, chis, V)


def euler_curve(c: BettiCurve) -> list:
    return list(zip(c.alpha.tolist(), c.chi.tolist()))


def resample(c: BettiCurve, grid) -> BettiCurve:
    """Evaluate the step curve at each grid alpha (state after all insertions <= alpha)."""
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) < 0):
        raise ValueError("grid must be sorted ascending")
    i = np.searchsorted(c.alpha, grid, side="right") - 1
    before = i < 0
    i = np.clip(i, 0, None)
    V = c.n_vertices
    b0 = np.where(before, V, c.beta0[i])
    b1 = np.where(before, 0, c.beta1[i])
    chi = np.where(before, V, c.chi[i])
    return replace(c, alpha=grid, beta0=b0, beta1=b1, chi=chi, resampled=True)


def uniform_grid(c: BettiCurve, n: int = 256, alpha_max: float | None = None) -> np.ndarray:
    """n uniformly spaced alphas from 0 to ``alpha_max`` (default: last event)."""
    top = float(c.alpha[-1]) if alpha_max is None else float(alpha_max)
    return np.linspace(0.0, top, n)


def _gf2_rank(rows: list) -> int:
    """Rank over the two-element field of rows given as int bitmasks."""
    pivots: dict[int, int] = {}
    rank = 0
    for r in rows:
        while r:
            top = r.bit_length() - 1
            if top in pivots:
                r ^= pivots[top]
            else:
                pivots[top] = r
                rank += 1
                break
    return rank


def betti_brute_force(n_vertices: int, edges, triangles, max_simplices: int = 200) -> tuple[int, int]:
    """(beta0, beta1) from boundary-matrix ranks over GF(2). Test oracle."""
    edges = [tuple(sorted(e)) for e in edges]
    triangles = [tuple(sorted(t)) for t in triangles]
    if n_vertices + len(edges) + len(triangles) > max_simplices:
        raise OracleSizeError(
            f"{n_vertices + len(edges) + len(triangles)} simplices exceed oracle cap {max_simplices}"
        )
    d1 = [(1 << i) | (1 << j) for i, j in edges]
    eid = {e: k for k, e in enumerate(edges)}
    d2 = []
    for a, b, c in triangles:
        d2.append((1 << eid[(a, b)]) | (1 << eid[(b, c)]) | (1 << eid[(a, c)]))
    r1, r2 = _gf2_rank(d1), _gf2_rank(d2)
    return n_vertices - r1, len(edges) - r1 - r2
