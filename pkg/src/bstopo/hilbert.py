"""Hilbert-curve indexing on a 2**order x 2**order grid."""

import numpy as np


def hilbert_index(ix, iy, order: int) -> np.ndarray:
    """Distance along the Hilbert curve of integer cells (vectorized)."""
    x = np.asarray(ix, dtype=np.int64).copy()
    y = np.asarray(iy, dtype=np.int64).copy()
    d = np.zeros_like(x)
    s = 1 << (order - 1)
    while s > 0:
        rx = ((x & s) > 0).astype(np.int64)
        ry = ((y & s) > 0).astype(np.int64)
        d += s * s * ((3 * rx) ^ ry)
        # rotate quadrant
        flip = ry == 0
        swap_back = flip & (rx == 1)
        x = np.where(swap_back, s - 1 - x, x)
        y = np.where(swap_back, s - 1 - y, y)
        x, y = np.where(flip, y, x), np.where(flip, x, y)
        s >>= 1
    return d


def hilbert_order(k: int) -> np.ndarray:
    """Row-major cell indices (row * k + col) of a k x k grid in Hilbert order.

    For k not a power of two the curve of the enclosing power-of-two grid is
    used and cells outside the k x k grid are skipped.
    """
    order = max(1, int(np.ceil(np.log2(k))))
    cols, rows = np.meshgrid(np.arange(k), np.arange(k))
    d = hilbert_index(cols.ravel(), rows.ravel(), order)
    return np.argsort(d, kind="stable")


def hilbert_sort(points: np.ndarray, order: int = 16) -> np.ndarray:
    """Permutation ordering ``points`` along a Hilbert curve over their bbox."""
    pts = np.asarray(points, dtype=float)
    lo = pts.min(axis=0)
    span = float(np.max(pts.max(axis=0) - lo)) or 1.0
    n = (1 << order) - 1
    q = np.floor((pts - lo) / span * n).astype(np.int64)
    return np.argsort(hilbert_index(q[:, 0], q[:, 1], order), kind="stable")
