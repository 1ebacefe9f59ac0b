"""Fractal signatures of Betti curves and rescaled-range Hurst estimation.

Ripples are distinct slope changes of log10(beta0) against alpha, located
by recursive two-segment least-squares fits. Peaks are prominent local
maxima of beta1. Slopes are expressed in decades per 1/64 of the analysed
alpha range so thresholds do not depend on the metric scale of the input.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.signal import find_peaks

from .errors import DegeneracyError, InsufficientDataError
from .hilbert import hilbert_order
from .homology import BettiCurve, resample
from .presets import detection_defaults

SLOPE_UNITS = 64
ZERO_COUNT_CLAMP = 0.5


@dataclass(frozen=True)
class Crossover:
    breakpoint: float
    crossover: float
    slope_left: float
    slope_right: float
    sse: float
    sse_single: float
    index: int

    @property
    def strength(self) -> float:
        return abs(self.slope_right - self.slope_left)


@dataclass(frozen=True)
class Ripple:
    alpha: float
    slope_before: float
    slope_after: float
    strength: float


@dataclass(frozen=True)
class Peak:
    alpha: float
    height: float
    prominence: float


@dataclass
class FeatureReport:
    ripples: list = field(default_factory=list)
    peaks: list = field(default_factory=list)
    pairs: list = field(default_factory=list)
    unpaired_ripples: list = field(default_factory=list)
    unpaired_peaks: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def unmatched_rate(self) -> float:
        total = len(self.ripples) + len(self.peaks)
        if total == 0:
            return 0.0
        return (len(self.unpaired_ripples) + len(self.unpaired_peaks)) / total

    def to_dict(self) -> dict:
        return {
            "ripples": [asdict(r) for r in self.ripples],
            "peaks": [asdict(p) for p in self.peaks],
            "pairing": {
                "pairs": [list(p) for p in self.pairs],
                "unpaired_ripples": list(self.unpaired_ripples),
                "unpaired_peaks": list(self.unpaired_peaks),
            },
            "meta": self.meta,
        }


@dataclass
class HurstEstimate:
    H: float
    raw_slope: float
    window_sizes: list
    rs_values: list
    r2: float

    def to_dict(self) -> dict:
        return asdict(self)

    def regression_csv(self) -> str:
        rows = ["s,rs_mean"] + [f"{s},{v!r}" for s, v in zip(self.window_sizes, self.rs_values)]
        return "\n".join(rows) + "\n"


def _segment_sse(x: np.ndarray, y: np.ndarray):
    """Least-squares slope, intercept and SSE for every prefix of (x, y)."""
    n = np.arange(1, len(x) + 1, dtype=float)
    sx, sy = np.cumsum(x), np.cumsum(y)
    sxx, sxy, syy = np.cumsum(x * x), np.cumsum(x * y), np.cumsum(y * y)
    vxx = sxx - sx * sx / n
    vxy = sxy - sx * sy / n
    vyy = syy - sy * sy / n
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = np.where(vxx > 0, vxy / vxx, 0.0)
    intercept = (sy - slope * sx) / n
    sse = np.maximum(vyy - slope * vxy, 0.0)
    return slope, intercept, sse


def two_line_crossover(x, y, lo: float | None = None, hi: float | None = None, min_side: int = 3) -> Crossover:
    """Best split of (x, y) into two least-squares lines.

    Candidate breakpoints are sample positions; the left segment takes the
    samples before the breakpoint and the right segment the rest, each with
    at least ``min_side`` samples. ``crossover`` is where the two fitted
    lines intersect (NaN for parallel lines).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if lo is not None or hi is not None:
        keep = (x >= (-np.inf if lo is None else lo)) & (x <= (np.inf if hi is None else hi))
        x, y = x[keep], y[keep]
    n = len(x)
    if n < 2 * min_side:
        raise InsufficientDataError(f"need at least {2 * min_side} samples, got {n}")

    # SSE of x[:k] and of x[k:] for every k
    sl, il, el = _segment_sse(x, y)
    sr, ir, er = _segment_sse(x[::-1], y[::-1])
    ks = np.arange(min_side, n - min_side + 1)
    left_sse = el[ks - 1]
    right_sse = er[n - ks - 1]
    total = left_sse + right_sse
    best = int(ks[np.argmin(total)])
    a1, b1 = sl[best - 1], il[best - 1]
    a2, b2 = sr[n - best - 1], ir[n - best - 1]
    if abs(a1 - a2) > 1e-12 * max(1.0, abs(a1), abs(a2)):
        cross = (b2 - b1) / (a1 - a2)
    else:
        cross = math.nan
    return Crossover(
        breakpoint=float(x[best]),
        crossover=float(cross),
        slope_left=float(a1),
        slope_right=float(a2),
        sse=float(left_sse[best - min_side] + right_sse[best - min_side]),
        sse_single=float(el[-1]),
        index=best,
    )


def log_beta0(beta0) -> np.ndarray:
    return np.log10(np.maximum(np.asarray(beta0, dtype=float), ZERO_COUNT_CLAMP))


def detect_ripples(alpha, beta0, min_strength: float = 0.06, min_separation: float | None = None,
                   min_side: int = 3) -> list:
    """Ripples of a uniformly resampled beta0 curve.

    Splits are explored strongest first; a split whose slope change reaches
    ``min_strength`` (decades per 1/64 of the alpha range) is accepted when
    it lies at least ``min_separation`` from every accepted ripple, and its
    two halves are searched in turn.
    """
    alpha = np.asarray(alpha, dtype=float)
    y = log_beta0(beta0)
    if len(alpha) < 2 * min_side or np.ptp(y) == 0:
        return []
    span = float(alpha[-1] - alpha[0])
    if span <= 0:
        return []
    unit = span / SLOPE_UNITS
    u = (alpha - alpha[0]) / unit
    if min_separation is None:
        min_separation = span / 16

    accepted: list[Ripple] = []
    heap: list = []
    counter = 0

    def push(lo, hi):
        nonlocal counter
        if hi - lo < 2 * min_side:
            return
        c = two_line_crossover(u[lo:hi], y[lo:hi], min_side=min_side)
        if c.strength >= min_strength:
            heapq.heappush(heap, (-c.strength, counter, lo, hi, c))
            counter += 1

    push(0, len(u))
    while heap:
        _, _, lo, hi, c = heapq.heappop(heap)
        k = lo + c.index
        pos_u = c.crossover if u[k - 1] <= c.crossover <= u[k] else c.breakpoint
        pos = float(alpha[0] + pos_u * unit)
        if all(abs(pos - r.alpha) >= min_separation for r in accepted):
            accepted.append(Ripple(pos, c.slope_left, c.slope_right, c.strength))
        push(lo, k)
        push(k, hi)
    return sorted(accepted, key=lambda r: r.alpha)


def detect_peaks(alpha, beta1, min_prominence_frac: float = 0.2) -> list:
    """Local maxima of beta1 whose prominence is at least a fraction of max(beta1)."""
    alpha = np.asarray(alpha, dtype=float)
    b1 = np.asarray(beta1, dtype=float)
    top = float(b1.max()) if len(b1) else 0.0
    if top <= 0:
        return []
    # pad with zeros so a maximum at the last grid point still counts; the
    # tiny ramp makes the earlier of two equal maxima the higher one
    ramp = np.arange(len(b1)) * (top * 1e-12)
    padded = np.r_[0.0, b1 - ramp, 0.0]
    idx, props = find_peaks(padded, prominence=min_prominence_frac * top)
    peaks = [
        Peak(float(alpha[i - 1]), float(b1[i - 1]), float(round(p, 6)))
        for i, p in zip(idx.tolist(), props["prominences"].tolist())
    ]
    return sorted(peaks, key=lambda p: p.alpha)


def pair_ripples_peaks(ripples: list, peaks: list):
    """Order-preserving greedy matching of each ripple to the next later peak.

    Returns ``(pairs, unpaired_ripples, unpaired_peaks)`` as index lists.
    """
    pairs, lone_r, lone_p = [], [], []
    j = 0
    for i, r in enumerate(ripples):
        while j < len(peaks) and peaks[j].alpha <= r.alpha:
            lone_p.append(j)
            j += 1
        if j < len(peaks):
            pairs.append((i, j))
            j += 1
        else:
            lone_r.append(i)
    lone_p.extend(range(j, len(peaks)))
    return pairs, lone_r, lone_p


def analysis_ranges(curve: BettiCurve, beta1_floor: float = 0.05) -> tuple[float, float]:
    """Upper alphas of the ripple and peak windows.

    The peak window closes once beta1 has fallen to ``beta1_floor`` of its
    maximum after its last high value, which leaves out the long tail of
    hull triangles with huge circumradii. The ripple window closes at the
    same point or earlier, when beta0 reaches its final value, so the flat
    tail of a fully merged curve does not read as a slope change.
    """
    b0_done = float(curve.alpha[int(np.argmax(curve.beta0 == curve.beta0[-1]))])
    b1 = curve.beta1
    top = int(b1.max())
    if top == 0:
        return b0_done, b0_done
    last_high = int(np.flatnonzero(b1 > beta1_floor * top)[-1])
    b1_done = float(curve.alpha[min(last_high + 1, len(curve.alpha) - 1)])
    return min(b0_done, b1_done), b1_done


def feature_report(curve: BettiCurve, **params) -> FeatureReport:
    """Resample a Betti curve and run ripple, peak and pairing detection.

    Keyword arguments override the shipped detection preset: ``grid_points``,
    ``min_strength``, ``separation_frac``, ``min_prominence_frac`` and
    ``beta1_floor``.
    """
    cfg = detection_defaults()
    unknown = set(params) - set(cfg)
    if unknown:
        raise TypeError(f"unknown detection parameters {sorted(unknown)}")
    cfg.update(params)
    n = int(cfg["grid_points"])
    if n < 64:
        raise InsufficientDataError("feature detection needs a grid of at least 64 points")
    r_top, p_top = analysis_ranges(curve, cfg["beta1_floor"])
    ripples = []
    if r_top > 0:
        grid = np.linspace(0.0, r_top, n)
        ripples = detect_ripples(grid, resample(curve, grid).beta0, cfg["min_strength"],
                                 cfg["separation_frac"] * r_top)
    peaks = []
    if p_top > 0:
        grid = np.linspace(0.0, p_top, n)
        peaks = detect_peaks(grid, resample(curve, grid).beta1, cfg["min_prominence_frac"])
    pairs, lone_r, lone_p = pair_ripples_peaks(ripples, peaks)
    meta = dict(cfg)
    meta.update({
        "ripple_range": [0.0, r_top],
        "peak_range": [0.0, p_top],
        "min_separation": cfg["separation_frac"] * r_top,
        "slope_units": f"log10(beta0) per ripple_range/{SLOPE_UNITS}",
    })
    return FeatureReport(ripples, peaks, pairs, lone_r, lone_p, meta)


def series_from_points(ps, grid_k: int = 64, ordering: str = "hilbert") -> np.ndarray:
    """Per-cell point counts of a grid_k x grid_k grid over the bounding box."""
    pts = np.asarray(getattr(ps, "points", ps), dtype=float)
    if len(pts) == 0:
        raise InsufficientDataError("empty point set")
    if grid_k < 2:
        raise ValueError("grid_k must be >= 2")
    lo = pts.min(axis=0)
    span = pts.max(axis=0) - lo
    span[span == 0] = 1.0
    ij = np.floor((pts - lo) / span * grid_k).astype(np.int64)
    ij = np.clip(ij, 0, grid_k - 1)
    counts = np.bincount(ij[:, 1] * grid_k + ij[:, 0], minlength=grid_k * grid_k)
    if ordering == "hilbert":
        return counts[hilbert_order(grid_k)]
    if ordering == "row-major":
        return counts
    raise ValueError(f"unknown ordering {ordering!r}")


def rs_ladder(n: int, min_window: int = 8) -> list:
    sizes = []
    s = min_window
    while s <= n // 4:
        sizes.append(s)
        s *= 2
    return sizes


def hurst_rs(series) -> HurstEstimate:
    """Hurst exponent by rescaled-range analysis.

    For each window size s (powers of two from 8 to n/4) the series is cut
    into floor(n/s) blocks; each block contributes R/S, the range of its
    mean-adjusted cumulative sum over its standard deviation. H is the
    least-squares slope of log(mean R/S) against log(s).
    """
    x = np.asarray(series, dtype=float)
    n = len(x)
    if n < 64:
        raise InsufficientDataError(f"series length {n} < 64")
    if np.ptp(x) == 0:
        raise DegeneracyError("constant series")
    sizes, values = [], []
    for s in rs_ladder(n):
        blocks = x[: (n // s) * s].reshape(-1, s)
        dev = blocks - blocks.mean(axis=1, keepdims=True)
        z = np.cumsum(dev, axis=1)
        R = z.max(axis=1) - z.min(axis=1)
        S = blocks.std(axis=1)
        ok = S > 0
        if not ok.any():
            continue
        sizes.append(s)
        values.append(float(np.mean(R[ok] / S[ok])))
    if len(sizes) < 3:
        raise InsufficientDataError("fewer than 3 usable window sizes")
    lx, ly = np.log(sizes), np.log(values)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return HurstEstimate(
        H=float(min(max(slope, 0.0), 1.0)),
        raw_slope=float(slope),
        window_sizes=sizes,
        rs_values=values,
        r2=r2,
    )
