"""Euler-characteristic samples, empirical densities and candidate fits.

Four candidate families are compared against the empirical density by
RMSE at the histogram bin centres: log-normal, Weibull, generalized
Pareto and Poisson. Non-positive samples are moved onto positive support
by a recorded shift before any fitting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, stats

from .errors import DomainError, InsufficientDataError
from .filtration import build_filtration, complex_at
from .geometry import delaunay

FAMILIES = ("log-normal", "weibull", "generalized-pareto", "poisson")
CSV_COLUMNS = {"log-normal": "lognormal", "weibull": "weibull",
               "generalized-pareto": "genpareto", "poisson": "poisson"}
SIGMA_MIN = 1e-6
WEIBULL_MAXITER = 200
MIN_BLOCK_POINTS = 10
MIN_PDF_SAMPLES = 30


@dataclass(frozen=True)
class EmpiricalPdf:
    bin_edges: np.ndarray
    densities: np.ndarray
    sample_count: int
    shift_applied: float = 0.0
    binning: str = "freedman-diaconis"

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    def to_dict(self) -> dict:
        return {
            "bin_edges": self.bin_edges.tolist(),
            "densities": self.densities.tolist(),
            "sample_count": self.sample_count,
            "shift_applied": self.shift_applied,
            "binning": self.binning,
        }


@dataclass
class FitResult:
    """Fitted parameters of one family; ``ok`` is False for a failed fit."""

    family: str
    params: dict
    shift_applied: float = 0.0
    rmse: float | None = None
    ok: bool = True
    degenerate: bool = False
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "params": dict(self.params),
            "rmse": self.rmse,
            "shift_applied": self.shift_applied,
            "ok": self.ok,
            "degenerate": self.degenerate,
            "message": self.message,
        }


def shift_for_support(samples) -> tuple[np.ndarray, float]:
    """Move samples onto positive support: shift = 1 - min when min <= 0."""
    x = np.asarray(samples, dtype=float)
    if len(x) == 0:
        return x.copy(), 0.0
    lo = float(x.min())
    shift = 1.0 - lo if lo <= 0 else 0.0
    return x + shift, shift


# -- sampling -----------------------------------------------------------------

def _window_starts(lo: float, hi: float, block: float, stride: float) -> np.ndarray:
    extent = hi - lo
    if extent <= block:
        return np.array([lo])
    n = int(math.ceil((extent - block) / stride - 1e-9)) + 1
    return lo + stride * np.arange(n)


def euler_samples(ps, block: float, stride: float, alpha_rule: str = "quantile",
                  q: float = 0.5, alpha: float | None = None, seed: int = 0,
                  min_points: int = MIN_BLOCK_POINTS) -> list:
    """One Euler characteristic per block x block window of a sliding grid.

    Parameters
    ----------
    ps : PointSet or array_like, shape (n, 2)
    block, stride : float
        Window side and step, in meters.
    alpha_rule : {"quantile", "fixed"}
        ``"quantile"`` evaluates each block at the ``q`` quantile of its own
        edge entry values; ``"fixed"`` uses ``alpha`` everywhere.
    seed : int
        Seed for the degeneracy jitter of the triangulation.
    min_points : int
        Windows with fewer points are skipped (at least 3).
    """
    if not (block > 0 and stride > 0):
        raise DomainError("block and stride must be positive")
    if alpha_rule == "fixed":
        if alpha is None or alpha < 0:
            raise DomainError("fixed alpha rule needs alpha >= 0")
    elif alpha_rule == "quantile":
        if not 0 <= q <= 1:
            raise DomainError("quantile q must lie in [0, 1]")
    else:
        raise DomainError(f"unknown alpha rule {alpha_rule!r}")
    if min_points < 3:
        raise DomainError("min_points must be >= 3")
    pts = np.asarray(getattr(ps, "points", ps), dtype=float)
    if len(pts) < min_points:
        raise InsufficientDataError(f"no window holds {min_points} points")

    (x0, y0), (x1, y1) = pts.min(axis=0), pts.max(axis=0)
    chis = []
    for wy in _window_starts(y0, y1, block, stride):
        in_row = (pts[:, 1] >= wy) & (pts[:, 1] < wy + block)
        if wy + block >= y1:
            in_row |= pts[:, 1] == y1
        for wx in _window_starts(x0, x1, block, stride):
            sel = in_row & (pts[:, 0] >= wx) & (pts[:, 0] < wx + block)
            if wx + block >= x1:
                sel |= in_row & (pts[:, 0] == x1)
            if np.count_nonzero(sel) < min_points:
                continue
            f = build_filtration(delaunay(pts[sel], seed=seed))
            a = alpha if alpha_rule == "fixed" else float(np.quantile(f.edge_alpha, q))
            V, E, F = complex_at(f, a)
            chis.append(V - E + F)
    if not chis:
        raise InsufficientDataError(f"no window holds {min_points} points")
    return chis


# -- empirical density --------------------------------------------------------

def empirical_pdf(samples, binning: str | int = "freedman-diaconis", shift_applied: float = 0.0) -> EmpiricalPdf:
    """Normalized histogram; Freedman-Diaconis widths unless a bin count is given."""
    x = np.asarray(samples, dtype=float)
    if len(x) < MIN_PDF_SAMPLES:
        raise InsufficientDataError(f"need at least {MIN_PDF_SAMPLES} samples, got {len(x)}")
    if isinstance(binning, str):
        if binning != "freedman-diaconis":
            raise DomainError(f"unknown binning {binning!r}")
        bins = "fd"
    else:
        bins = int(binning)
        if bins < 1:
            raise DomainError("bin count must be >= 1")
    dens, edges = np.histogram(x, bins=bins, density=True)
    label = binning if isinstance(binning, str) else f"fixed:{bins}"
    return EmpiricalPdf(edges, dens, len(x), float(shift_applied), label)


# -- fitting ------------------------------------------------------------------

def _positive(x: np.ndarray, family: str) -> None:
    if len(x) == 0:
        raise InsufficientDataError("no samples")
    if x.min() <= 0:
        raise DomainError(f"{family} fit needs positive samples; apply shift_for_support first")


def _fit_lognormal(x: np.ndarray, shift: float) -> FitResult:
    _positive(x, "log-normal")
    logs = np.log(x)
    sigma = float(logs.std())
    degenerate = sigma < SIGMA_MIN
    return FitResult("log-normal", {"mu": float(logs.mean()), "sigma": max(sigma, SIGMA_MIN)},
                     shift, degenerate=degenerate,
                     message="zero spread; sigma held at its floor" if degenerate else "")


def _fit_weibull(x: np.ndarray, shift: float) -> FitResult:
    _positive(x, "weibull")
    # scale by the maximum so x**k stays finite during the search
    top = float(x.max())
    z = x / top
    lz = np.log(z)
    mean_lz = float(lz.mean())

    def score(k):
        zk = z ** k
        return float((zk * lz).sum() / zk.sum()) - 1.0 / k - mean_lz

    fail = FitResult("weibull", {}, shift, ok=False)
    lo, hi = 1e-3, 1.0
    try:
        while score(hi) < 0:
            hi *= 2.0
            if hi > 1e6:
                fail.message = "no sign change for the shape equation"
                return fail
        if score(lo) > 0:
            fail.message = "no sign change for the shape equation"
            return fail
        k = optimize.brentq(score, lo, hi, maxiter=WEIBULL_MAXITER)
    except (RuntimeError, FloatingPointError, ZeroDivisionError) as exc:
        fail.message = f"shape root-find failed: {exc}"
        return fail
    lam = top * float(np.mean(z ** k)) ** (1.0 / k)
    return FitResult("weibull", {"k": float(k), "lambda": lam}, shift)


def _fit_genpareto(x: np.ndarray, shift: float) -> FitResult:
    _positive(x, "generalized-pareto")
    xs = np.sort(x)
    n = len(xs)
    if n < 2:
        return FitResult("generalized-pareto", {}, shift, ok=False, message="need two samples")
    a0 = float(xs.mean())
    a1 = float(np.sum(xs * (n - 1 - np.arange(n))) / (n * (n - 1)))
    d = a0 - 2.0 * a1
    if d <= 0:
        return FitResult("generalized-pareto", {}, shift, ok=False,
                         message="probability-weighted moments give no positive scale")
    return FitResult("generalized-pareto", {"xi": 2.0 - a0 / d, "sigma": 2.0 * a0 * a1 / d, "loc": 0.0}, shift)


def _fit_poisson(x: np.ndarray, shift: float) -> FitResult:
    if len(x) == 0:
        raise InsufficientDataError("no samples")
    rate = float(np.rint(x).mean())
    if rate <= 0:
        return FitResult("poisson", {}, shift, ok=False, message="non-positive rate")
    return FitResult("poisson", {"rate": rate}, shift)


_FITTERS = {
    "log-normal": _fit_lognormal,
    "weibull": _fit_weibull,
    "generalized-pareto": _fit_genpareto,
    "poisson": _fit_poisson,
}


def fit(family: str, samples, shift_applied: float = 0.0) -> FitResult:
    """Fit one candidate family to samples already on positive support."""
    if family not in _FITTERS:
        raise DomainError(f"unknown family {family!r}; choose from {FAMILIES}")
    return _FITTERS[family](np.asarray(samples, dtype=float), float(shift_applied))


def fit_all(samples, shift_applied: float = 0.0) -> list:
    return [fit(f, samples, shift_applied) for f in FAMILIES]


# -- densities and ranking ----------------------------------------------------

def pdf_eval(family: str, params: dict, x, bin_width: float = 1.0) -> np.ndarray:
    """Density of a fitted family; zero outside its support.

    The Poisson mass at the nearest integer is divided by ``bin_width``.
    """
    x = np.asarray(x, dtype=float)
    if family == "log-normal":
        with np.errstate(divide="ignore"):
            out = stats.lognorm.pdf(x, s=params["sigma"], scale=math.exp(params["mu"]))
    elif family == "weibull":
        out = stats.weibull_min.pdf(x, c=params["k"], scale=params["lambda"])
    elif family == "generalized-pareto":
        xi = params["xi"]
        if abs(xi) < 1e-9:
            xi = 0.0
        out = stats.genpareto.pdf(x, c=xi, loc=params.get("loc", 0.0), scale=params["sigma"])
    elif family == "poisson":
        k = np.floor(x + 0.5)
        out = np.where(k >= 0, stats.poisson.pmf(k, params["rate"]), 0.0) / bin_width
    else:
        raise DomainError(f"unknown family {family!r}")
    return np.nan_to_num(np.asarray(out, dtype=float), nan=0.0)


def _poisson_bin_density(rate: float, edges: np.ndarray) -> np.ndarray:
    """Poisson mass of the integers in each [lo, hi) bin, per unit width."""
    lo = np.ceil(edges[:-1])
    hi = np.ceil(edges[1:])
    hi[-1] = np.floor(edges[-1]) + 1  # last bin is closed
    mass = stats.poisson.cdf(hi - 1, rate) - stats.poisson.cdf(lo - 1, rate)
    return mass / np.diff(edges)


def fitted_density(epdf: EmpiricalPdf, result: FitResult) -> np.ndarray:
    """A fitted family's density on the bins of ``epdf``."""
    if result.family == "poisson":
        return _poisson_bin_density(result.params["rate"], epdf.bin_edges)
    return pdf_eval(result.family, result.params, epdf.centers)


def rmse_rank(epdf: EmpiricalPdf, fits: list) -> list:
    """Successful fits with their RMSE filled in, best first."""
    ranked = []
    for r in fits:
        if not r.ok:
            continue
        err = fitted_density(epdf, r) - epdf.densities
        r.rmse = float(np.sqrt(np.mean(err ** 2)))
        ranked.append(r)
    if not ranked:
        raise InsufficientDataError("no candidate family could be fitted")
    order = sorted(range(len(ranked)), key=lambda i: (ranked[i].rmse, FAMILIES.index(ranked[i].family)))
    return [ranked[i] for i in order]


@dataclass
class FitReport:
    epdf: EmpiricalPdf
    ranked: list
    failed: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "empirical_pdf": self.epdf.to_dict(),
            "ranking": [r.family for r in self.ranked],
            "fits": [r.to_dict() for r in self.ranked],
            "failed_fits": [r.to_dict() for r in self.failed],
            "meta": self.meta,
        }

    def overlay_csv(self) -> str:
        fits = {r.family: fitted_density(self.epdf, r) for r in self.ranked}
        lines = ["x,emp_density," + ",".join(CSV_COLUMNS[f] for f in FAMILIES)]
        for i, (x, d) in enumerate(zip(self.epdf.centers.tolist(), self.epdf.densities.tolist())):
            cells = [repr(float(fits[f][i])) if f in fits else "" for f in FAMILIES]
            lines.append(f"{x!r},{d!r}," + ",".join(cells))
        return "\n".join(lines) + "\n"


def analyze(samples, binning: str | int = "freedman-diaconis") -> FitReport:
    """Shift, histogram, fit all four families and rank them."""
    shifted, shift = shift_for_support(samples)
    if len(shifted) and np.ptp(shifted) == 0 and binning == "freedman-diaconis":
        # a single distinct value leaves the Freedman-Diaconis width undefined
        binning = 1
    epdf = empirical_pdf(shifted, binning, shift)
    fits = fit_all(shifted, shift)
    ranked = rmse_rank(epdf, fits)
    failed = [r for r in fits if not r.ok]
    return FitReport(epdf, ranked, failed, {"sample_count": len(shifted), "shift_applied": shift})

