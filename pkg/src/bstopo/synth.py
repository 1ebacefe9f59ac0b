"""Synthetic point deployments: homogeneous Poisson and hierarchical cascade."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError, InsufficientDataError
from .ingest import PointSet
from .presets import load_presets

MAX_POINTS = 10_000_000
RNG_NAME = "numpy.random.Generator(PCG64)"


@dataclass(frozen=True)
class GenSpec:
    """Generator parameters. ``region`` is (xmin, ymin, xmax, ymax) in meters.

    For ``kind="fractal"`` each of ``levels`` steps splits every surviving
    cell into ``subdivision`` x ``subdivision`` sub-cells and keeps
    ``branching`` of them.
    """

    kind: str = "poisson"
    region: tuple = (0.0, 0.0, 1000.0, 1000.0)
    seed: int = 0
    intensity: float = 1e-3
    levels: int = 1
    branching: int = 4
    subdivision: int = 2
    scatter: float = 0.5

    def __post_init__(self):
        x0, y0, x1, y1 = self.region
        if not (x1 > x0 and y1 > y0):
            raise DomainError(f"empty region {self.region}")
        if self.kind == "poisson":
            if not self.intensity > 0:
                raise DomainError("intensity must be > 0")
        elif self.kind == "fractal":
            if self.levels < 1:
                raise DomainError("levels must be >= 1")
            if not 1 <= self.branching <= self.subdivision ** 2:
                raise DomainError("branching must lie in [1, subdivision**2]")
            if not 0 <= self.scatter <= 0.5:
                raise DomainError("scatter must lie in [0, 0.5]")
        else:
            raise DomainError(f"unknown generator kind {self.kind!r}")

    @property
    def area(self) -> float:
        x0, y0, x1, y1 = self.region
        return (x1 - x0) * (y1 - y0)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["region"] = list(self.region)
        return d


def _pointset(points: np.ndarray, spec: GenSpec) -> PointSet:
    meta = {"genspec": spec.to_dict(), "rng": RNG_NAME}
    return PointSet(points, (0.0, 0.0), f"synth:{spec.kind}", meta)


def gen_poisson(spec: GenSpec) -> PointSet:
    mean = spec.intensity * spec.area
    if mean > MAX_POINTS:
        raise InsufficientDataError(f"expected count {mean:.3g} exceeds guard {MAX_POINTS}")
    rng = np.random.default_rng(spec.seed)
    n = int(rng.poisson(mean))
    x0, y0, x1, y1 = spec.region
    pts = np.column_stack([rng.uniform(x0, x1, n), rng.uniform(y0, y1, n)])
    return _pointset(pts, spec)


def gen_fractal(spec: GenSpec) -> PointSet:
    L, m, b = spec.levels, spec.subdivision, spec.branching
    if b ** L > MAX_POINTS:
        raise InsufficientDataError(f"b**L = {b ** L} exceeds guard {MAX_POINTS}")
    rng = np.random.default_rng(spec.seed)
    # active cells as integer coordinates on the m**level grid
    cells = np.zeros((1, 2), dtype=np.int64)
    sub = np.array([(i, j) for j in range(m) for i in range(m)], dtype=np.int64)
    for _ in range(L):
        keys = rng.random((len(cells), m * m))
        chosen = np.argsort(keys, axis=1, kind="stable")[:, :b]
        cells = (cells[:, None, :] * m + sub[chosen]).reshape(-1, 2)
    x0, y0, x1, y1 = spec.region
    w = (x1 - x0) / m ** L
    h = (y1 - y0) / m ** L
    jitter = rng.uniform(-spec.scatter, spec.scatter, size=cells.shape)
    x = x0 + (cells[:, 0] + 0.5 + jitter[:, 0]) * w
    y = y0 + (cells[:, 1] + 0.5 + jitter[:, 1]) * h
    return _pointset(np.column_stack([x, y]), spec)


def generate(spec: GenSpec) -> PointSet:
    return gen_poisson(spec) if spec.kind == "poisson" else gen_fractal(spec)


def preset_spec(name: str, seed: int = 0) -> GenSpec:
    presets = load_presets()["generators"]
    if name not in presets:
        raise DomainError(f"unknown preset {name!r}; choose from {sorted(presets)}")
    params = dict(presets[name])
    params["region"] = tuple(params["region"])
    return GenSpec(seed=seed, **params)
