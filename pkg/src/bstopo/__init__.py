"""Topological descriptors of planar point deployments.

Alpha-complex Betti curves, Euler characteristics, fractal ripple/peak
signatures, rescaled-range Hurst coefficients and heavy-tailed fits of
Euler-characteristic distributions.
"""

__version__ = "0.1.0"

from .ingest import CityBounds, PointSet, RawRecord
from .geometry import Triangulation, delaunay
from .filtration import Filtration, build_filtration
from .homology import BettiCurve, betti_curve

__all__ = [
    "BettiCurve",
    "CityBounds",
    "Filtration",
    "PointSet",
    "RawRecord",
    "Triangulation",
    "betti_curve",
    "build_filtration",
    "delaunay",
]
