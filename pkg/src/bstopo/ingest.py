"""Base-station record ingestion.

Reads OpenCellID-style delimiter-separated exports, clips them to a city
bounding box, projects to a local planar frame in meters and removes
co-located duplicates.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, NamedTuple

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import DomainError, EmptySetError, FormatError

EARTH_RADIUS_M = 6_371_000.0
DEFAULT_TOL_M = 1.0

# OpenCellID export order; lon comes before lat.
OPENCELLID_COLUMNS = (
    "radio", "mcc", "net", "area", "cell", "unit", "lon", "lat",
    "range", "samples", "changeable", "created", "updated", "averageSignal",
)

DEFAULT_COLUMN_MAP = {"radio_tech": "radio", "lon": "lon", "lat": "lat"}


@dataclass(frozen=True)
class RawRecord:
    radio_tech: str
    lon: float
    lat: float
    aux: tuple = ()


@dataclass(frozen=True)
class CityBounds:
    name: str
    lon_min: float
    lon_max: float
    lat_min: float
    lat_max: float

    def __post_init__(self):
        if not (self.lon_min < self.lon_max and self.lat_min < self.lat_max):
            raise FormatError(f"degenerate bounds for {self.name!r}")

    @property
    def center(self) -> tuple[float, float]:
        return (0.5 * (self.lon_min + self.lon_max), 0.5 * (self.lat_min + self.lat_max))

    def contains(self, lon: float, lat: float) -> bool:
        return self.lon_min <= lon <= self.lon_max and self.lat_min <= lat <= self.lat_max


@dataclass
class PointSet:
    """Planar point cloud in meters with provenance.

    ``meta`` holds free-form provenance (raw/deduplicated counts, generator
    spec, ...) and is written verbatim to the JSON sidecar.
    """

    points: np.ndarray
    origin: tuple[float, float] = (0.0, 0.0)
    source: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.size == 0:
            pts = pts.reshape(0, 2)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise FormatError(f"points must have shape (n, 2), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise FormatError("point coordinates must be finite")
        self.points = pts

    def __len__(self) -> int:
        return len(self.points)

    def bbox(self) -> tuple[float, float, float, float]:
        xmin, ymin = self.points.min(axis=0)
        xmax, ymax = self.points.max(axis=0)
        return float(xmin), float(ymin), float(xmax), float(ymax)

    def to_csv(self) -> str:
        lines = ["x_m,y_m"]
        lines.extend(f"{x!r},{y!r}" for x, y in self.points.tolist())
        return "\n".join(lines) + "\n"

    def sidecar(self) -> dict:
        return {
            "origin": list(self.origin),
            "source": self.source,
            "count": len(self),
            **self.meta,
        }

    def save(self, csv_path: str | Path, extra: dict | None = None) -> Path:
        """Write ``<name>.csv`` and ``<name>.json``; returns the sidecar path."""
        csv_path = Path(csv_path)
        csv_path.write_text(self.to_csv())
        side = self.sidecar()
        if extra:
            side.update(extra)
        json_path = csv_path.with_suffix(".json")
        json_path.write_text(json.dumps(side, indent=2, sort_keys=True) + "\n")
        return json_path

    @classmethod
    def load(cls, csv_path: str | Path) -> "PointSet":
        csv_path = Path(csv_path)
        with open(csv_path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["x_m", "y_m"]:
                raise FormatError(f"{csv_path}: expected header 'x_m,y_m', got {header}")
            try:
                pts = [(float(x), float(y)) for x, y in reader]
            except ValueError as exc:
                raise FormatError(f"{csv_path}: {exc}") from exc
        side = {}
        json_path = csv_path.with_suffix(".json")
        if json_path.exists():
            side = json.loads(json_path.read_text())
        origin = tuple(side.pop("origin", (0.0, 0.0)))
        source = side.pop("source", str(csv_path))
        side.pop("count", None)
        return cls(np.array(pts, dtype=float).reshape(-1, 2), origin, source, side)


class Parsed(NamedTuple):
    records: list
    skipped: int


def parse_records(
    stream: IO | str | Path,
    column_map: dict | None = None,
    delimiter: str = ",",
    radio_filter: Iterable[str] | None = None,
) -> Parsed:
    """Parse delimiter-separated BS records with a header row.

    Parameters
    ----------
    stream : binary/text file object or path
        UTF-8 text, one record per line, first line is the header.
    column_map : dict, optional
        Maps ``radio_tech``, ``lon`` and ``lat`` to header names.
        ``radio_tech`` may be absent from the file.
    radio_filter : iterable of str, optional
        Keep only rows whose radio tag is in this set (pass-through filter).

    Returns
    -------
    Parsed
        ``records`` in file order and the number of ``skipped`` malformed rows.
    """
    cmap = dict(DEFAULT_COLUMN_MAP)
    if column_map:
        cmap.update(column_map)

    if isinstance(stream, (str, Path)):
        try:
            text = Path(stream).read_bytes().decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FormatError(f"{stream}: not UTF-8 ({exc})") from exc
        fh = io.StringIO(text)
    else:
        data = stream.read()
        if isinstance(data, bytes):
            try:
                data = data.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise FormatError(f"stream is not UTF-8 ({exc})") from exc
        fh = io.StringIO(data)

    reader = csv.reader(fh, delimiter=delimiter)
    header = next(reader, None)
    if header is None:
        raise FormatError("missing header row")
    header = [h.strip() for h in header]
    index = {name: i for i, name in enumerate(header)}
    for key in ("lon", "lat"):
        if cmap[key] not in index:
            raise FormatError(f"header lacks required column {cmap[key]!r} ({key})")
    i_lon, i_lat = index[cmap["lon"]], index[cmap["lat"]]
    i_radio = index.get(cmap.get("radio_tech", ""), None)
    used = {i_lon, i_lat, i_radio}
    wanted = set(radio_filter) if radio_filter is not None else None

    records, skipped = [], 0
    for row in reader:
        if not row or all(not c.strip() for c in row):
            continue
        try:
            lon = float(row[i_lon])
            lat = float(row[i_lat])
        except (ValueError, IndexError):
            skipped += 1
            continue
        if not (math.isfinite(lon) and math.isfinite(lat)) or abs(lon) > 180 or abs(lat) > 90:
            skipped += 1
            continue
        radio = row[i_radio].strip() if i_radio is not None and i_radio < len(row) else ""
        if wanted is not None and radio not in wanted:
            continue
        aux = tuple(c for i, c in enumerate(row) if i not in used)
        records.append(RawRecord(radio, lon, lat, aux))
    return Parsed(records, skipped)


def project(lon, lat, origin):
    """Equirectangular projection about ``origin`` = (lon0, lat0), in meters.

    Works elementwise on arrays.
    """
    lon0, lat0 = origin
    if abs(lat0) >= 85 or np.any(np.abs(np.asarray(lat)) >= 85):
        raise DomainError("equirectangular projection undefined at |lat| >= 85 deg")
    k = EARTH_RADIUS_M * math.pi / 180.0
    x = k * (np.asarray(lon, dtype=float) - lon0) * math.cos(math.radians(lat0))
    y = k * (np.asarray(lat, dtype=float) - lat0)
    if np.ndim(x) == 0:
        return float(x), float(y)
    return x, y


def unproject(x, y, origin):
    lon0, lat0 = origin
    k = EARTH_RADIUS_M * math.pi / 180.0
    lon = lon0 + np.asarray(x, dtype=float) / (k * math.cos(math.radians(lat0)))
    lat = lat0 + np.asarray(y, dtype=float) / k
    if np.ndim(lon) == 0:
        return float(lon), float(lat)
    return lon, lat


def dedup_points(xy: np.ndarray, tol: float) -> np.ndarray:
    """Indices of points kept by first-come greedy deduplication.

    A point is dropped when it lies within ``tol`` of an already kept point.
    """
    keep = []
    if tol <= 0:
        seen = set()
        for i, (x, y) in enumerate(xy.tolist()):
            if (x, y) not in seen:
                seen.add((x, y))
                keep.append(i)
        return np.array(keep, dtype=int)

    cell = float(tol)
    grid: dict[tuple[int, int], list] = {}
    tol2 = tol * tol
    for i, (x, y) in enumerate(xy.tolist()):
        cx, cy = math.floor(x / cell), math.floor(y / cell)
        clash = False
        for gx in (cx - 1, cx, cx + 1):
            for gy in (cy - 1, cy, cy + 1):
                for px, py in grid.get((gx, gy), ()):
                    if (px - x) ** 2 + (py - y) ** 2 <= tol2:
                        clash = True
                        break
                if clash:
                    break
            if clash:
                break
        if not clash:
            grid.setdefault((cx, cy), []).append((x, y))
            keep.append(i)
    return np.array(keep, dtype=int)


def clip_and_dedup(records: list, bounds: CityBounds, tol: float = DEFAULT_TOL_M) -> PointSet:
    if tol < 0:
        raise DomainError("dedup tolerance must be >= 0")
    inside = [r for r in records if bounds.contains(r.lon, r.lat)]
    if not inside:
        raise EmptySetError(f"no records inside bounds of {bounds.name!r}")
    origin = bounds.center
    lon = np.array([r.lon for r in inside])
    lat = np.array([r.lat for r in inside])
    x, y = project(lon, lat, origin)
    xy = np.column_stack([x, y])
    keep = dedup_points(xy, tol)
    meta = {
        "raw_count": len(records),
        "in_bounds_count": len(inside),
        "dedup_count": int(len(keep)),
        "dedup_tol_m": float(tol),
        "projection": "equirectangular",
        "bounds": {
            "name": bounds.name,
            "lon_min": bounds.lon_min,
            "lon_max": bounds.lon_max,
            "lat_min": bounds.lat_min,
            "lat_max": bounds.lat_max,
        },
    }
    return PointSet(xy[keep], origin, bounds.name, meta)


def load_bounds(path: str | Path) -> dict[str, CityBounds]:
    """Read a city-bounds table from TOML or JSON.

    The file maps city names to tables with ``lon_min``, ``lon_max``,
    ``lat_min`` and ``lat_max``.
    """
    path = Path(path)
    raw = load_mapping(path)
    out = {}
    for name, box in raw.items():
        if not isinstance(box, dict):
            raise FormatError(f"{path}: entry {name!r} is not a table")
        extra = set(box) - {"lon_min", "lon_max", "lat_min", "lat_max"}
        if extra:
            raise FormatError(f"{path}: unknown keys {sorted(extra)} for {name!r}")
        try:
            out[name] = CityBounds(name, *(float(box[k]) for k in ("lon_min", "lon_max", "lat_min", "lat_max")))
        except KeyError as exc:
            raise FormatError(f"{path}: {name!r} missing {exc}") from exc
    return out


def load_mapping(path: Path) -> dict:
    text = path.read_text()
    if path.suffix.lower() == ".json":
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: {exc}") from exc
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise FormatError(f"{path}: {exc}") from exc
