"""Geographic primitives: points, great-circle distance, zone polygons, raster grid."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

EARTH_RADIUS_KM = 6371.0
# km per degree used for cell areas (6371 * pi / 180, rounded)
KM_PER_DEG = 111.19
OUTSIDE = "outside"


@dataclass(frozen=True)
class GeoPoint:
    lat_deg: float
    lon_deg: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lat_deg) and math.isfinite(self.lon_deg)):
            raise ValueError(f"non-finite coordinate: {self.lat_deg}, {self.lon_deg}")
        if not -90.0 <= self.lat_deg <= 90.0:
            raise ValueError(f"latitude out of range: {self.lat_deg}")
        if not -180.0 <= self.lon_deg <= 180.0:
            raise ValueError(f"longitude out of range: {self.lon_deg}")


def haversine_distance(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in km on a sphere of radius 6371 km."""
    return float(haversine_km(a.lat_deg, a.lon_deg, b.lat_deg, b.lon_deg))


def haversine_km(lat1, lon1, lat2, lon2):
    """Vectorised haversine over degree arrays (broadcasts like numpy)."""
    p1 = np.radians(lat1)
    p2 = np.radians(lat2)
    dp = p2 - p1
    dl = np.radians(np.asarray(lon2) - np.asarray(lon1))
    h = np.sin(dp / 2.0) ** 2 + np.cos(p1) * np.cos(p2) * np.sin(dl / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0)))


def _segments_cross(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return (v > 0) - (v < 0)

    def on_seg(a, b, c):
        return (min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
                and min(a[1], b[1]) <= c[1] <= max(a[1], b[1]))

    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    if o1 != o2 and o3 != o4:
        return True
    return ((o1 == 0 and on_seg(p1, p2, q1)) or (o2 == 0 and on_seg(p1, p2, q2))
            or (o3 == 0 and on_seg(q1, q2, p1)) or (o4 == 0 and on_seg(q1, q2, p2)))


@dataclass(frozen=True)
class ZoneRegion:
    """Named simple polygon. Vertices are stored open (no repeated closing vertex)."""

    name: str
    boundary: tuple[GeoPoint, ...]

    def __post_init__(self) -> None:
        pts = tuple(self.boundary)
        if len(pts) > 1 and pts[0] == pts[-1]:
            pts = pts[:-1]
        if len(pts) < 3:
            raise ValueError(f"zone {self.name!r}: polygon needs at least 3 vertices")
        object.__setattr__(self, "boundary", pts)
        xy = [(p.lon_deg, p.lat_deg) for p in pts]
        n = len(xy)
        for i in range(n):
            for j in range(i + 1, n):
                if j == i + 1 or (i == 0 and j == n - 1):
                    continue
                if _segments_cross(xy[i], xy[(i + 1) % n], xy[j], xy[(j + 1) % n]):
                    raise ValueError(f"zone {self.name!r}: polygon self-intersects")
        if self.planar_area() <= 0.0:
            raise ValueError(f"zone {self.name!r}: polygon has zero area")

    def planar_area(self) -> float:
        """Shoelace area in square degrees (absolute)."""
        s = 0.0
        pts = self.boundary
        for i, p in enumerate(pts):
            q = pts[(i + 1) % len(pts)]
            s += p.lon_deg * q.lat_deg - q.lon_deg * p.lat_deg
        return abs(s) / 2.0

    def bbox(self) -> tuple[float, float, float, float]:
        """(min_lat, min_lon, max_lat, max_lon)."""
        lats = [p.lat_deg for p in self.boundary]
        lons = [p.lon_deg for p in self.boundary]
        return min(lats), min(lons), max(lats), max(lons)

    def contains(self, lat, lon):
        """Vectorised containment; boundary points count as inside."""
        return points_in_polygon(
            np.asarray(lat, dtype=float), np.asarray(lon, dtype=float), self.boundary
        )


def points_in_polygon(lat: np.ndarray, lon: np.ndarray, boundary: Sequence[GeoPoint]) -> np.ndarray:
    """Even-odd ray casting in (lon, lat) plane with inclusive boundary."""
    x = np.asarray(lon, dtype=float)
    y = np.asarray(lat, dtype=float)
    inside = np.zeros(np.broadcast(x, y).shape, dtype=bool)
    on_edge = np.zeros_like(inside)
    n = len(boundary)
    for i in range(n):
        x1, y1 = boundary[i].lon_deg, boundary[i].lat_deg
        x2, y2 = boundary[(i + 1) % n].lon_deg, boundary[(i + 1) % n].lat_deg
        cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1)
        scale = max(abs(x2 - x1), abs(y2 - y1), 1e-300)
        on_edge |= (
            (np.abs(cross) <= 1e-12 * scale)
            & (x >= min(x1, x2) - 1e-12) & (x <= max(x1, x2) + 1e-12)
            & (y >= min(y1, y2) - 1e-12) & (y <= max(y1, y2) + 1e-12)
        )
        straddles = (y1 > y) != (y2 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_at = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
        inside ^= straddles & (x < x_at)
    return inside | on_edge


def point_in_region(p: GeoPoint, z: ZoneRegion) -> bool:
    return bool(z.contains(p.lat_deg, p.lon_deg))


@dataclass(frozen=True)
class RasterGrid:
    """Equirectangular grid. Row 0 is the southernmost row.

    ``zone_index`` holds, per cell, the index into ``zone_names`` of the zone
    whose polygon contains the cell centre, or -1 for cells outside all zones.
    """

    origin: GeoPoint
    resolution_deg: float
    n_rows: int
    n_cols: int
    zone_names: tuple[str, ...]
    zone_index: np.ndarray = field(repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.resolution_deg > 0:
            raise ValueError("resolution_deg must be positive")
        if self.n_rows <= 0 or self.n_cols <= 0:
            raise ValueError("grid dimensions must be positive")
        idx = np.array(self.zone_index, dtype=np.int16, copy=True)
        if idx.shape != (self.n_rows, self.n_cols):
            raise ValueError(f"zone_index shape {idx.shape} != {(self.n_rows, self.n_cols)}")
        idx.setflags(write=False)
        object.__setattr__(self, "zone_index", idx)

    @property
    def center_lats(self) -> np.ndarray:
        return self.origin.lat_deg + (np.arange(self.n_rows) + 0.5) * self.resolution_deg

    @property
    def center_lons(self) -> np.ndarray:
        return self.origin.lon_deg + (np.arange(self.n_cols) + 0.5) * self.resolution_deg

    @property
    def masked(self) -> np.ndarray:
        return self.zone_index >= 0

    def zone_at(self, row: int, col: int) -> str:
        self._check(row, col)
        i = int(self.zone_index[row, col])
        return OUTSIDE if i < 0 else self.zone_names[i]

    def cell_center(self, row: int, col: int) -> GeoPoint:
        self._check(row, col)
        return GeoPoint(float(self.center_lats[row]), float(self.center_lons[col]))

    def cell_areas(self) -> np.ndarray:
        """Per-cell area in km^2, shape (n_rows, n_cols)."""
        side = self.resolution_deg * KM_PER_DEG
        row_area = side * side * np.cos(np.radians(self.center_lats))
        return np.broadcast_to(np.clip(row_area, 0.0, None)[:, None], (self.n_rows, self.n_cols))

    def _check(self, row: int, col: int) -> None:
        if not (0 <= row < self.n_rows and 0 <= col < self.n_cols):
            raise IndexError(f"cell ({row}, {col}) outside {self.n_rows}x{self.n_cols} grid")


def cell_area(grid: RasterGrid, row: int, col: int) -> float:
    """Area of one cell in km^2 with cos-latitude weighting at the cell centre."""
    grid._check(row, col)
    return float(grid.cell_areas()[row, col])


def _count(span: float, res: float) -> int:
    return max(1, math.ceil(span / res - 1e-9))


def make_grid(zones: Sequence[ZoneRegion], resolution_deg: float = 0.05) -> RasterGrid:
    """Grid over the union bounding box; each cell centre is assigned the first
    zone (in input order) that contains it."""
    if not zones:
        raise ValueError("make_grid needs at least one zone")
    if not 0.0 < resolution_deg <= 1.0:
        raise ValueError(f"resolution_deg must be in (0, 1], got {resolution_deg}")
    boxes = [z.bbox() for z in zones]
    lat0 = min(b[0] for b in boxes)
    lon0 = min(b[1] for b in boxes)
    lat1 = max(b[2] for b in boxes)
    lon1 = max(b[3] for b in boxes)
    n_rows = _count(lat1 - lat0, resolution_deg)
    n_cols = _count(lon1 - lon0, resolution_deg)
    lats = lat0 + (np.arange(n_rows) + 0.5) * resolution_deg
    lons = lon0 + (np.arange(n_cols) + 0.5) * resolution_deg
    LAT, LON = np.meshgrid(lats, lons, indexing="ij")
    idx = np.full((n_rows, n_cols), -1, dtype=np.int16)
    for i, z in enumerate(zones):
        free = idx < 0
        hit = np.zeros_like(free)
        hit[free] = z.contains(LAT[free], LON[free])
        idx[hit] = i
    return RasterGrid(
        origin=GeoPoint(lat0, lon0),
        resolution_deg=resolution_deg,
        n_rows=n_rows,
        n_cols=n_cols,
        zone_names=tuple(z.name for z in zones),
        zone_index=idx,
    )


def load_zones_geojson(path: str | Path) -> list[ZoneRegion]:
    """Read a FeatureCollection of Polygon features, each with a ``name`` property.

    Only the exterior ring is used; polygons with holes are rejected.
    """
    with open(path, encoding="utf-8") as f:
        doc = json.load(f)
    if doc.get("type") != "FeatureCollection":
        raise ValueError(f"{path}: expected a FeatureCollection")
    zones = []
    for k, feat in enumerate(doc.get("features", [])):
        geom = feat.get("geometry") or {}
        if geom.get("type") != "Polygon":
            raise ValueError(f"{path}: feature {k} is not a Polygon")
        rings = geom.get("coordinates") or []
        if len(rings) != 1:
            raise ValueError(f"{path}: feature {k} has holes or no ring; only an exterior ring is allowed")
        name = (feat.get("properties") or {}).get("name")
        if not name:
            raise ValueError(f"{path}: feature {k} lacks a 'name' property")
        pts = tuple(GeoPoint(float(lat), float(lon)) for lon, lat, *_ in rings[0])
        zones.append(ZoneRegion(str(name), pts))
    if not zones:
        raise ValueError(f"{path}: no zones found")
    return zones
