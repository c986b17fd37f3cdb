"""Channel-availability rasters and the area statistics computed from them."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ._io import atomic_write
from .geo import EARTH_RADIUS_KM, GeoPoint, RasterGrid, haversine_distance, haversine_km
from .propagation import FIRST_CHANNEL, N_CHANNELS
from .regulatory import ExclusionZone, RegulatoryParams, Transmitter, all_exclusion_zones

ALL_CHANNELS = (1 << N_CHANNELS) - 1
ALL_ZONES = "all_zones"


def channel_bit(c: int) -> int:
    if not FIRST_CHANNEL <= c < FIRST_CHANNEL + N_CHANNELS:
        raise ValueError(f"channel {c} outside band")
    return 1 << (c - FIRST_CHANNEL)


def channels_in(mask: int) -> list[int]:
    return [FIRST_CHANNEL + i for i in range(N_CHANNELS) if mask >> i & 1]


@dataclass(frozen=True)
class AvailabilityRaster:
    """Per-cell bitmask of free channels (bit i = channel 21 + i).

    Cells outside every zone hold mask 0 and are excluded from all statistics.
    """

    grid: RasterGrid
    bitmask: np.ndarray = field(repr=False, compare=False)
    method: str = ""
    preset: str = ""
    params: RegulatoryParams | None = None
    adjacent: bool = True

    def __post_init__(self) -> None:
        m = np.array(self.bitmask, dtype=np.uint16, copy=True)
        if m.shape != (self.grid.n_rows, self.grid.n_cols):
            raise ValueError("bitmask shape does not match grid")
        m[~self.grid.masked] = 0
        m.setflags(write=False)
        object.__setattr__(self, "bitmask", m)

    @property
    def available_count(self) -> np.ndarray:
        m = self.bitmask
        counts = np.zeros(m.shape, dtype=np.int8)
        for i in range(N_CHANNELS):
            counts += ((m >> i) & 1).astype(np.int8)
        return counts


def channel_available(pt: GeoPoint, c: int, zones: Iterable[ExclusionZone]) -> bool:
    """False iff some disk on channel ``c`` contains ``pt`` (boundary included)."""
    for z in zones:
        if z.channel == c and haversine_distance(pt, z.center) <= z.radius_km:
            return False
    return True


def _window(grid: RasterGrid, center: GeoPoint, radius_km: float) -> tuple[slice, slice]:
    """Row/column slices guaranteed to contain every cell centre within
    ``radius_km`` of ``center``."""
    ang = radius_km / EARTH_RADIUS_KM
    res = grid.resolution_deg
    dlat = math.degrees(ang)
    lat_lo, lat_hi = center.lat_deg - dlat, center.lat_deg + dlat
    if ang < math.pi / 2 - math.radians(abs(center.lat_deg)):
        dlon = math.degrees(math.asin(min(1.0, math.sin(ang) / math.cos(math.radians(center.lat_deg)))))
        lon_lo, lon_hi = center.lon_deg - dlon, center.lon_deg + dlon
    else:
        lon_lo, lon_hi = -math.inf, math.inf
    r0 = max(0, math.floor((lat_lo - grid.origin.lat_deg) / res - 0.5) - 1)
    r1 = min(grid.n_rows, math.ceil((lat_hi - grid.origin.lat_deg) / res - 0.5) + 2)
    if math.isinf(lon_lo):
        c0, c1 = 0, grid.n_cols
    else:
        c0 = max(0, math.floor((lon_lo - grid.origin.lon_deg) / res - 0.5) - 1)
        c1 = min(grid.n_cols, math.ceil((lon_hi - grid.origin.lon_deg) / res - 0.5) + 2)
    return slice(r0, max(r0, r1)), slice(c0, max(c0, c1))


def rasterize_zones(grid: RasterGrid, zones: Sequence[ExclusionZone]) -> np.ndarray:
    """Bitmask array for a precomputed list of exclusion disks."""
    mask = np.where(grid.masked, ALL_CHANNELS, 0).astype(np.uint16)
    lats, lons = grid.center_lats, grid.center_lons
    by_center: dict[GeoPoint, list[ExclusionZone]] = {}
    for z in zones:
        by_center.setdefault(z.center, []).append(z)
    for center, group in by_center.items():
        rows, cols = _window(grid, center, max(z.radius_km for z in group))
        if rows.start >= rows.stop or cols.start >= cols.stop:
            continue
        d = haversine_km(center.lat_deg, center.lon_deg, lats[rows, None], lons[None, cols])
        sub = mask[rows, cols]
        for z in group:
            sub[d <= z.radius_km] &= np.uint16(~channel_bit(z.channel) & 0xFFFF)
    mask[~grid.masked] = 0
    return mask


def availability_raster(grid: RasterGrid, towers: Sequence[Transmitter],
                        params: RegulatoryParams, method: str, adjacent: bool = True,
                        preset: str = "") -> AvailabilityRaster:
    zones = all_exclusion_zones(towers, params, method, adjacent)
    return AvailabilityRaster(grid, rasterize_zones(grid, zones), method, preset, params, adjacent)


def _cells(r: AvailabilityRaster, zone_name: str | None) -> np.ndarray:
    g = r.grid
    if zone_name is None or zone_name == ALL_ZONES:
        return g.masked
    if zone_name not in g.zone_names:
        raise KeyError(f"unknown zone {zone_name!r}; raster has {', '.join(g.zone_names)}")
    sel = g.zone_index == g.zone_names.index(zone_name)
    if not sel.any():
        raise KeyError(f"zone {zone_name!r} has no cells at this resolution")
    return sel


def count_area_fractions(r: AvailabilityRaster, zone_name: str | None = None) -> np.ndarray:
    """Area fraction with exactly k free channels, k = 0..15."""
    sel = _cells(r, zone_name)
    areas = r.grid.cell_areas()[sel]
    total = areas.sum()
    if not total > 0:
        raise ValueError("selected cells have zero area")
    return np.bincount(r.available_count[sel], weights=areas, minlength=N_CHANNELS + 1) / total


@dataclass(frozen=True)
class CcdfTable:
    rows: tuple[tuple[int, float], ...]

    def __getitem__(self, k: int) -> float:
        return self.rows[k][1]


def ccdf(r: AvailabilityRaster, zone_name: str | None = None) -> CcdfTable:
    """Percent of area with at least k free channels for k = 0..15."""
    exact = count_area_fractions(r, zone_name)
    at_least = np.cumsum(exact[::-1])[::-1] * 100.0
    at_least = np.minimum(at_least, 100.0)
    at_least[0] = 100.0
    return CcdfTable(tuple((k, float(v)) for k, v in enumerate(at_least)))


def zone_average(r: AvailabilityRaster, zone_name: str | None = None) -> float:
    """Area-weighted mean number of free channels over a zone (or all zones)."""
    sel = _cells(r, zone_name)
    areas = r.grid.cell_areas()[sel]
    return float(np.dot(areas, r.available_count[sel]) / areas.sum())


def percent_area_with_at_least(r: AvailabilityRaster, k: int, zone_name: str | None = None) -> float:
    if not 0 <= k <= N_CHANNELS:
        raise ValueError(f"k must be in [0, {N_CHANNELS}], got {k}")
    return ccdf(r, zone_name)[k]


# --- exports ---------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.4f}"


def provenance_header(method: str, preset: str, **extra) -> list[str]:
    items = {"preset": preset or "custom", "method": method, **extra}
    return [f"# {k}={v}" for k, v in items.items()]


def raster_csv(r: AvailabilityRaster) -> str:
    g = r.grid
    params = json.dumps(asdict(r.params), sort_keys=True) if r.params else ""
    head = provenance_header(
        r.method, r.preset, adjacent=str(r.adjacent).lower(),
        origin_lat=repr(g.origin.lat_deg), origin_lon=repr(g.origin.lon_deg),
        resolution_deg=repr(g.resolution_deg), n_rows=g.n_rows, n_cols=g.n_cols,
        zones=",".join(g.zone_names), params=params,
    )
    buf = io.StringIO()
    buf.write("\n".join(head) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["row", "col", "lat", "lon", "zone", "bitmask", "count"])
    counts = r.available_count
    lats, lons = g.center_lats, g.center_lons
    for row, col in zip(*np.nonzero(g.masked)):
        w.writerow([row, col, _fmt(lats[row]), _fmt(lons[col]), g.zone_names[g.zone_index[row, col]],
                    f"{int(r.bitmask[row, col]):04x}", int(counts[row, col])])
    return buf.getvalue()


def write_raster_csv(r: AvailabilityRaster, path: str | Path) -> None:
    atomic_write(path, raster_csv(r))


def read_raster_csv(path: str | Path) -> AvailabilityRaster:
    meta: dict[str, str] = {}
    with open(path, encoding="utf-8", newline="") as f:
        lines = f.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("# "):
            k, _, v = line[2:].partition("=")
            meta[k] = v
        else:
            body.append(line)
    try:
        n_rows, n_cols = int(meta["n_rows"]), int(meta["n_cols"])
        names = tuple(meta["zones"].split(","))
        origin = GeoPoint(float(meta["origin_lat"]), float(meta["origin_lon"]))
        res = float(meta["resolution_deg"])
    except KeyError as e:
        raise ValueError(f"{path}: missing header field {e}") from None
    idx = np.full((n_rows, n_cols), -1, dtype=np.int16)
    mask = np.zeros((n_rows, n_cols), dtype=np.uint16)
    for rec in csv.DictReader(body):
        i, j = int(rec["row"]), int(rec["col"])
        idx[i, j] = names.index(rec["zone"])
        mask[i, j] = int(rec["bitmask"], 16)
    grid = RasterGrid(origin, res, n_rows, n_cols, names, idx)
    params = RegulatoryParams(**json.loads(meta["params"])) if meta.get("params") else None
    return AvailabilityRaster(grid, mask, meta.get("method", ""),
                              "" if meta.get("preset") == "custom" else meta.get("preset", ""),
                              params, meta.get("adjacent", "true") == "true")


def raster_geojson(r: AvailabilityRaster) -> str:
    g = r.grid
    res = g.resolution_deg
    feats = []
    for row, col in zip(*np.nonzero(g.masked)):
        s = g.origin.lat_deg + row * res
        w = g.origin.lon_deg + col * res
        ring = [[round(w, 6), round(s, 6)], [round(w + res, 6), round(s, 6)],
                [round(w + res, 6), round(s + res, 6)], [round(w, 6), round(s + res, 6)],
                [round(w, 6), round(s, 6)]]
        feats.append({
            "type": "Feature",
            "geometry": {"type": "Polygon", "coordinates": [ring]},
            "properties": {"row": int(row), "col": int(col),
                           "zone": g.zone_names[g.zone_index[row, col]],
                           "channels": channels_in(int(r.bitmask[row, col]))},
        })
    doc = {"type": "FeatureCollection",
           "properties": {"preset": r.preset or "custom", "method": r.method},
           "features": feats}
    return json.dumps(doc, separators=(",", ":"))


def render_png(r: AvailabilityRaster, path: str | Path) -> None:
    """Grayscale+alpha PNG, north up; intensity scales with free-channel count,
    cells outside all zones are transparent."""
    from PIL import Image

    counts = r.available_count.astype(np.float64)
    gray = np.round(counts * 255.0 / N_CHANNELS).astype(np.uint8)
    alpha = np.where(r.grid.masked, 255, 0).astype(np.uint8)
    img = Image.fromarray(np.flipud(np.stack([gray, alpha], axis=-1)), mode="LA")
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    atomic_write(path, buf.getvalue())


def stats_tables(rasters: Sequence[tuple[str, AvailabilityRaster]],
                 zones: Sequence[str], thresholds: Sequence[int] = (10, 12, 15)
                 ) -> tuple[str, str]:
    """Zone-average table and percent-area table as CSV text.

    ``rasters`` pairs a row label (e.g. ``pollution-15+adj``) with its raster.
    """
    head = "\n".join(provenance_header(
        ";".join(sorted({r.method for _, r in rasters})),
        ";".join(dict.fromkeys(r.preset or "custom" for _, r in rasters)),
    )) + "\n"
    a = io.StringIO()
    a.write(head)
    w = csv.writer(a, lineterminator="\n")
    w.writerow(["method", "parameters", *zones, ALL_ZONES])
    b = io.StringIO()
    b.write(head)
    v = csv.writer(b, lineterminator="\n")
    v.writerow(["method", "parameters", *(f"{k}_channels_free_pct" for k in thresholds)])
    for label, r in rasters:
        w.writerow([r.method, label, *(_fmt(zone_average(r, z)) for z in zones),
                    _fmt(zone_average(r))])
        table = ccdf(r)
        v.writerow([r.method, label, *(_fmt(table[k]) for k in thresholds)])
    return a.getvalue(), b.getvalue()


def ccdf_csv(r: AvailabilityRaster, zones: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    buf.write("\n".join(provenance_header(r.method, r.preset, adjacent=str(r.adjacent).lower())) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "pct_area_at_least_k_" + ALL_ZONES, *(f"pct_area_at_least_k_{z}" for z in zones)])
    tables = [ccdf(r)] + [ccdf(r, z) for z in zones]
    for k in range(N_CHANNELS + 1):
        w.writerow([k, *(_fmt(t[k]) for t in tables)])
    return buf.getvalue()
