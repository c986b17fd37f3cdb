"""Tower database ingestion, synthetic tower generation and run configuration."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .geo import GeoPoint, ZoneRegion
from .propagation import Environment
from .regulatory import METHODS, PRESETS, RegulatoryParams, Transmitter, preset

TOWER_COLUMNS = ("id", "lat", "lon", "power", "power_unit", "channel", "haat_m", "env", "zone")

# (kW, haat range in m) for the three transmitter classes of the synthetic set
_POWER_CLASSES = ((0.05, (30.0, 60.0)), (1.0, (60.0, 150.0)), (10.0, (100.0, 200.0)))
_POWER_WEIGHTS = (0.4, 0.45, 0.15)
_ENVS = tuple(Environment)
_ENV_WEIGHTS = (0.2, 0.3, 0.3, 0.2)
_SAMPLE_CHANNELS = range(21, 35)


class TowerFileError(ValueError):
    pass


def data_path(name: str) -> Path:
    """Path to a file shipped in the package ``data`` directory."""
    return Path(str(resources.files("tvws") / "data" / name))


def kw_to_dbm(kw: float) -> float:
    if not kw > 0:
        raise ValueError(f"power must be positive, got {kw} kW")
    return 10.0 * math.log10(kw * 1e6)


def parse_tower_csv(path: str | Path) -> list[Transmitter]:
    """Read towers from a CSV with header
    ``id,lat,lon,power,power_unit,channel,haat_m,env,zone``.

    ``power_unit`` is ``kW`` or ``dBm``. Lines starting with ``#`` are skipped.
    Any malformed row raises ``TowerFileError`` naming the line number.
    """
    with open(path, encoding="utf-8", newline="") as f:
        text = f.read()
    lines = text.splitlines()
    numbered = [(i + 1, ln) for i, ln in enumerate(lines) if ln.strip() and not ln.startswith("#")]
    if not numbered:
        raise TowerFileError(f"{path}: empty tower file")
    header = next(csv.reader([numbered[0][1]]))
    if tuple(h.strip() for h in header) != TOWER_COLUMNS:
        raise TowerFileError(f"{path}:{numbered[0][0]}: header must be {','.join(TOWER_COLUMNS)}")
    towers = []
    seen: set[str] = set()
    for lineno, line in numbered[1:]:
        row = next(csv.reader([line]))
        if len(row) != len(TOWER_COLUMNS):
            raise TowerFileError(f"{path}:{lineno}: expected {len(TOWER_COLUMNS)} fields, got {len(row)}")
        rec = dict(zip(TOWER_COLUMNS, (v.strip() for v in row)))
        try:
            unit = rec["power_unit"]
            value = float(rec["power"])
            if unit == "kW":
                power = kw_to_dbm(value)
            elif unit == "dBm":
                power = value
            else:
                raise ValueError(f"unknown power unit {unit!r} (use kW or dBm)")
            tx = Transmitter(
                id=rec["id"],
                location=GeoPoint(float(rec["lat"]), float(rec["lon"])),
                power_dbm=power,
                channel=int(rec["channel"]),
                antenna_height_m=float(rec["haat_m"]),
                env=Environment(rec["env"]),
                zone=rec["zone"],
            )
        except ValueError as e:
            raise TowerFileError(f"{path}:{lineno}: {e}") from None
        if tx.id in seen:
            raise TowerFileError(f"{path}:{lineno}: duplicate tower id {tx.id!r}")
        seen.add(tx.id)
        towers.append(tx)
    return towers


def _power_field(dbm: float) -> tuple[str, str]:
    kw = 10.0 ** (dbm / 10.0) / 1e6
    if abs(kw_to_dbm(round(kw, 6)) - dbm) < 1e-9:
        return f"{round(kw, 6):g}", "kW"
    return f"{dbm:.4f}", "dBm"


def tower_csv(towers: Sequence[Transmitter], header: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in header:
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TOWER_COLUMNS)
    for t in towers:
        power, unit = _power_field(t.power_dbm)
        w.writerow([t.id, f"{t.location.lat_deg:.5f}", f"{t.location.lon_deg:.5f}", power, unit,
                    t.channel, f"{t.antenna_height_m:g}", t.env.value, t.zone])
    return buf.getvalue()


def gen_sample_towers(seed: int, zones: Sequence[ZoneRegion], count: int,
                      density_profile: Mapping[str, float] | None = None) -> list[Transmitter]:
    """Deterministic synthetic towers placed uniformly (in lat/lon) inside zones.

    ``density_profile`` maps zone name to a relative weight; tower counts per
    zone are drawn from the corresponding multinomial. Without a profile the
    weights are the zones' planar areas.
    """
    if count <= 0:
        raise ValueError("count must be positive")
    if not zones:
        raise ValueError("at least one zone is required")
    names = [z.name for z in zones]
    if density_profile is None:
        weights = np.array([z.planar_area() for z in zones])
    else:
        unknown = set(density_profile) - set(names)
        if unknown:
            raise ValueError(f"density_profile names unknown zones: {sorted(unknown)}")
        weights = np.array([float(density_profile.get(n, 0.0)) for n in names])
    if (weights < 0).any() or not weights.sum() > 0:
        raise ValueError("zone weights must be non-negative with a positive sum")
    for z, w in zip(zones, weights):
        if w > 0 and not z.planar_area() > 0:
            raise ValueError(f"zone {z.name!r} has zero area")
    rng = np.random.default_rng(seed)
    per_zone = rng.multinomial(count, weights / weights.sum())
    towers = []
    for z, n in zip(zones, per_zone):
        lat0, lon0, lat1, lon1 = z.bbox()
        k = 0
        while k < n:
            lat = round(float(rng.uniform(lat0, lat1)), 5)
            lon = round(float(rng.uniform(lon0, lon1)), 5)
            if not z.contains(lat, lon):
                continue
            cls = rng.choice(len(_POWER_CLASSES), p=_POWER_WEIGHTS)
            kw, (h0, h1) = _POWER_CLASSES[cls]
            towers.append(Transmitter(
                id=f"{z.name}-{k + 1:03d}",
                location=GeoPoint(lat, lon),
                power_dbm=kw_to_dbm(kw),
                channel=int(rng.choice(_SAMPLE_CHANNELS)),
                antenna_height_m=float(round(rng.uniform(h0, h1))),
                env=_ENVS[rng.choice(len(_ENVS), p=_ENV_WEIGHTS)],
                zone=z.name,
            ))
            k += 1
    return towers


@dataclass
class RunConfig:
    method: str | None = None
    preset: str = "pollution-15"
    resolution_deg: float = 0.05
    zones_path: Path = field(default_factory=lambda: data_path("india_zones.geojson"))
    towers_path: Path = field(default_factory=lambda: data_path("sample_254.csv"))
    out_dir: Path = Path("out")
    basis: str = "fcc"
    extrapolate: bool = True
    adjacent: bool = True
    min_separation: int = 2
    seed: int = 2013
    param_overrides: dict[str, float] = field(default_factory=dict)

    def resolved_method(self) -> str:
        return self.method or preset(self.preset)[0]

    def params(self) -> RegulatoryParams:
        _, base = preset(self.preset)
        return replace(base, extrapolate=self.extrapolate, **self.param_overrides)

    def validate(self, need_towers: bool = True, need_zones: bool = True) -> None:
        if self.preset not in PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}; choose from {', '.join(PRESETS)}")
        if self.method is not None and self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        if need_towers and not Path(self.towers_path).is_file():
            raise FileNotFoundError(f"tower file not found: {self.towers_path}")
        if need_zones and not Path(self.zones_path).is_file():
            raise FileNotFoundError(f"zone file not found: {self.zones_path}")


_PARAM_FIELDS = {f.name for f in fields(RegulatoryParams)} - {"extrapolate"}
_BOOL = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


def apply_setting(cfg: RunConfig, key: str, value: str) -> None:
    key = key.strip().replace("-", "_")
    value = value.strip()
    if key in _PARAM_FIELDS:
        cfg.param_overrides[key] = float(value)
    elif key in ("method", "preset", "basis"):
        setattr(cfg, key, value)
    elif key in ("resolution_deg", "resolution"):
        cfg.resolution_deg = float(value)
    elif key in ("zones_path", "zones"):
        cfg.zones_path = Path(value)
    elif key in ("towers_path", "towers"):
        cfg.towers_path = Path(value)
    elif key in ("out_dir", "out"):
        cfg.out_dir = Path(value)
    elif key in ("extrapolate", "adjacent"):
        if value.lower() not in _BOOL:
            raise ValueError(f"{key}: expected a boolean, got {value!r}")
        setattr(cfg, key, _BOOL[value.lower()])
    elif key in ("min_separation", "seed"):
        setattr(cfg, key, int(value))
    else:
        raise ValueError(f"unknown config key {key!r}")


def load_config(path: str | Path, cfg: RunConfig | None = None) -> RunConfig:
    """Flat ``key=value`` file; blank lines and ``#`` comments ignored."""
    cfg = cfg or RunConfig()
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            k, v = line.split("=", 1)
            try:
                apply_setting(cfg, k, v)
            except ValueError as e:
                raise ValueError(f"{path}:{lineno}: {e}") from None
    return cfg
