"""Per-tower exclusion radii under the pollution viewpoint, the protection
viewpoint and the FCC Grade-B rule."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import Iterable, Literal

from .geo import GeoPoint
from .propagation import (
    UHF_BAND_IV,
    Distance,
    Environment,
    channel_bounds,
    channel_center_mhz,
    dbu_to_dbm,
    hata_inverse_distance,
)

Method = Literal["pollution", "protection", "fcc", "intersection"]
METHODS: tuple[str, ...] = ("pollution", "protection", "fcc", "intersection")
ZONE_KINDS = ("pollution-co", "pollution-adj", "notalk-co", "notalk-adj", "fcc-notalk")

BAND_CENTER_MHZ = (UHF_BAND_IV.band_start_mhz
                   + UHF_BAND_IV.n_channels * UHF_BAND_IV.channel_width_mhz / 2.0)

# Drop below the Grade-B field strength that a secondary may produce at the contour.
FCC_SECONDARY_MARGIN_DB = 23.0


@dataclass(frozen=True)
class Transmitter:
    id: str
    location: GeoPoint
    power_dbm: float
    channel: int
    antenna_height_m: float
    env: Environment = Environment.URBAN_LARGE
    zone: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "env", Environment(self.env))
        if not 30.0 <= self.power_dbm <= 90.0:
            raise ValueError(f"tower {self.id}: power {self.power_dbm} dBm outside [30, 90]")
        if not self.antenna_height_m > 0:
            raise ValueError(f"tower {self.id}: antenna height must be positive")
        if not UHF_BAND_IV.contains(self.channel):
            raise ValueError(f"tower {self.id}: channel {self.channel} outside 21..35")

    @property
    def f_mhz(self) -> float:
        return channel_center_mhz(self.channel)


@dataclass(frozen=True)
class RegulatoryParams:
    """Regulatory knobs. Defaults: gamma 15 dB, Psi 1 dB, FCC Grade-B 41 dBu."""

    gamma_co_db: float = 15.0
    gamma_adj_db: float = 45.0
    psi_db: float = 1.0
    psi_adj_extra_db: float = 27.0
    delta_db: float = 45.0
    secondary_power_dbm: float = 36.0
    secondary_haat_m: float = 30.0
    grade_b_dbu: float = 41.0
    noise_dbm: float = -104.97
    rx_height_m: float = 1.5
    extrapolate: bool = True

    def __post_init__(self) -> None:
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, float) and not math.isfinite(v):
                raise ValueError(f"{f.name} must be finite")
        if self.gamma_adj_db < self.gamma_co_db:
            raise ValueError("gamma_adj_db must be >= gamma_co_db")
        if self.psi_adj_extra_db < 0:
            raise ValueError("psi_adj_extra_db must be >= 0")
        if self.secondary_haat_m <= 0 or self.rx_height_m <= 0:
            raise ValueError("antenna heights must be positive")


PRESETS: dict[str, tuple[str, RegulatoryParams]] = {
    "pollution-5": ("pollution", RegulatoryParams(gamma_co_db=5.0)),
    "pollution-10": ("pollution", RegulatoryParams(gamma_co_db=10.0)),
    "pollution-15": ("pollution", RegulatoryParams(gamma_co_db=15.0)),
    "protection-0.1": ("protection", RegulatoryParams(psi_db=0.1)),
    "protection-1": ("protection", RegulatoryParams(psi_db=1.0)),
    "fcc": ("fcc", RegulatoryParams()),
}


def preset(name: str) -> tuple[str, RegulatoryParams]:
    """Return ``(default_method, params)`` for a named preset."""
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None


@dataclass(frozen=True)
class ExclusionZone:
    tower_id: str
    center: GeoPoint
    channel: int
    radius_km: float
    kind: str
    extrapolated: bool = False
    clamped: bool = False


def _solve(p: RegulatoryParams, f_mhz: float, tx_h: float, rx_h: float,
           pl_db: float, env: Environment) -> Distance:
    d = hata_inverse_distance(f_mhz, tx_h, rx_h, pl_db, env)
    if d.extrapolated and not p.extrapolate:
        raise ValueError(
            f"radius {d.km:.4f} km (f={f_mhz} MHz, hb={tx_h} m) needs Hata extrapolation, "
            "which is disabled"
        )
    return d


def pollution_radius(tx: Transmitter, p: RegulatoryParams, adjacent: bool = False) -> Distance:
    """Distance within which the primary exceeds the secondary receiver's tolerance."""
    gamma = p.gamma_adj_db if adjacent else p.gamma_co_db
    pl = tx.power_dbm - p.noise_dbm - gamma
    return _solve(p, tx.f_mhz, tx.antenna_height_m, p.rx_height_m, pl, tx.env)


def protection_radius(tx: Transmitter, p: RegulatoryParams) -> Distance:
    pl = tx.power_dbm - p.noise_dbm - p.delta_db - p.psi_db
    return _solve(p, tx.f_mhz, tx.antenna_height_m, p.rx_height_m, pl, tx.env)


def separation_distance(p: RegulatoryParams, adjacent: bool = False,
                        f_mhz: float = BAND_CENTER_MHZ,
                        env: Environment = Environment.URBAN_LARGE) -> Distance:
    """Secondary-to-TV-receiver distance at which the secondary's signal has
    dropped to the fading margin. Adjacent channels add ``psi_adj_extra_db``."""
    psi = p.psi_db + (p.psi_adj_extra_db if adjacent else 0.0)
    pl = p.secondary_power_dbm - psi
    return _solve(p, f_mhz, p.secondary_haat_m, p.rx_height_m, pl, Environment(env))


def no_talk_radius(tx: Transmitter, p: RegulatoryParams, adjacent: bool = False) -> Distance:
    # The adjacent protection radius equals the co-channel one.
    return protection_radius(tx, p) + separation_distance(p, adjacent, tx.f_mhz, tx.env)


def fcc_grade_b_radius(tx: Transmitter, p: RegulatoryParams) -> Distance:
    threshold_dbm = dbu_to_dbm(p.grade_b_dbu, *channel_bounds(tx.channel))
    pl = tx.power_dbm - threshold_dbm
    return _solve(p, tx.f_mhz, tx.antenna_height_m, p.rx_height_m, pl, tx.env)


def fcc_separation_distance(tx: Transmitter, p: RegulatoryParams) -> Distance:
    """Distance beyond the Grade-B contour at which a secondary yields
    ``grade_b_dbu - 23`` dBu at the contour receiver."""
    limit_dbm = dbu_to_dbm(p.grade_b_dbu - FCC_SECONDARY_MARGIN_DB, *channel_bounds(tx.channel))
    pl = p.secondary_power_dbm - limit_dbm
    return _solve(p, tx.f_mhz, p.secondary_haat_m, p.rx_height_m, pl, tx.env)


def fcc_no_talk_radius(tx: Transmitter, p: RegulatoryParams) -> Distance:
    return fcc_grade_b_radius(tx, p) + fcc_separation_distance(tx, p)


def adjacent_channels(c: int) -> list[int]:
    return [n for n in (c - 1, c + 1) if UHF_BAND_IV.contains(n)]


def _zone(tx: Transmitter, channel: int, d: Distance, kind: str) -> ExclusionZone:
    return ExclusionZone(tx.id, tx.location, channel, d.km, kind, d.extrapolated, d.clamped)


def exclusion_zones(tx: Transmitter, p: RegulatoryParams, method: str,
                    adjacent: bool = True) -> list[ExclusionZone]:
    """Exclusion disks for one tower.

    ``adjacent=False`` drops the adjacent-channel disks (main-channel-only runs).
    ``intersection`` returns the pollution disks followed by the protection
    disks: a location is white space only when it lies outside all of them.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    out: list[ExclusionZone] = []
    if method in ("pollution", "intersection"):
        out.append(_zone(tx, tx.channel, pollution_radius(tx, p), "pollution-co"))
        if adjacent:
            r = pollution_radius(tx, p, adjacent=True)
            out.extend(_zone(tx, c, r, "pollution-adj") for c in adjacent_channels(tx.channel))
    if method in ("protection", "intersection"):
        out.append(_zone(tx, tx.channel, no_talk_radius(tx, p), "notalk-co"))
        if adjacent:
            r = no_talk_radius(tx, p, adjacent=True)
            out.extend(_zone(tx, c, r, "notalk-adj") for c in adjacent_channels(tx.channel))
    if method == "fcc":
        out.append(_zone(tx, tx.channel, fcc_no_talk_radius(tx, p), "fcc-notalk"))
    return out


def all_exclusion_zones(towers: Iterable[Transmitter], p: RegulatoryParams, method: str,
                        adjacent: bool = True) -> list[ExclusionZone]:
    return [z for tx in towers for z in exclusion_zones(tx, p, method, adjacent)]


# Radii reported for the Sinhagad Fort (Pune) tower: 10 kW, 100 m, channel 29, urban.
PUNE_REFERENCE_KM = {
    "pollution-co (gamma=15)": 37.70,
    "pollution-adj (gamma=45)": 4.24,
    "protection (psi=1)": 33.82,
    "notalk-co (psi=1)": 33.83,
    "notalk-adj (psi=1)": 33.82,
    "fcc-notalk": 41.60,
}


def pune_radii(tx: Transmitter, p: RegulatoryParams | None = None) -> dict[str, Distance]:
    """Our radii for the entries of ``PUNE_REFERENCE_KM``."""
    p = p or RegulatoryParams()
    p15 = replace(p, gamma_co_db=15.0, gamma_adj_db=45.0, psi_db=1.0)
    return {
        "pollution-co (gamma=15)": pollution_radius(tx, p15),
        "pollution-adj (gamma=45)": pollution_radius(tx, p15, adjacent=True),
        "protection (psi=1)": protection_radius(tx, p15),
        "notalk-co (psi=1)": no_talk_radius(tx, p15),
        "notalk-adj (psi=1)": no_talk_radius(tx, p15, adjacent=True),
        "fcc-notalk": fcc_no_talk_radius(tx, p15),
    }


def discrepancy_report(tx: Transmitter, p: RegulatoryParams | None = None,
                       tolerance: float = 0.30) -> str:
    """Table of computed vs reference radii with relative error."""
    ours = pune_radii(tx, p)
    lines = [
        f"# discrepancy_report tower={tx.id} tolerance=+/-{tolerance:.0%}",
        f"{'radius':<26}{'reference_km':>14}{'computed_km':>14}{'rel_error':>11}  status",
    ]
    for key, ref in PUNE_REFERENCE_KM.items():
        got = ours[key].km
        rel = (got - ref) / ref
        status = "ok" if abs(rel) <= tolerance else "OUT-OF-BAND"
        lines.append(f"{key:<26}{ref:>14.4f}{got:>14.4f}{rel:>+11.4f}  {status}")
    return "\n".join(lines) + "\n"
