"""Okumura-Hata path loss, its inverse, thermal noise, the UHF band plan and
field-strength conversion."""

from __future__ import annotations

import math
from enum import Enum
from typing import NamedTuple

FIRST_CHANNEL = 21
LAST_CHANNEL = 35
N_CHANNELS = LAST_CHANNEL - FIRST_CHANNEL + 1
CHANNEL_WIDTH_MHZ = 8.0
BAND_START_MHZ = 470.0

# Nominal validity ranges of the Hata fit.
HATA_F_MHZ = (150.0, 1500.0)
HATA_TX_HEIGHT_M = (30.0, 200.0)
HATA_RX_HEIGHT_M = (1.0, 10.0)
HATA_D_KM = (1.0, 20.0)

MIN_DISTANCE_KM = 0.01
MAX_DISTANCE_KM = 500.0


class Environment(str, Enum):
    URBAN_LARGE = "urban-large"
    URBAN_MEDIUM = "urban-medium"
    SUBURBAN = "suburban"
    OPEN = "open"


class BandPlan(NamedTuple):
    """UHF Band-IV: fifteen 8 MHz channels numbered 21..35 from 470 MHz."""

    first_channel: int = FIRST_CHANNEL
    channel_width_mhz: float = CHANNEL_WIDTH_MHZ
    band_start_mhz: float = BAND_START_MHZ
    n_channels: int = N_CHANNELS

    @property
    def last_channel(self) -> int:
        return self.first_channel + self.n_channels - 1

    @property
    def channels(self) -> range:
        return range(self.first_channel, self.last_channel + 1)

    def contains(self, c: int) -> bool:
        return self.first_channel <= c <= self.last_channel


UHF_BAND_IV = BandPlan()


class Distance(NamedTuple):
    """A distance solved from a path-loss budget.

    ``clamped`` marks results pinned to [0.01, 500] km; ``extrapolated`` marks
    results computed outside the nominal Hata ranges.
    """

    km: float
    clamped: bool = False
    extrapolated: bool = False

    def __add__(self, other):  # type: ignore[override]
        if isinstance(other, Distance):
            return Distance(self.km + other.km, self.clamped or other.clamped,
                            self.extrapolated or other.extrapolated)
        return NotImplemented

    def __float__(self) -> float:
        return float(self.km)


def channel_bounds(c: int, band: BandPlan = UHF_BAND_IV) -> tuple[float, float]:
    """(f_low, f_high) in MHz for channel ``c``."""
    if not band.contains(c):
        raise ValueError(f"channel {c} outside {band.first_channel}..{band.last_channel}")
    lo = band.band_start_mhz + (c - band.first_channel) * band.channel_width_mhz
    return lo, lo + band.channel_width_mhz


def channel_center_mhz(c: int, band: BandPlan = UHF_BAND_IV) -> float:
    lo, hi = channel_bounds(c, band)
    return (lo + hi) / 2.0


def noise_floor_dbm(bandwidth_hz: float) -> float:
    """kTB at 290 K: -174 dBm/Hz + 10 log10(B)."""
    if not bandwidth_hz > 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth_hz}")
    return -174.0 + 10.0 * math.log10(bandwidth_hz)


def dbu_to_dbm(e_dbu: float, f_low_mhz: float, f_high_mhz: float) -> float:
    """Convert field strength (dBuV/m) to received power (dBm) over a channel."""
    if not (f_low_mhz > 0 and f_high_mhz > 0):
        raise ValueError("channel frequencies must be positive")
    if not f_high_mhz > f_low_mhz:
        raise ValueError("f_high_mhz must exceed f_low_mhz")
    return e_dbu - 130.8 + 20.0 * math.log10(1230.0 / (f_high_mhz + f_low_mhz))


def _mobile_correction(f_mhz: float, hm: float, env: Environment) -> float:
    lf = math.log10(f_mhz)
    if env is Environment.URBAN_LARGE:
        if f_mhz >= 400.0:
            return 3.2 * math.log10(11.75 * hm) ** 2 - 4.97
        return 8.29 * math.log10(1.54 * hm) ** 2 - 1.1
    return (1.1 * lf - 0.7) * hm - (1.56 * lf - 0.8)


def _env_offset(f_mhz: float, env: Environment) -> float:
    if env is Environment.SUBURBAN:
        return -2.0 * math.log10(f_mhz / 28.0) ** 2 - 5.4
    if env is Environment.OPEN:
        lf = math.log10(f_mhz)
        return -4.78 * lf * lf + 18.33 * lf - 40.94
    return 0.0


def in_hata_range(f_mhz: float, tx_height_m: float, rx_height_m: float) -> bool:
    return (HATA_F_MHZ[0] <= f_mhz <= HATA_F_MHZ[1]
            and HATA_TX_HEIGHT_M[0] <= tx_height_m <= HATA_TX_HEIGHT_M[1]
            and HATA_RX_HEIGHT_M[0] <= rx_height_m <= HATA_RX_HEIGHT_M[1])


def _hata_terms(f_mhz: float, tx_height_m: float, rx_height_m: float,
                env: Environment) -> tuple[float, float]:
    """Return (loss at 1 km, slope per decade of distance)."""
    if f_mhz <= 0 or tx_height_m <= 0 or rx_height_m <= 0:
        raise ValueError("frequency and antenna heights must be positive")
    env = Environment(env)
    lhb = math.log10(tx_height_m)
    intercept = (69.55 + 26.16 * math.log10(f_mhz) - 13.82 * lhb
                 - _mobile_correction(f_mhz, rx_height_m, env) + _env_offset(f_mhz, env))
    return intercept, 44.9 - 6.55 * lhb


def hata_path_loss(f_mhz: float, tx_height_m: float, rx_height_m: float, d_km: float,
                   env: Environment | str = Environment.URBAN_LARGE,
                   extrapolate: bool = False) -> float:
    """Median Okumura-Hata path loss in dB.

    Outside 150-1500 MHz, hb 30-200 m, hm 1-10 m or d 1-20 km this raises
    ``ValueError`` unless ``extrapolate`` is set, in which case the closed form
    is evaluated as is.
    """
    if not d_km > 0:
        raise ValueError(f"distance must be positive, got {d_km}")
    if not extrapolate and not (in_hata_range(f_mhz, tx_height_m, rx_height_m)
                                and HATA_D_KM[0] <= d_km <= HATA_D_KM[1]):
        raise ValueError(
            f"Hata parameters out of range (f={f_mhz} MHz, hb={tx_height_m} m, "
            f"hm={rx_height_m} m, d={d_km} km); pass extrapolate=True to evaluate anyway"
        )
    intercept, slope = _hata_terms(f_mhz, tx_height_m, rx_height_m, Environment(env))
    return intercept + slope * math.log10(d_km)


def hata_inverse_distance(f_mhz: float, tx_height_m: float, rx_height_m: float,
                          pl_db: float,
                          env: Environment | str = Environment.URBAN_LARGE) -> Distance:
    """Distance (km) at which the Hata loss equals ``pl_db``.

    The closed form is inverted directly; results are clamped to
    [0.01, 500] km and flagged.
    """
    if not math.isfinite(pl_db):
        raise ValueError(f"path loss must be finite, got {pl_db}")
    intercept, slope = _hata_terms(f_mhz, tx_height_m, rx_height_m, Environment(env))
    exponent = (pl_db - intercept) / slope
    lo, hi = math.log10(MIN_DISTANCE_KM), math.log10(MAX_DISTANCE_KM)
    clamped = True
    if exponent < lo:
        d = MIN_DISTANCE_KM
    elif exponent > hi:
        d = MAX_DISTANCE_KM
    else:
        d, clamped = 10.0 ** exponent, False
    extrapolated = (not in_hata_range(f_mhz, tx_height_m, rx_height_m)
                    or not HATA_D_KM[0] <= d <= HATA_D_KM[1])
    return Distance(d, clamped, extrapolated)
