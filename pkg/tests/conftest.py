from __future__ import annotations

import math
from pathlib import Path

import pytest

from tvws.geo import GeoPoint, ZoneRegion
from tvws.propagation import Environment
from tvws.regulatory import RegulatoryParams, Transmitter

FIXTURES = Path(__file__).parent / "fixtures"
R_EARTH = 6371.0


def gc_km(lat1, lon1, lat2, lon2):
    """Reference great-circle distance via the spherical law of cosines."""
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dl = math.radians(lon2 - lon1)
    c = math.sin(p1) * math.sin(p2) + math.cos(p1) * math.cos(p2) * math.cos(dl)
    return R_EARTH * math.acos(max(-1.0, min(1.0, c)))


def rect_zone(name, lat0, lon0, lat1, lon1):
    return ZoneRegion(name, (GeoPoint(lat0, lon0), GeoPoint(lat0, lon1),
                             GeoPoint(lat1, lon1), GeoPoint(lat1, lon0)))


def spherical_rect_area(lat0, lon0, lat1, lon1):
    return R_EARTH ** 2 * math.radians(lon1 - lon0) * (math.sin(math.radians(lat1)) - math.sin(math.radians(lat0)))


def cap_area(r_km):
    return 2 * math.pi * R_EARTH ** 2 * (1 - math.cos(r_km / R_EARTH))


def make_tower(id="t", lat=18.366, lon=73.755, power_dbm=70.0, channel=29, height=100.0,
               env=Environment.URBAN_LARGE, zone="west"):
    return Transmitter(id, GeoPoint(lat, lon), power_dbm, channel, height, env, zone)


def hand_hata(f, hb, hm, d, env):
    """Okumura-Hata written out term by term, independent of the module."""
    L = 69.55 + 26.16 * math.log10(f) - 13.82 * math.log10(hb) + (44.9 - 6.55 * math.log10(hb)) * math.log10(d)
    if env == "urban-large":
        a = 3.2 * math.log10(11.75 * hm) ** 2 - 4.97 if f >= 400 else 8.29 * math.log10(1.54 * hm) ** 2 - 1.1
        return L - a
    a = (1.1 * math.log10(f) - 0.7) * hm - (1.56 * math.log10(f) - 0.8)
    L -= a
    if env == "suburban":
        L -= 2 * math.log10(f / 28) ** 2 + 5.4
    elif env == "open":
        L -= 4.78 * math.log10(f) ** 2 - 18.33 * math.log10(f) + 40.94
    return L


def bisect_distance(pl, f, hb, hm, env, lo=1e-3, hi=1e4):
    """Independent inversion by bisection on log-distance."""
    a, b = math.log10(lo), math.log10(hi)
    for _ in range(200):
        m = (a + b) / 2
        if hand_hata(f, hb, hm, 10 ** m, env) < pl:
            a = m
        else:
            b = m
    return 10 ** ((a + b) / 2)


@pytest.fixture
def pune():
    return make_tower("pune")


@pytest.fixture
def params():
    return RegulatoryParams()


ACCEPTANCE_LINES: dict[int, str] = {}


def record(criterion, ok, detail):
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[criterion] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
