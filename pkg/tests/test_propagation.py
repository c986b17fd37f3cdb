import math

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from tvws.propagation import (
    Environment,
    channel_bounds,
    dbu_to_dbm,
    hata_inverse_distance,
    hata_path_loss,
    noise_floor_dbm,
)

from conftest import bisect_distance, hand_hata


envs = st.sampled_from([e.value for e in Environment])


@pytest.mark.parametrize("c,expected", [(21, (470, 478)), (29, (534, 542)), (35, (582, 590))])
def test_channel_bounds(c, expected):
    assert channel_bounds(c) == expected


@pytest.mark.parametrize("c", [20, 36, 0])
def test_channel_bounds_rejects(c):
    with pytest.raises(ValueError):
        channel_bounds(c)


def test_noise_floor():
    assert noise_floor_dbm(8e6) == pytest.approx(-104.97, abs=0.01)
    assert noise_floor_dbm(1) == -174.0
    assert noise_floor_dbm(6e6) == pytest.approx(-106.22, abs=0.01)
    for bad in (0, -1):
        with pytest.raises(ValueError):
            noise_floor_dbm(bad)


@given(st.floats(1.0, 1e10))
def test_noise_floor_doubling(b):
    assert noise_floor_dbm(2 * b) - noise_floor_dbm(b) == pytest.approx(10 * math.log10(2), abs=1e-9)
    assert 10 * math.log10(2) == pytest.approx(3.0103, abs=1e-4)


def test_hata_examples():
    pl10 = hata_path_loss(538, 100, 1.5, 10, "urban-large")
    assert pl10 == pytest.approx(145.15, abs=0.05)
    pl1 = hata_path_loss(538, 100, 1.5, 1, "urban-large")
    assert pl10 - pl1 == pytest.approx(44.9 - 6.55 * 2, abs=1e-9)
    sub = hata_path_loss(538, 100, 1.5, 10, "suburban")
    assert sub < pl10
    assert sub == pytest.approx(hand_hata(538, 100, 1.5, 10, "suburban"), abs=1e-9)


@given(st.floats(150, 1500), st.floats(30, 200), st.floats(1, 10), st.floats(1, 20), envs)
def test_hata_matches_hand_formula(f, hb, hm, d, env):
    assert hata_path_loss(f, hb, hm, d, env) == pytest.approx(hand_hata(f, hb, hm, d, env), abs=1e-9)


def test_hata_out_of_range():
    with pytest.raises(ValueError, match="extrapolate"):
        hata_path_loss(538, 100, 1.5, 30, "urban-large")
    with pytest.raises(ValueError):
        hata_path_loss(538, 10, 1.5, 5, "urban-large")
    assert hata_path_loss(538, 100, 1.5, 30, "urban-large", extrapolate=True) == pytest.approx(
        hand_hata(538, 100, 1.5, 30, "urban-large"))
    with pytest.raises(ValueError):
        hata_path_loss(538, 100, 1.5, 0, "urban-large", extrapolate=True)


@given(st.floats(150, 1500), st.floats(30, 200), st.floats(1, 10), st.floats(1, 19), st.floats(0.01, 1), envs)
def test_hata_increasing_in_distance(f, hb, hm, d, dd, env):
    assert hata_path_loss(f, hb, hm, d + dd, env) > hata_path_loss(f, hb, hm, d, env)


@given(st.floats(150, 1490), st.floats(1, 10), st.floats(30, 200), st.floats(1, 1500), st.floats(1, 20), envs)
def test_hata_increasing_in_frequency(f, df, hb, hm_unused, d, env):
    hm = 1.5
    f2 = min(f + df, 1500)
    assume(f2 > f)
    assert hata_path_loss(f2, hb, hm, d, env) > hata_path_loss(f, hb, hm, d, env)


@given(st.floats(150, 1500), st.floats(30, 195), st.floats(0.5, 5), st.floats(1, 10), st.floats(1, 20), envs)
def test_hata_decreasing_in_tx_height(f, hb, dh, hm, d, env):
    hb2 = min(hb + dh, 200)
    assert hata_path_loss(f, hb2, hm, d, env) < hata_path_loss(f, hb, hm, d, env)


@pytest.mark.parametrize("d", [10.0, 37.70])
def test_inverse_round_trip_examples(d):
    pl = hata_path_loss(538, 100, 1.5, d, "urban-large", extrapolate=True)
    res = hata_inverse_distance(538, 100, 1.5, pl, "urban-large")
    assert res.km == pytest.approx(d, abs=1e-6)
    assert not res.clamped


def test_inverse_clamps_tiny_loss():
    res = hata_inverse_distance(538, 30, 1.5, 35.0, "urban-large")
    assert res.km == 0.01 and res.clamped and res.extrapolated
    big = hata_inverse_distance(538, 200, 1.5, 300.0, "open")
    assert big.km == 500.0 and big.clamped


@given(st.floats(150, 1500), st.floats(30, 200), st.floats(1, 10), st.floats(0.02, 400), envs)
def test_inverse_matches_bisection(f, hb, hm, d, env):
    pl = hand_hata(f, hb, hm, d, env)
    res = hata_inverse_distance(f, hb, hm, pl, env)
    assert res.km == pytest.approx(bisect_distance(pl, f, hb, hm, env), rel=1e-9)
    assert res.km == pytest.approx(d, rel=1e-9)


def test_inverse_rejects_nonfinite():
    with pytest.raises(ValueError):
        hata_inverse_distance(538, 100, 1.5, float("inf"))


def test_dbu_to_dbm_examples():
    assert dbu_to_dbm(41, 534, 542) == pytest.approx(-88.638, abs=0.005)
    assert dbu_to_dbm(41, 600, 630) == pytest.approx(-89.8, abs=1e-12)
    assert dbu_to_dbm(41, 470, 478) == pytest.approx(-87.536, abs=0.005)
    with pytest.raises(ValueError):
        dbu_to_dbm(41, 0, 8)
    with pytest.raises(ValueError):
        dbu_to_dbm(41, 542, 534)


@given(st.floats(-50, 150), st.floats(-20, 20))
def test_dbu_to_dbm_unit_slope(e, de):
    assert dbu_to_dbm(e + de, 534, 542) - dbu_to_dbm(e, 534, 542) == pytest.approx(de, abs=1e-9)
