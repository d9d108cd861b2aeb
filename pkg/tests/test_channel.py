import cmath
import math
from dataclasses import replace

import numpy as np
import pytest

from fpfa.channel import (
    SPEED_OF_LIGHT,
    ArraySpec,
    BandSpec,
    UserPaths,
    channel_row,
    drop_users,
    make_bands,
    pseudo_channel,
    rx_port_phase_vector,
    tx_steering_vector,
    upa_dims,
)
from fpfa.config import ConfigError, ScenarioConfig

BAND = BandSpec(1, 300e9, 30e9)


def los_user(polar, azimuth, rx=0.3, distance=20.0, scale=1.0, user=0):
    return UserPaths(
        user=user,
        distance=np.array([distance]),
        azimuth=np.array([azimuth]),
        polar=np.array([polar]),
        rx_angle=np.array([rx]),
        scale=np.array([scale], dtype=complex),
    )


def brute_channel(user, band, n_ports, port_spacing, dims):
    """Triple loop over ports, elements and paths."""
    nx, nz = dims
    lam = band.wavelength
    out = np.zeros((n_ports, nx * nz), dtype=complex)
    for n in range(n_ports):
        for x in range(nx):
            for z in range(nz):
                acc = 0j
                for p in range(user.n_paths):
                    amp = SPEED_OF_LIGHT / (4 * math.pi * band.center_freq * user.distance[p]) * user.scale[p]
                    dist = cmath.exp(-2j * math.pi * user.distance[p] / lam)
                    rx = cmath.exp(2j * math.pi / lam * port_spacing * n * math.sin(user.rx_angle[p]))
                    tx_phase = math.pi * (
                        x * math.sin(user.polar[p]) * math.cos(user.azimuth[p]) + z * math.cos(user.polar[p])
                    )
                    acc += amp * dist * rx * cmath.exp(-1j * tx_phase)
                out[n, x * nz + z] = acc
    return out


def test_band_spacing_is_half_wavelength():
    for band in make_bands(ScenarioConfig()):
        assert band.antenna_spacing == SPEED_OF_LIGHT / (2 * band.center_freq)
        assert band.bandwidth == pytest.approx(0.1 * band.center_freq)


@pytest.mark.parametrize("n,dims", [(32, (8, 4)), (64, (8, 8)), (128, (16, 8)), (256, (16, 16)), (7, (7, 1))])
def test_upa_dims(n, dims):
    assert upa_dims(n) == dims


def test_port_spacing_includes_endpoints():
    array = ArraySpec(128, 4, 15, 500, 15.0)
    assert array.port_spacing(BAND) == pytest.approx(15 * BAND.wavelength / 499)
    assert ArraySpec(128, 4, 15, 1, 15.0).port_spacing(BAND) == 0.0


# ------------------------------------------------------------------ drops

def test_drop_geometry_bounds():
    c = ScenarioConfig(n_users=60)
    users = drop_users(c, 7)
    assert len(users) == 60
    lo, hi = math.hypot(1.0, 18.5), math.hypot(25.0, 18.5)
    for u in users:
        assert lo <= u.distance[0] <= hi
        d_h = math.sqrt(u.distance[0] ** 2 - 18.5**2)
        assert u.distance[1] == pytest.approx(math.hypot(d_h, 21.5))
        assert u.distance[1] >= u.distance[0]
        offset = abs(u.azimuth[0] - math.pi / 2)
        assert offset <= math.radians(60) + 1e-12


def test_drop_deterministic_and_seed_sensitive():
    c = ScenarioConfig(n_users=10)
    a, b, other = drop_users(c, 5), drop_users(c, 5), drop_users(c, 6)
    for x, y in zip(a, b):
        for f in ("distance", "azimuth", "polar", "rx_angle", "scale"):
            assert np.array_equal(getattr(x, f), getattr(y, f))
    assert not np.array_equal(a[0].distance, other[0].distance)


def test_drop_accepts_large_seed():
    assert len(drop_users(ScenarioConfig(n_users=2), 2**63 + 12345)) == 2


def test_reflection_path_geometry():
    u = drop_users(ScenarioConfig(n_users=1, reflection_mag=0.5, link_gain_db=0.0), 0)[0]
    assert u.scale[0] == 1
    assert u.scale[1] == pytest.approx(-0.5)
    # departure toward the ground bounce is steeper than the direct ray
    assert math.cos(u.polar[1]) < math.cos(u.polar[0]) < 0
    assert u.rx_angle[0] > 0 > u.rx_angle[1]


def test_los_only_drop():
    u = drop_users(ScenarioConfig(n_users=3, n_paths=1), 0)
    assert all(x.n_paths == 1 for x in u)


def test_drop_errors():
    c = ScenarioConfig(n_users=3)
    object.__setattr__(c, "n_paths", 3)
    with pytest.raises(ConfigError):
        drop_users(c, 0)


def test_gains_follow_friis_and_scale():
    u = drop_users(ScenarioConfig(n_users=1, link_gain_db=20.0), 3)[0]
    g = u.gains(300e9)
    assert abs(g[0]) == pytest.approx(10 * SPEED_OF_LIGHT / (4 * math.pi * 300e9 * u.distance[0]))
    doubled = replace(u, distance=2 * u.distance)
    assert np.allclose(np.abs(doubled.gains(300e9)), np.abs(g) / 2, rtol=1e-14)


# ------------------------------------------------------- steering vectors

def test_tx_boresight_depends_only_on_z():
    a = tx_steering_vector(BAND, 0.0, 1.1, (4, 3)).reshape(4, 3)
    expected = np.exp(1j * np.pi * np.arange(3))
    for row in a:
        assert np.allclose(row, expected, atol=1e-15)


def test_tx_unit_modulus_first_entry(rng):
    for _ in range(20):
        a = tx_steering_vector(BAND, rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi), (8, 4))
        assert a[0] == 1
        assert np.allclose(np.abs(a), 1, atol=1e-12)


def test_tx_inner_product_matches_phasor_sum():
    t1, p1, t2, p2 = 2.1, 0.7, 2.6, 1.9
    a = tx_steering_vector(BAND, t1, p1, (4, 4))
    b = tx_steering_vector(BAND, t2, p2, (4, 4))
    oracle = 0j
    for x in range(4):
        for z in range(4):
            ph1 = math.pi * (x * math.sin(t1) * math.cos(p1) + z * math.cos(t1))
            ph2 = math.pi * (x * math.sin(t2) * math.cos(p2) + z * math.cos(t2))
            oracle += cmath.exp(1j * (ph1 - ph2))
    assert abs(np.vdot(b, a) - oracle) < 1e-12


def test_rx_port_vector_edge_cases():
    assert np.array_equal(rx_port_phase_vector(BAND, 0.0, 6, 1e-4), np.ones(6))
    assert np.array_equal(rx_port_phase_vector(BAND, 0.8, 1, 1e-4), np.ones(1))


def test_rx_port_phase_difference():
    d_p = 15 * BAND.wavelength / 499
    phi = 0.37
    a = rx_port_phase_vector(BAND, phi, 500, d_p)
    n = 250
    expected = (2 * math.pi / BAND.wavelength * d_p * (n - 1) * math.sin(phi)) % (2 * math.pi)
    measured = (np.angle(a[n - 1]) - np.angle(a[0])) % (2 * math.pi)
    assert min(abs(measured - expected), 2 * math.pi - abs(measured - expected)) < 1e-9


# ---------------------------------------------------------- pseudo channel

def test_single_path_is_rank_one():
    tensor = pseudo_channel(los_user(2.3, 1.2), BAND, ArraySpec(32, 1, 1, 50, 15.0))
    s = np.linalg.svd(tensor.matrix, compute_uv=False)
    assert s[1] < 1e-10 * s[0]
    alpha = SPEED_OF_LIGHT / (4 * math.pi * BAND.center_freq * 20.0)
    assert np.allclose(np.abs(tensor.matrix), alpha, rtol=1e-12)


def test_two_path_matches_triple_loop(rng):
    user = UserPaths(
        user=3,
        distance=np.array([21.0, 24.5]),
        azimuth=np.array([1.2, 1.2]),
        polar=np.array([2.4, 2.6]),
        rx_angle=np.array([0.6, -0.8]),
        scale=np.array([1.0, 0.5 * np.exp(1j * 2.0)]),
    )
    array = ArraySpec(8, 1, 1, 4, 15.0)
    tensor = pseudo_channel(user, BAND, array)
    oracle = brute_channel(user, BAND, 4, array.port_spacing(BAND), array.dims)
    assert tensor.matrix.shape == (4, 8)
    assert np.abs(tensor.matrix - oracle).max() < 1e-12 * np.abs(oracle).max()


def test_rank_bounded_by_paths():
    c = ScenarioConfig(n_users=5)
    array = ArraySpec(32, 1, 1, 200, 15.0)
    for u in drop_users(c, 11):
        s = np.linalg.svd(pseudo_channel(u, BAND, array).matrix, compute_uv=False)
        assert np.all(s[2:] < 1e-10 * s[0])


def test_port_one_reference_invariance():
    u = drop_users(ScenarioConfig(n_users=1), 2)[0]
    a = pseudo_channel(u, BAND, ArraySpec(64, 1, 1, 500, 15.0)).matrix[0]
    b = pseudo_channel(u, BAND, ArraySpec(64, 1, 1, 3, 2.0)).matrix[0]
    assert np.array_equal(a, b)


def test_channel_row_port_one_formula():
    user = los_user(2.2, 0.9, rx=0.4, distance=17.0)
    tensor = pseudo_channel(user, BAND, ArraySpec(16, 1, 1, 10, 15.0))
    alpha = SPEED_OF_LIGHT / (4 * math.pi * BAND.center_freq * 17.0)
    a_t = tx_steering_vector(BAND, 2.2, 0.9, (4, 4))
    expected = alpha * np.exp(-2j * np.pi * 17.0 / BAND.wavelength) * a_t.conj()
    assert np.allclose(channel_row(tensor, 1), expected, rtol=0, atol=1e-15)


def test_channel_row_round_trip_and_norm():
    u = drop_users(ScenarioConfig(n_users=1), 4)[0]
    tensor = pseudo_channel(u, BAND, ArraySpec(16, 1, 1, 12, 15.0))
    stacked = np.stack([channel_row(tensor, n) for n in range(1, 13)])
    assert np.array_equal(stacked, tensor.matrix)
    row = channel_row(tensor, 5)
    acc = 0.0
    for v in row:
        acc += (v * v.conjugate()).real
    assert np.linalg.norm(row) == pytest.approx(math.sqrt(acc), rel=1e-13)


@pytest.mark.parametrize("port", [0, 13, -1])
def test_channel_row_out_of_range(port):
    tensor = pseudo_channel(los_user(2.0, 1.0), BAND, ArraySpec(16, 1, 1, 12, 15.0))
    with pytest.raises(IndexError):
        channel_row(tensor, port)
