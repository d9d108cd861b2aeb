"""User drops and the port-resolved THz channel.

Coordinate frame: the BS array lies in the x-z plane (x horizontal, z
vertical) and faces +y. Departure directions are parameterised by the polar
angle ``theta`` (from +z) and the azimuth ``phi`` (from +x), so a user on
boresight has ``phi = pi/2``. Each user's PFA is a vertical line; its receive
angle is the elevation of the arriving ray (positive from above).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ConfigError, ScenarioConfig

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class BandSpec:
    index: int
    center_freq: float  # Hz
    bandwidth: float  # Hz

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.center_freq

    @property
    def antenna_spacing(self) -> float:
        return SPEED_OF_LIGHT / (2 * self.center_freq)


@dataclass(frozen=True)
class ArraySpec:
    """BS subarray and user PFA geometry for one band."""

    n_antennas: int  # whole BS array
    n_bands: int
    rf_chains: int
    n_ports: int
    port_line_length: float  # multiples of the band wavelength

    def __post_init__(self):
        if self.n_antennas % self.n_bands:
            raise ConfigError("n_antennas must be divisible by the band count")
        if self.n_ports < 1 or self.rf_chains < 1:
            raise ConfigError("n_ports and rf_chains must be >= 1")

    @property
    def subarray_size(self) -> int:
        return self.n_antennas // self.n_bands

    @property
    def dims(self) -> tuple[int, int]:
        return upa_dims(self.subarray_size)

    def port_spacing(self, band: BandSpec) -> float:
        if self.n_ports == 1:
            return 0.0
        return self.port_line_length * band.wavelength / (self.n_ports - 1)


@dataclass(frozen=True)
class UserPaths:
    """Multipath geometry of one user; band-independent.

    ``scale`` holds the extra complex factor of each path on top of the
    free-space amplitude (1 for LoS, the reflection coefficient otherwise).
    """

    user: int
    distance: np.ndarray
    azimuth: np.ndarray
    polar: np.ndarray
    rx_angle: np.ndarray
    scale: np.ndarray

    @property
    def n_paths(self) -> int:
        return len(self.distance)

    def gains(self, freq: float) -> np.ndarray:
        """Complex path gains at carrier ``freq`` (Friis amplitude times ``scale``)."""
        return SPEED_OF_LIGHT / (4 * np.pi * freq * self.distance) * self.scale


@dataclass(frozen=True)
class PortChannelTensor:
    user: int
    band: int
    matrix: np.ndarray  # n_ports x subarray_size

    @property
    def n_ports(self) -> int:
        return self.matrix.shape[0]


def upa_dims(n: int) -> tuple[int, int]:
    """Squarest factorisation ``n = X * Z`` with ``X >= Z``."""
    z = int(math.isqrt(n))
    while n % z:
        z -= 1
    return n // z, z


def make_bands(config: ScenarioConfig) -> list[BandSpec]:
    return [
        BandSpec(k, f * 1e9, config.bandwidth_fraction * f * 1e9)
        for k, f in enumerate(config.bands_ghz)
    ]


def drop_users(config: ScenarioConfig, seed: int) -> list[UserPaths]:
    """Drop ``n_users`` uniformly over the annular sector and build their paths."""
    if config.n_users <= 0:
        raise ConfigError("n_users must be positive")
    if config.r_min >= config.r_max:
        raise ConfigError("r_min must be below the coverage radius")
    if config.n_paths not in (1, 2):
        raise ConfigError("only LoS and LoS + ground reflection are supported")

    rng = np.random.default_rng(seed % 2**64)
    u = config.n_users
    radius = np.sqrt(rng.uniform(config.r_min**2, config.r_max**2, size=u))
    half = np.deg2rad(config.sector_deg) / 2
    offset = rng.uniform(-half, half, size=u)  # azimuth about boresight

    dh_los = config.h_bs - config.h_ue
    dh_ref = config.h_bs + config.h_ue
    reflection = config.reflection_mag * np.exp(1j * np.deg2rad(config.reflection_phase_deg))
    antenna = 10 ** (config.link_gain_db / 20)

    users = []
    for i in range(u):
        d_los = math.hypot(radius[i], dh_los)
        d_ref = math.hypot(radius[i], dh_ref)
        phi = np.pi / 2 - offset[i]
        distance = [d_los]
        polar = [np.arccos(-dh_los / d_los)]
        rx = [np.arcsin(dh_los / d_los)]
        scale = [antenna + 0j]
        if config.n_paths == 2:
            distance.append(d_ref)
            polar.append(np.arccos(-dh_ref / d_ref))
            rx.append(-np.arcsin(dh_ref / d_ref))
            scale.append(antenna * reflection)
        users.append(
            UserPaths(
                user=i,
                distance=np.array(distance),
                azimuth=np.full(len(distance), phi),
                polar=np.array(polar),
                rx_angle=np.array(rx),
                scale=np.array(scale, dtype=complex),
            )
        )
    return users


def tx_steering_vector(band: BandSpec, polar: float, azimuth: float, dims: tuple[int, int]) -> np.ndarray:
    """UPA response, element ``(x, z)`` stored at ``x * Z + z``."""
    nx, nz = dims
    k = 2 * np.pi / band.wavelength * band.antenna_spacing
    x = np.arange(nx)[:, None]
    z = np.arange(nz)[None, :]
    phase = k * (x * np.sin(polar) * np.cos(azimuth) + z * np.cos(polar))
    return np.exp(1j * phase).ravel()


def rx_port_phase_vector(band: BandSpec, rx_angle: float, n_ports: int, port_spacing: float) -> np.ndarray:
    k = 2 * np.pi / band.wavelength
    return np.exp(1j * k * port_spacing * np.arange(n_ports) * np.sin(rx_angle))


def pseudo_channel(user: UserPaths, band: BandSpec, array: ArraySpec) -> PortChannelTensor:
    """Channel from one subarray to every candidate port of the user's PFA."""
    dims = array.dims
    d_p = array.port_spacing(band)
    coef = user.gains(band.center_freq) * np.exp(-2j * np.pi * user.distance / band.wavelength)
    a_r = np.stack([rx_port_phase_vector(band, a, array.n_ports, d_p) for a in user.rx_angle])
    a_t = np.stack([tx_steering_vector(band, t, p, dims) for t, p in zip(user.polar, user.azimuth)])
    matrix = (a_r * coef[:, None]).T @ a_t.conj()
    if matrix.shape != (array.n_ports, array.subarray_size):
        raise RuntimeError("pseudo channel has unexpected shape")
    return PortChannelTensor(user.user, band.index, matrix)


def channel_row(tensor: PortChannelTensor, port: int) -> np.ndarray:
    """Channel seen when the PFA sits at ``port`` (1-based)."""
    if not 1 <= port <= tensor.n_ports:
        raise IndexError(f"port {port} outside 1..{tensor.n_ports}")
    return tensor.matrix[port - 1]
